// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once
#if REPSIM_HAVE_LATTICE

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <gmpxx.h>

#include "repsim/common/rng.hpp"

namespace repsim::he::lattice {

// Negacyclic ring Z_q[X]/(X^n + 1), n a power of two, coefficients kept
// canonical in [0, q). Schoolbook multiplication; desk-scale degrees only.
struct Poly {
    std::vector<mpz_class> c;

    explicit Poly(size_t n = 0) : c(n) {}
    size_t degree() const { return c.size(); }
};

inline mpz_class mod_canonical(const mpz_class& x, const mpz_class& q) {
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), q.get_mpz_t());
    return r;
}

inline mpz_class center(const mpz_class& x, const mpz_class& q) {
    mpz_class r = mod_canonical(x, q);
    if (r * 2 > q) r -= q;
    return r;
}

// round(x / d), d > 0, any sign of x
inline mpz_class div_round(const mpz_class& x, const mpz_class& d) {
    mpz_class num = 2 * x + d;
    mpz_class den = 2 * d;
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

inline Poly poly_add(const Poly& a, const Poly& b, const mpz_class& q) {
    Poly out(a.degree());
    for (size_t i = 0; i < a.degree(); ++i) out.c[i] = mod_canonical(a.c[i] + b.c[i], q);
    return out;
}

inline Poly poly_sub(const Poly& a, const Poly& b, const mpz_class& q) {
    Poly out(a.degree());
    for (size_t i = 0; i < a.degree(); ++i) out.c[i] = mod_canonical(a.c[i] - b.c[i], q);
    return out;
}

inline Poly poly_mul(const Poly& a, const Poly& b, const mpz_class& q) {
    size_t n = a.degree();
    std::vector<mpz_class> acc(n);
    for (size_t i = 0; i < n; ++i) {
        if (a.c[i] == 0) continue;
        for (size_t j = 0; j < n; ++j) {
            if (b.c[j] == 0) continue;
            size_t k = i + j;
            if (k < n) {
                mpz_addmul(acc[k].get_mpz_t(), a.c[i].get_mpz_t(), b.c[j].get_mpz_t());
            } else {
                mpz_submul(acc[k - n].get_mpz_t(), a.c[i].get_mpz_t(), b.c[j].get_mpz_t());
            }
        }
    }
    Poly out(n);
    for (size_t i = 0; i < n; ++i) out.c[i] = mod_canonical(acc[i], q);
    return out;
}

inline Poly poly_reduce(const Poly& a, const mpz_class& q) {
    Poly out(a.degree());
    for (size_t i = 0; i < a.degree(); ++i) out.c[i] = mod_canonical(a.c[i], q);
    return out;
}

// centered divide-round of every coefficient, then canonicalize mod q_out
inline Poly poly_rescale(const Poly& a, const mpz_class& q_in, const mpz_class& divisor,
                         const mpz_class& q_out) {
    Poly out(a.degree());
    for (size_t i = 0; i < a.degree(); ++i) {
        out.c[i] = mod_canonical(div_round(center(a.c[i], q_in), divisor), q_out);
    }
    return out;
}

inline Poly sample_uniform(size_t n, const mpz_class& q, Rng& rng) {
    size_t hex_chars = mpz_sizeinbase(q.get_mpz_t(), 16) + 8;
    Poly out(n);
    for (size_t i = 0; i < n; ++i) {
        mpz_class v(rng.hex(hex_chars), 16);
        out.c[i] = mod_canonical(v, q);
    }
    return out;
}

inline Poly sample_ternary(size_t n, Rng& rng) {
    Poly out(n);
    for (size_t i = 0; i < n; ++i) out.c[i] = static_cast<long>(rng.uniform_int(0, 2)) - 1;
    return out;
}

// centered binomial, sigma ~ sqrt(21/2) ~ 3.2
inline Poly sample_noise(size_t n, const mpz_class& q, Rng& rng) {
    Poly out(n);
    for (size_t i = 0; i < n; ++i) {
        int acc = 0;
        uint64_t bits = rng.next_u64();
        for (int k = 0; k < 21; ++k) acc += static_cast<int>((bits >> k) & 1);
        bits = rng.next_u64();
        for (int k = 0; k < 21; ++k) acc -= static_cast<int>((bits >> k) & 1);
        out.c[i] = mod_canonical(mpz_class(acc), q);
    }
    return out;
}

// Canonical embedding: a real polynomial is evaluated at the primitive
// 2n-th roots of unity exp(i*pi*(2j+1)/n); conjugate pairs give n/2 usable
// complex slots, of which we expose the real parts.
class Encoder {
  public:
    Encoder(size_t n, double scale) : n_(n), scale_(scale) {
        roots_.resize(n_ / 2);
        for (size_t j = 0; j < n_ / 2; ++j) {
            double angle = M_PI * (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(n_);
            roots_[j] = std::polar(1.0, angle);
        }
    }

    size_t slot_capacity() const { return n_ / 2; }
    double scale() const { return scale_; }

    Poly encode(const std::vector<double>& values, const mpz_class& q) const {
        Poly out(n_);
        std::vector<std::complex<double>> pw(values.size(), {1.0, 0.0});
        for (size_t k = 0; k < n_; ++k) {
            double acc = 0.0;
            for (size_t j = 0; j < values.size(); ++j) {
                // Re(z_j * root_j^{-k}) with real z_j; cos is even so the
                // forward power works
                acc += values[j] * pw[j].real();
                pw[j] *= roots_[j];
            }
            double coeff = std::round(acc * 2.0 / static_cast<double>(n_) * scale_);
            out.c[k] = mod_canonical(mpz_from_double(coeff), q);
        }
        return out;
    }

    std::vector<double> decode(const Poly& m, const mpz_class& q, size_t used,
                               double extra_scale = 1.0) const {
        std::vector<double> centered(n_);
        for (size_t k = 0; k < n_; ++k) centered[k] = center(m.c[k], q).get_d();
        std::vector<double> out(used);
        for (size_t j = 0; j < used; ++j) {
            // Horner evaluation at root_j
            std::complex<double> acc(0.0, 0.0);
            for (size_t k = n_; k-- > 0;) acc = acc * roots_[j] + centered[k];
            out[j] = acc.real() / (scale_ * extra_scale);
        }
        return out;
    }

  private:
    static mpz_class mpz_from_double(double v) {
        mpz_class out;
        mpz_set_d(out.get_mpz_t(), v);
        return out;
    }

    size_t n_;
    double scale_;
    std::vector<std::complex<double>> roots_;
};

} // namespace repsim::he::lattice

#endif // REPSIM_HAVE_LATTICE
