// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace repsim {

// xoshiro256** seeded via splitmix64. Used instead of <random> engines and
// distributions so that streams are bit-identical across platforms and
// standard-library versions (event logs must replay byte-for-byte).
class Rng {
  public:
    Rng() : Rng(0x9e3779b97f4a7c15ULL, "default") {}

    Rng(uint64_t seed, std::string_view stream) {
        uint64_t x = seed ^ label_hash(stream);
        for (auto& word : state_) {
            word = splitmix64(x);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform in [-bound, bound]
    double symmetric(double bound) { return uniform(-bound, bound); }

    // uniform integer in [lo, hi]
    uint64_t uniform_int(uint64_t lo, uint64_t hi) {
        return lo + next_u64() % (hi - lo + 1);
    }

    bool coin(double p) { return uniform() < p; }

    std::string hex(size_t chars) {
        static const char* digits = "0123456789abcdef";
        std::string out;
        out.reserve(chars);
        uint64_t word = 0;
        int avail = 0;
        for (size_t i = 0; i < chars; ++i) {
            if (avail == 0) {
                word = next_u64();
                avail = 16;
            }
            out.push_back(digits[word & 0xf]);
            word >>= 4;
            --avail;
        }
        return out;
    }

    // Independent child stream; consuming from the child never perturbs the
    // parent's sequence.
    Rng fork(std::string_view label) {
        uint64_t mix = next_u64();
        return Rng(mix ^ label_hash(label), label);
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static uint64_t label_hash(std::string_view s) {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    uint64_t state_[4];
};

} // namespace repsim
