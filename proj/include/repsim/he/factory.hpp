// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include "repsim/he/sim_backend.hpp"
#if REPSIM_HAVE_LATTICE
#include "repsim/he/lattice_backend.hpp"
#endif

namespace repsim::he {

inline std::unique_ptr<Backend> make_backend(const HeParams& params, uint64_t seed) {
    params.validate();
    if (params.backend_kind == BackendKind::simulation) {
        return std::make_unique<SimBackend>(params, seed);
    }
#if REPSIM_HAVE_LATTICE
    return std::make_unique<LatticeBackend>(params, seed);
#else
    fail(Errc::invalid_params, "lattice backend was not built (REPSIM_ENABLE_LATTICE=OFF)");
#endif
}

} // namespace repsim::he
