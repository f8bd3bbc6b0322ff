// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "repsim/bench/bench.hpp"
#include "repsim/bench/extrapolate.hpp"
#include "repsim/harness/audit.hpp"
#include "repsim/harness/event_log.hpp"
#include "repsim/harness/replay.hpp"
#include "repsim/harness/report.hpp"
#include "repsim/harness/scenario.hpp"
#include "repsim/harness/simulator.hpp"
#include "repsim/he/factory.hpp"
#include "repsim/identity/authority.hpp"
#include "repsim/protocol/business_node.hpp"
#include "repsim/protocol/engine_pool.hpp"
#include "repsim/protocol/entities.hpp"
#include "repsim/protocol/evidence.hpp"
#include "repsim/reputation/aggregate.hpp"
#include "repsim/reputation/profile.hpp"
#include "repsim/reputation/state.hpp"
