#pragma once

// Delay differential equations with history spaces: trajectories and
// history views, structural transforms on prolongations, Lipschitz
// estimators, the fixed-point solver with maximal continuation, reference
// oracles, and well-posedness probes.

#include "dde/vec.hpp"
#include "dde/errors.hpp"
#include "dde/past_interval.hpp"
#include "dde/segment.hpp"
#include "dde/history.hpp"
#include "dde/norms.hpp"
#include "dde/transforms.hpp"
#include "dde/functional.hpp"
#include "dde/lipschitz.hpp"
#include "dde/solver.hpp"
#include "dde/oracles.hpp"
#include "dde/wellposedness.hpp"
#include "dde/expr.hpp"
