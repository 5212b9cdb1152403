#pragma once

// Library core. The experiment runner (secperc/experiment.hpp) is separate
// because it needs OpenSSL and the vendored JSON header.

#include "secperc/analytic.hpp"
#include "secperc/disjoint_set.hpp"
#include "secperc/errors.hpp"
#include "secperc/estimators.hpp"
#include "secperc/geometry.hpp"
#include "secperc/model.hpp"
#include "secperc/parallel.hpp"
#include "secperc/rng.hpp"
#include "secperc/secrecy_graph.hpp"
#include "secperc/special.hpp"
#include "secperc/stats.hpp"
