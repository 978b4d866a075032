#pragma once

// Umbrella header for the tvzip library: count-series models with
// time-varying zero-inflated Poisson observations, simulation, EM and
// Newton-Raphson maximum-likelihood estimation, information-criteria model
// selection, and a Monte-Carlo recovery-study harness.

#include "tvzip/model.hpp"
#include "tvzip/zero_inflation.hpp"
#include "tvzip/zip.hpp"
#include "tvzip/rng.hpp"
#include "tvzip/simulate.hpp"
#include "tvzip/newton.hpp"
#include "tvzip/estimate.hpp"
#include "tvzip/study.hpp"
#include "tvzip/csv.hpp"
