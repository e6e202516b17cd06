#pragma once

// Umbrella header: spectral ranking estimation and rank inference for general
// multiway comparison data.

#include "specrank/bootstrap.hpp"
#include "specrank/csv.hpp"
#include "specrank/data.hpp"
#include "specrank/diagnostics.hpp"
#include "specrank/errors.hpp"
#include "specrank/generators.hpp"
#include "specrank/inference.hpp"
#include "specrank/io.hpp"
#include "specrank/mle.hpp"
#include "specrank/montecarlo.hpp"
#include "specrank/rng.hpp"
#include "specrank/spectral.hpp"
#include "specrank/variance.hpp"
#include "specrank/weights.hpp"
