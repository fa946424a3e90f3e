#pragma once

// Umbrella header for the partial-linear regression discontinuity toolkit.

#include "plrd/bandwidth.hpp"
#include "plrd/csv.hpp"
#include "plrd/dataset.hpp"
#include "plrd/density.hpp"
#include "plrd/dgp.hpp"
#include "plrd/error.hpp"
#include "plrd/estimate.hpp"
#include "plrd/ik.hpp"
#include "plrd/kernel.hpp"
#include "plrd/kernel_functionals.hpp"
#include "plrd/local_polynomial.hpp"
#include "plrd/ple.hpp"
#include "plrd/porter.hpp"
#include "plrd/quadrature.hpp"
#include "plrd/rng.hpp"
#include "plrd/sim_io.hpp"
#include "plrd/simulation.hpp"
#include "plrd/stats.hpp"
#include "plrd/variance.hpp"
#include "plrd/version.hpp"
