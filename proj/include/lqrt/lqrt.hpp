#pragma once

// Umbrella header for the robust Lq-likelihood-ratio testing library.

#include "lqrt/baselines.hpp"
#include "lqrt/errors.hpp"
#include "lqrt/gemsim.hpp"
#include "lqrt/lqmath.hpp"
#include "lqrt/lqrtest.hpp"
#include "lqrt/mlqe.hpp"
#include "lqrt/parallel.hpp"
#include "lqrt/random.hpp"
#include "lqrt/special.hpp"
