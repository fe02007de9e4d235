#pragma once

// Umbrella header: the whole library.

#include "destripe/cube.hpp"
#include "destripe/errors.hpp"
#include "destripe/io.hpp"
#include "destripe/linop.hpp"
#include "destripe/metrics.hpp"
#include "destripe/pipeline.hpp"
#include "destripe/prox.hpp"
#include "destripe/regularizers.hpp"
#include "destripe/sim.hpp"
#include "destripe/solver.hpp"
#include "destripe/stripe_models.hpp"
