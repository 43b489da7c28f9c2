#pragma once

/// @file zorb.hpp Umbrella header for the whole library.

#include "zorb/activations.hpp"
#include "zorb/baselines.hpp"
#include "zorb/bench.hpp"
#include "zorb/conv.hpp"
#include "zorb/data.hpp"
#include "zorb/errors.hpp"
#include "zorb/layers.hpp"
#include "zorb/linalg.hpp"
#include "zorb/matrix.hpp"
#include "zorb/metrics.hpp"
#include "zorb/network.hpp"
#include "zorb/rng.hpp"
#include "zorb/train.hpp"
#include "zorb/version.hpp"
