#pragma once

// Umbrella header.

#include "csfuse/analysis.hpp"
#include "csfuse/config.hpp"
#include "csfuse/copula.hpp"
#include "csfuse/covariance_detector.hpp"
#include "csfuse/detectors.hpp"
#include "csfuse/emit.hpp"
#include "csfuse/error.hpp"
#include "csfuse/gaussian_model.hpp"
#include "csfuse/harness.hpp"
#include "csfuse/ingest.hpp"
#include "csfuse/linops.hpp"
#include "csfuse/marginals.hpp"
#include "csfuse/parallel.hpp"
#include "csfuse/rng.hpp"
#include "csfuse/roc.hpp"
#include "csfuse/scenarios.hpp"
#include "csfuse/special.hpp"
