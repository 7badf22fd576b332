#pragma once

// Umbrella header.

#include "baws/error.hpp"
#include "baws/types.hpp"
#include "baws/random.hpp"
#include "baws/scoring.hpp"
#include "baws/estimators.hpp"
#include "baws/bootstrap.hpp"
#include "baws/saws_threshold.hpp"
#include "baws/selection.hpp"
#include "baws/baselines.hpp"
#include "baws/scenarios.hpp"
#include "baws/metrics.hpp"
#include "baws/parallel.hpp"
#include "baws/backtest.hpp"
#include "baws/experiment.hpp"
#include "baws/io.hpp"
