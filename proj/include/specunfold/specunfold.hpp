#pragma once

// Umbrella header.

#include "specunfold/benchmark.hpp"
#include "specunfold/core.hpp"
#include "specunfold/dea.hpp"
#include "specunfold/evolution.hpp"
#include "specunfold/fitness.hpp"
#include "specunfold/forward_model.hpp"
#include "specunfold/ga.hpp"
#include "specunfold/io.hpp"
#include "specunfold/landscape.hpp"
#include "specunfold/metrics.hpp"
#include "specunfold/summary.hpp"
#include "specunfold/synthetic.hpp"
