#pragma once

// Umbrella header for the CoReg library: multivariate association analysis
// with residual dependence modeled through co-expression network modules and
// a block confirmatory factor model.

#include "coreg/baselines.hpp"
#include "coreg/bench.hpp"
#include "coreg/csv.hpp"
#include "coreg/error.hpp"
#include "coreg/factor.hpp"
#include "coreg/inference.hpp"
#include "coreg/matrix.hpp"
#include "coreg/metrics.hpp"
#include "coreg/network.hpp"
#include "coreg/parallel.hpp"
#include "coreg/pipeline.hpp"
#include "coreg/regression.hpp"
#include "coreg/report.hpp"
#include "coreg/rng.hpp"
#include "coreg/simulate.hpp"
#include "coreg/stats.hpp"
#include "coreg/svg.hpp"
