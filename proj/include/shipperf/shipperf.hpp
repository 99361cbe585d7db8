#ifndef SHIPPERF_SHIPPERF_HPP
#define SHIPPERF_SHIPPERF_HPP

// Umbrella header.

#include "shipperf/calmwater.hpp"
#include "shipperf/core.hpp"
#include "shipperf/data.hpp"
#include "shipperf/errors.hpp"
#include "shipperf/eval.hpp"
#include "shipperf/io.hpp"
#include "shipperf/mlmodel.hpp"
#include "shipperf/quadrature.hpp"
#include "shipperf/rng.hpp"
#include "shipperf/svg.hpp"
#include "shipperf/units.hpp"
#include "shipperf/waves.hpp"
#include "shipperf/wind.hpp"

#endif
