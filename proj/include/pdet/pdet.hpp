#pragma once

// Umbrella header for the packet-detection library: compensated
// autocorrelation metrics, closed-form error probabilities, antenna-weight
// optimization, Monte Carlo validation, MD-FA Pareto benchmarking, and the
// SNR-dataset emulation pipeline.

#include "pdet/analytic.hpp"
#include "pdet/dataset.hpp"
#include "pdet/detection_metrics.hpp"
#include "pdet/io.hpp"
#include "pdet/montecarlo.hpp"
#include "pdet/parallel.hpp"
#include "pdet/pareto.hpp"
#include "pdet/qfunc.hpp"
#include "pdet/rng.hpp"
#include "pdet/signal_model.hpp"
#include "pdet/simplex.hpp"
#include "pdet/weights.hpp"

namespace pdet {

inline constexpr const char* version = "0.1.0";

}  // namespace pdet
