#ifndef ETEMPO_ENGINE_ENGINE_HPP
#define ETEMPO_ENGINE_ENGINE_HPP

#include <vector>

#include "etempo/bath/kernel.hpp"
#include "etempo/engine/request.hpp"

namespace etempo {

/// Boundary-train contraction of the influence network: per time step the
/// seven edge factor passes and the six register-chain factor passes are
/// applied, the system propagator row is attached at the edge, spent sites
/// are traced out, and a fresh lag register enters the horizon.
TimeSeries run_correlation(const CorrelationRequest& req,
                           const SystemSpec& sys, const PairKernel& kernel);

/// Same contraction, read out with several operators in one sweep.
std::vector<TimeSeries> run_correlation_multi(
    const CorrelationRequest& req, const SystemSpec& sys,
    const PairKernel& kernel, const std::vector<Mat>& readouts);

/// Reduced system density matrices on the step grid (complete operator-basis
/// readout of one run).
std::vector<Mat> reduced_density_series(const Mat& rho0, const SystemSpec& sys,
                                        const PairKernel& kernel,
                                        std::size_t steps, double dt,
                                        const TruncationPolicy& policy,
                                        std::size_t memory_horizon,
                                        TimeSeries* meta = nullptr);

/// <P(t) P+(0)> from the given initial state; P sums the 0<->1 lowering
/// operator over all emitters (or one, when local >= 0).
TimeSeries single_quantum(const SystemSpec& sys, const PairKernel& kernel,
                          const Mat& rho0, std::size_t steps, double dt,
                          const TruncationPolicy& policy,
                          std::size_t memory_horizon, int local = -1);

/// <P(t) P(t) P+(0) P+(0)> from the given initial state.
TimeSeries double_quantum(const SystemSpec& sys, const PairKernel& kernel,
                          const Mat& rho0, std::size_t steps, double dt,
                          const TruncationPolicy& policy,
                          std::size_t memory_horizon);

/// Dense realization of the same register recursion (no train compression);
/// exponential in the horizon, for cross-validation at desk scale.
TimeSeries dense_reference_correlation(const CorrelationRequest& req,
                                       const SystemSpec& sys,
                                       const PairKernel& kernel);

/// Collective lowering operator P (0<->1 on every emitter, unit weights).
Mat collective_lowering(const CompositeBasis& basis);

}  // namespace etempo

#endif
