#ifndef ETEMPO_ORACLE_BRUTE_FORCE_HPP
#define ETEMPO_ORACLE_BRUTE_FORCE_HPP

#include "etempo/bath/kernel.hpp"
#include "etempo/engine/request.hpp"

namespace etempo {

/// Ground-truth evaluation of the multitime correlator by explicit summation
/// over interaction configurations: every interval carries 0, 1, or 2 bath
/// insertions, single insertions pair up across intervals, and the resulting
/// dense network is contracted without any train representation or
/// truncation.  The double time integrals use an independent quadrature.
/// Intended for M <= 6; throws when the configuration count exceeds the
/// budget.
TimeSeries brute_force_correlation(const CorrelationRequest& req,
                                   const SystemSpec& sys,
                                   const PairKernel& kernel,
                                   std::size_t config_budget = 100000000);

/// Free-system evaluation of the same request (zero coupling reference).
TimeSeries free_evolution_series(const CorrelationRequest& req,
                                 const SystemSpec& sys);

}  // namespace etempo

#endif
