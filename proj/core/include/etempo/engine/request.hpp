#ifndef ETEMPO_ENGINE_REQUEST_HPP
#define ETEMPO_ENGINE_REQUEST_HPP

#include <complex>
#include <limits>
#include <vector>

#include "etempo/liouville/system.hpp"
#include "etempo/tensor/decomp.hpp"

namespace etempo {

/// One operator insertion in the multitime string, at time step * dt.
struct Insertion {
  std::size_t step;
  Mat op;  // Liouville superoperator, d^2 x d^2
};

/// A time-ordered correlation request.  The readout superoperator is applied
/// (followed by the trace) at every integer step to produce the series; the
/// fixed insertions act at their own steps, inside the readout.
struct CorrelationRequest {
  std::vector<Insertion> insertions;  // steps nondecreasing
  Mat rho0;                           // d x d initial system density matrix
  Mat readout;                        // Liouville superoperator (often A_L)
  std::size_t steps = 0;              // number of dt intervals M
  double dt = 0;
  TruncationPolicy policy;
  std::size_t memory_horizon = std::numeric_limits<std::size_t>::max();
  double truncation_ceiling = 1e-2;  // cumulative discarded-weight warning

  void validate(std::size_t d) const;
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<cplx> values;
  // run metadata
  double dt = 0;
  std::size_t max_bond = 0;
  double discarded_weight = 0;
  bool truncation_warning = false;
};

}  // namespace etempo

#endif
