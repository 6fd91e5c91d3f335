#ifndef ETEMPO_TENSOR_DECOMP_HPP
#define ETEMPO_TENSOR_DECOMP_HPP

#include <limits>
#include <string>
#include <vector>

#include "etempo/tensor/labeled_tensor.hpp"

namespace etempo {

struct SvdError : TensorError {
  using TensorError::TensorError;
};

/// Dual truncation control: whichever of max_bond / cutoff truncates more
/// wins.  cutoff is a relative discarded-weight threshold on sum(s^2).
struct TruncationPolicy {
  std::size_t max_bond = std::numeric_limits<std::size_t>::max();
  double cutoff = 0.0;

  static TruncationPolicy lossless() { return {}; }
};

struct SvdResult {
  LabeledTensor U;          // left labels + bond
  std::vector<double> s;    // retained singular values, nonincreasing
  LabeledTensor V;          // bond + right labels
  double discarded_sq = 0;  // sum of discarded s^2 (Frobenius^2 of the cut)
};

/// SVD of t matricized over (left_labels | rest), truncated per policy.
/// U and V carry the new bond label; U*diag(s)*V reconstructs t up to the
/// discarded weight.  Signals SvdError on LAPACK non-convergence.
SvdResult svd_truncate(const LabeledTensor& t,
                       const std::vector<std::string>& left_labels,
                       const TruncationPolicy& policy,
                       const std::string& bond_label = "__svd");

/// Solve the full (untruncated) singular spectrum; test/diagnostic helper.
std::vector<double> singular_values(const LabeledTensor& t,
                                    const std::vector<std::string>& left);

}  // namespace etempo

#endif
