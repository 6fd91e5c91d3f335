#ifndef ETEMPO_INFLUENCE_TENSORS_HPP
#define ETEMPO_INFLUENCE_TENSORS_HPP

#include <vector>

#include "etempo/bath/integrated.hpp"
#include "etempo/influence/scheme.hpp"
#include "etempo/liouville/system.hpp"
#include "etempo/tensor/labeled_tensor.hpp"

namespace etempo {

/// Kernel tensors lifted to composite-system Liouville elements.  Entry
/// (a2, b2, a1, b1) couples the later insertion's Hilbert element |a2><b2|
/// with the earlier insertion's |a1><b1|; fwd/rev give the two bath operator
/// orderings.  Index 0 holds the time-ordered same-interval integrals.
struct LiftedKernel {
  std::size_t d = 0;
  std::vector<LabeledTensor> fwd, rev;  // [lag], labels (a2, b2, a1, b1)

  std::size_t n_max() const { return fwd.size() - 1; }
};

LiftedKernel lift_kernel(const KernelTensors& kt, const CompositeBasis& basis);

// Fine-grained index labels shared by the influence tensors:
//   pL pR sL sR : Liouville components of the interval's out/in indices
//   k           : interaction-order index (KIndex encoding)
//   ap as l     : pending-interaction records handed to older intervals
// Primed partners on the recursion side carry a trailing 'p'.

/// Dense reference E-tensor with labels (pL, pR, sL, sR, k, ap, as, l).
LabeledTensor build_E(const LiftedKernel& lk, const IndexScheme& scheme);

/// Dense reference M-tensor at the given lag, labels
/// (pL, pR, sL, sR, k, ap, as, l, kp, app, asp, lp).
LabeledTensor build_M(const LiftedKernel& lk, std::size_t lag,
                      const IndexScheme& scheme);

/// Same-interval Liouville coupling block (the k = 2 slice of E), labels
/// (pL, pR, sL, sR).
LabeledTensor same_interval_block(const LiftedKernel& lk,
                                  const IndexScheme& scheme);

/// Cross-interval coupling consumed by M's interaction branch, labels
/// (pL, pR, sL, sR, l, u, v) where (u, v) are the later insertion's states.
LabeledTensor cross_interval_block(const LiftedKernel& lk, std::size_t lag,
                                   const IndexScheme& scheme);

}  // namespace etempo

#endif
