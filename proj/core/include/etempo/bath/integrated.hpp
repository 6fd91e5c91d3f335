#ifndef ETEMPO_BATH_INTEGRATED_HPP
#define ETEMPO_BATH_INTEGRATED_HPP

#include <vector>

#include "etempo/bath/kernel.hpp"
#include "etempo/liouville/system.hpp"
#include "etempo/tensor/labeled_tensor.hpp"

namespace etempo {

/// Double-integrated correlation tensors over dT intervals, with the
/// midpoint-anchored level-difference phases of the rotating frame.  For each
/// lag and emitter pair two operator orderings are kept:
///   fwd: later-time operator leftmost in the bath trace,
///   rev: earlier-time operator leftmost.
/// Cross-interval tensors depend only on the lag (stationary by
/// construction); lag 0 holds the time-ordered same-interval integrals.
/// Tensor labels: (i, j) later transition on emitter n, (k, l) earlier on m.
struct KernelTensors {
  struct Block {
    LabeledTensor fwd, rev;
  };
  double dt = 0;
  double frame = 0;
  std::size_t n_max = 0;
  std::vector<std::size_t> levels;                      // per emitter
  std::vector<std::vector<std::vector<Block>>> blocks;  // [lag][n][m]

  const Block& at(std::size_t lag, std::size_t n, std::size_t m) const {
    return blocks[lag][n][m];
  }
};

/// Nested Gauss-Legendre integration of the kernel over interval pairs.
/// Errors when n_max * dt exceeds the kernel's stated memory extent.
KernelTensors integrated_kernels(const PairKernel& kernel,
                                 const std::vector<EmitterSpec>& emitters,
                                 double dt, std::size_t n_max,
                                 std::size_t gl_points = 24);

}  // namespace etempo

#endif
