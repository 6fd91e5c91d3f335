#ifndef ETEMPO_ENGINE_LAYERS_HPP
#define ETEMPO_ENGINE_LAYERS_HPP

#include <vector>

#include "etempo/influence/factors.hpp"
#include "etempo/tensor/mps.hpp"

namespace etempo {

/// Chain layout of the boundary state.  The system edge occupies the first
/// eleven slots; each retained lag owns a twelve-slot register group.  Slot
/// dims oscillate between parked (1) and active within a block; between
/// blocks only the incoming system edge (eSL, eSR) and the pending-record
/// registers (aP, aS, aL) are active.
struct ChainSchema {
  std::size_t d = 2;   // composite Hilbert dimension
  std::size_t K = 1;   // retained lags (tap slots 1..K)

  static constexpr std::size_t kEdge = 11;
  static constexpr std::size_t kGroup = 12;
  // edge offsets
  enum Edge { eSL = 0, eSR, ePL, ePR, eK, eM1, eM2, eQ1, eQ2, eS1, eP2 };
  // group offsets
  enum Reg { aP = 0, tP, tT, tM, aS, tS, tS2, tQ, tQ2, tU, tU2, aL };

  std::size_t alpha() const { return d + 1; }
  std::size_t n_groups() const { return K + 1; }  // slot 0 is consumed
  std::size_t size() const { return kEdge + kGroup * n_groups(); }
  std::size_t group_pos(std::size_t slot, Reg r) const {
    return kEdge + kGroup * slot + static_cast<std::size_t>(r);
  }
  /// Active dim of a register when its group is live between blocks.
  std::size_t reg_rest_dim(Reg r) const;
  /// Builds the rest-state product chain (neutral registers, parked temps);
  /// the system edge is seeded separately.
  MatrixProductState rest_chain(const Vec& s_edge_vec) const;
  std::vector<std::string> site_names() const;
};

/// All per-block pass operators; stationary across blocks for a fixed lag
/// window, so they are assembled once per run.
class BlockPasses {
 public:
  BlockPasses(const EFactors& ef, const std::vector<MFactors>& mf_per_lag,
              const IndexScheme& scheme, std::size_t K);

  /// Applies the full influence block: seven edge passes, then the nine
  /// register-chain passes.  The chain must be in its rest layout extended
  /// by the fresh slot-K group; afterwards the edge holds (ePL, ePR) and
  /// slot 0 is spent.
  void apply(MatrixProductState& chain, const TruncationPolicy& policy,
             ApplyStats* stats) const;

  const ChainSchema& schema() const { return schema_; }

 private:
  ChainSchema schema_;
  std::vector<MatrixProductOperator> edge_passes_;   // applied at position 0
  std::vector<MatrixProductOperator> chain_passes_;  // full-chain
};

/// Exact MPO application restricted to sites [start, start + op.size());
/// compresses only within the window (lossless threshold), leaving the
/// remainder of the chain untouched.
void apply_mpo_range(MatrixProductState& chain, const MatrixProductOperator& op,
                     std::size_t start, ApplyStats* stats = nullptr);

}  // namespace etempo

#endif
