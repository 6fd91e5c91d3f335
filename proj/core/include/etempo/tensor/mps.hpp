#ifndef ETEMPO_TENSOR_MPS_HPP
#define ETEMPO_TENSOR_MPS_HPP

#include <optional>
#include <string>
#include <vector>

#include "etempo/tensor/decomp.hpp"
#include "etempo/tensor/labeled_tensor.hpp"

namespace etempo {

/// 1D tensor train.  Site i carries one physical index (named phys(i)) plus
/// a bond to each existing neighbor; the first/last sites have exactly one
/// bond.  Bond labels are managed internally.
class MatrixProductState {
 public:
  MatrixProductState() = default;

  /// Product state from per-site vectors (rank-1 tensors, label = phys name).
  static MatrixProductState from_product(
      const std::vector<LabeledTensor>& vectors);
  /// Takes ownership of explicit site tensors.  sites[i] must carry
  /// phys[i] plus bonds[i-1], bonds[i] where present.
  static MatrixProductState from_sites(std::vector<LabeledTensor> sites,
                                       std::vector<std::string> phys,
                                       std::vector<std::string> bonds);

  std::size_t size() const { return sites_.size(); }
  const LabeledTensor& site(std::size_t i) const { return sites_[i]; }
  LabeledTensor& site(std::size_t i) { return sites_[i]; }
  const std::string& phys(std::size_t i) const { return phys_[i]; }
  const std::string& bond(std::size_t i) const { return bonds_[i]; }
  std::size_t phys_dim(std::size_t i) const;
  std::vector<std::size_t> bond_dims() const;
  std::size_t max_bond_dim() const;
  int find_phys(const std::string& name) const;

  /// Contracts the whole train into one tensor (small chains / tests).
  LabeledTensor dense() const;

  /// Canonicalize right-to-left, then sweep left-to-right truncating every
  /// bond under the policy.  Leaves the train left-canonical.  Returns the
  /// total discarded weight (sum of discarded s^2 across bonds).
  double compress(const TruncationPolicy& policy);

  // internal plumbing shared with free functions below
  std::vector<LabeledTensor> sites_;
  std::vector<std::string> phys_;
  std::vector<std::string> bonds_;
  void relabel_bonds();
};

/// Operator train.  Site i maps phys_in(i) -> phys_out(i); in/out dimensions
/// may differ per site (used to create or retire chain slots).
class MatrixProductOperator {
 public:
  MatrixProductOperator() = default;

  static MatrixProductOperator from_sites(std::vector<LabeledTensor> sites,
                                          std::vector<std::string> phys_out,
                                          std::vector<std::string> phys_in,
                                          std::vector<std::string> bonds);
  /// Splits a dense operator into an MPO over the given site sequence.
  /// site_phys[i] = (out_label, in_label) of site i in `op`.
  static MatrixProductOperator from_dense(
      const LabeledTensor& op,
      const std::vector<std::pair<std::string, std::string>>& site_phys,
      const TruncationPolicy& policy = TruncationPolicy::lossless());
  static MatrixProductOperator identity(
      const std::vector<std::size_t>& phys_dims);

  std::size_t size() const { return sites_.size(); }
  const LabeledTensor& site(std::size_t i) const { return sites_[i]; }
  const std::string& phys_in(std::size_t i) const { return phys_in_[i]; }
  const std::string& phys_out(std::size_t i) const { return phys_out_[i]; }
  std::size_t in_dim(std::size_t i) const;
  std::size_t out_dim(std::size_t i) const;

  LabeledTensor dense() const;

  std::vector<LabeledTensor> sites_;
  std::vector<std::string> phys_out_, phys_in_, bonds_;
};

struct ApplyStats {
  double discarded_sq = 0;
  std::size_t max_bond = 0;
};

/// Exact MPO application followed by optimal SVD re-compression under the
/// policy (not a variational sweep).  Site counts and per-site in-dims must
/// match.  Result keeps the state's physical labels, left-canonical gauge.
MatrixProductState apply_mpo(const MatrixProductState& state,
                             const MatrixProductOperator& op,
                             const TruncationPolicy& policy,
                             ApplyStats* stats = nullptr);

/// Contracts the physical index of `site` with a closure vector and absorbs
/// the remainder into a neighbor; the chain shrinks by one site.  Closing a
/// one-site chain is an error (use full_contract).
MatrixProductState close_site(const MatrixProductState& state,
                              std::size_t site,
                              const std::vector<cplx>& closure);

enum class ChainEnd { kLeft, kRight };

/// Appends product sites (bond-1 connectors) at one end of the chain.
MatrixProductState extend(const MatrixProductState& state,
                          const std::vector<LabeledTensor>& new_sites,
                          ChainEnd end = ChainEnd::kRight);

/// Contracts every physical index with its closure and all bonds; returns
/// the resulting scalar.
cplx full_contract(const MatrixProductState& state,
                   const std::vector<std::vector<cplx>>& closures);

/// Train a dense tensor into an MPS over the given site order.
MatrixProductState tensor_train(const LabeledTensor& t,
                                const std::vector<std::string>& site_order,
                                const TruncationPolicy& policy);

}  // namespace etempo

#endif
