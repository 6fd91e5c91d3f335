#ifndef ETEMPO_TENSOR_LABELED_TENSOR_HPP
#define ETEMPO_TENSOR_LABELED_TENSOR_HPP

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace etempo {

using cplx = std::complex<double>;

struct TensorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense complex tensor with named indices, stored row-major over the label
/// ordering.  All contraction machinery in the library runs through this type.
class LabeledTensor {
 public:
  LabeledTensor() = default;
  LabeledTensor(std::vector<std::string> labels, std::vector<std::size_t> dims);
  LabeledTensor(std::vector<std::string> labels, std::vector<std::size_t> dims,
                std::vector<cplx> entries);

  static LabeledTensor scalar(cplx value);
  /// Rank-2 identity over (row_label, col_label).
  static LabeledTensor identity(const std::string& row, const std::string& col,
                                std::size_t dim);
  /// Rank-1 basis vector e_k.
  static LabeledTensor basis(const std::string& label, std::size_t dim,
                             std::size_t k);

  std::size_t rank() const { return labels_.size(); }
  std::size_t size() const { return data_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t dim(const std::string& label) const;
  bool has_label(const std::string& label) const;
  int label_pos(const std::string& label) const;

  const std::vector<cplx>& data() const { return data_; }
  std::vector<cplx>& data() { return data_; }

  cplx& operator[](std::size_t flat) { return data_[flat]; }
  const cplx& operator[](std::size_t flat) const { return data_[flat]; }

  cplx& at(const std::vector<std::size_t>& idx) { return data_[offset(idx)]; }
  const cplx& at(const std::vector<std::size_t>& idx) const {
    return data_[offset(idx)];
  }
  std::size_t offset(const std::vector<std::size_t>& idx) const;

  /// In-place label rename; dims and data untouched.
  void rename(const std::string& from, const std::string& to);
  LabeledTensor renamed(
      const std::vector<std::pair<std::string, std::string>>& map) const;

  /// Returns a copy with axes reordered to `order` (a permutation of labels()).
  LabeledTensor permuted(const std::vector<std::string>& order) const;

  /// Fuses a group of adjacent-after-permutation labels into one label whose
  /// dimension is the product (row-major over the listed order).
  LabeledTensor fused(const std::vector<std::string>& group,
                      const std::string& fused_label) const;
  /// Splits `label` back into parts with the given dims (inverse of fused).
  LabeledTensor split(const std::string& label,
                      const std::vector<std::string>& parts,
                      const std::vector<std::size_t>& part_dims) const;

  LabeledTensor conjugated() const;
  double norm() const;

  LabeledTensor& operator*=(cplx s);
  LabeledTensor& operator+=(const LabeledTensor& other);  // label-aligned

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> dims_;
  std::vector<cplx> data_;
  void check_invariants() const;
};

/// Pairwise contraction over the given label pairs (first from a, second from
/// b).  Result labels are the uncontracted labels of a followed by those of b.
LabeledTensor contract(const LabeledTensor& a, const LabeledTensor& b,
                       const std::vector<std::pair<std::string, std::string>>&
                           pairs);

/// Contraction over all labels the two tensors share (by equal name).
LabeledTensor contract_shared(const LabeledTensor& a, const LabeledTensor& b);

/// Generalized product: entrywise (Hadamard) alignment over shared labels,
/// outer product over the rest, then summation over `sum_labels` (each of
/// which must occur in at least one operand).  contract() is the special
/// case where the summed labels are the only shared ones.
LabeledTensor multiply_shared(const LabeledTensor& a, const LabeledTensor& b,
                              const std::vector<std::string>& sum_labels);

}  // namespace etempo

#endif
