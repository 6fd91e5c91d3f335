#include "etempo/tensor/labeled_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>

#include <cblas.h>

namespace etempo {

namespace {
std::size_t product(const std::vector<std::size_t>& v) {
  std::size_t p = 1;
  for (auto d : v) p *= d;
  return p;
}
}  // namespace

LabeledTensor::LabeledTensor(std::vector<std::string> labels,
                             std::vector<std::size_t> dims)
    : labels_(std::move(labels)), dims_(std::move(dims)) {
  check_invariants();
  data_.assign(product(dims_), cplx(0.0, 0.0));
}

LabeledTensor::LabeledTensor(std::vector<std::string> labels,
                             std::vector<std::size_t> dims,
                             std::vector<cplx> entries)
    : labels_(std::move(labels)), dims_(std::move(dims)),
      data_(std::move(entries)) {
  check_invariants();
  if (data_.size() != product(dims_))
    throw TensorError("entry count does not match product of dims");
}

void LabeledTensor::check_invariants() const {
  if (labels_.size() != dims_.size())
    throw TensorError("labels/dims rank mismatch");
  for (auto d : dims_)
    if (d == 0) throw TensorError("zero dimension");
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size())
    throw TensorError("duplicate label within one tensor");
}

LabeledTensor LabeledTensor::scalar(cplx value) {
  LabeledTensor t;
  t.data_ = {value};
  return t;
}

LabeledTensor LabeledTensor::identity(const std::string& row,
                                      const std::string& col,
                                      std::size_t dim) {
  LabeledTensor t({row, col}, {dim, dim});
  for (std::size_t i = 0; i < dim; ++i) t.data_[i * dim + i] = 1.0;
  return t;
}

LabeledTensor LabeledTensor::basis(const std::string& label, std::size_t dim,
                                   std::size_t k) {
  LabeledTensor t({label}, {dim});
  t.data_.at(k) = 1.0;
  return t;
}

std::size_t LabeledTensor::dim(const std::string& label) const {
  int p = label_pos(label);
  if (p < 0) throw TensorError("unknown label: " + label);
  return dims_[p];
}

bool LabeledTensor::has_label(const std::string& label) const {
  return label_pos(label) >= 0;
}

int LabeledTensor::label_pos(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  return -1;
}

std::size_t LabeledTensor::offset(const std::vector<std::size_t>& idx) const {
  if (idx.size() != dims_.size()) throw TensorError("index rank mismatch");
  std::size_t off = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= dims_[i]) throw TensorError("index out of range");
    off = off * dims_[i] + idx[i];
  }
  return off;
}

void LabeledTensor::rename(const std::string& from, const std::string& to) {
  int p = label_pos(from);
  if (p < 0) throw TensorError("unknown label: " + from);
  if (from == to) return;
  if (has_label(to)) throw TensorError("rename collides with label " + to);
  labels_[p] = to;
}

LabeledTensor LabeledTensor::renamed(
    const std::vector<std::pair<std::string, std::string>>& map) const {
  LabeledTensor out = *this;
  for (const auto& [from, to] : map) out.rename(from, to);
  return out;
}

LabeledTensor LabeledTensor::permuted(
    const std::vector<std::string>& order) const {
  if (order.size() != labels_.size())
    throw TensorError("permutation rank mismatch");
  std::vector<std::size_t> perm(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    int p = label_pos(order[i]);
    if (p < 0) throw TensorError("unknown label: " + order[i]);
    perm[i] = static_cast<std::size_t>(p);
  }
  if (std::is_sorted(perm.begin(), perm.end())) {
    LabeledTensor out = *this;
    return out;  // already in this order
  }
  std::vector<std::size_t> new_dims(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) new_dims[i] = dims_[perm[i]];

  // old strides
  std::vector<std::size_t> ostride(dims_.size(), 1);
  for (int i = static_cast<int>(dims_.size()) - 2; i >= 0; --i)
    ostride[i] = ostride[i + 1] * dims_[i + 1];

  LabeledTensor out(order, new_dims);
  const std::size_t n = data_.size();
  const std::size_t r = order.size();
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  // walk the output in row-major order, tracking the source offset
  std::vector<std::size_t> sstride(r);
  for (std::size_t i = 0; i < r; ++i) sstride[i] = ostride[perm[i]];
  for (std::size_t o = 0; o < n; ++o) {
    out.data_[o] = data_[src];
    for (int ax = static_cast<int>(r) - 1; ax >= 0; --ax) {
      idx[ax]++;
      src += sstride[ax];
      if (idx[ax] < new_dims[ax]) break;
      src -= sstride[ax] * new_dims[ax];
      idx[ax] = 0;
    }
  }
  return out;
}

LabeledTensor LabeledTensor::fused(const std::vector<std::string>& group,
                                   const std::string& fused_label) const {
  if (group.empty()) throw TensorError("empty fuse group");
  auto in_group = [&](const std::string& l) {
    return std::find(group.begin(), group.end(), l) != group.end();
  };
  // permutation: original order, with the whole group (in its given order)
  // inserted where its first member appeared
  std::vector<std::string> order;
  bool emitted = false;
  for (const auto& l : labels_) {
    if (in_group(l)) {
      if (!emitted) {
        order.insert(order.end(), group.begin(), group.end());
        emitted = true;
      }
      continue;
    }
    order.push_back(l);
  }
  if (!emitted) throw TensorError("fuse group has no member in tensor");
  LabeledTensor p = permuted(order);

  std::vector<std::string> new_labels;
  std::vector<std::size_t> new_dims;
  std::size_t gdim = 1;
  for (const auto& g : group) gdim *= dim(g);
  for (std::size_t i = 0; i < p.labels_.size();) {
    if (in_group(p.labels_[i])) {
      new_labels.push_back(fused_label);
      new_dims.push_back(gdim);
      i += group.size();
    } else {
      new_labels.push_back(p.labels_[i]);
      new_dims.push_back(p.dims_[i]);
      ++i;
    }
  }
  return LabeledTensor(new_labels, new_dims, std::move(p.data_));
}

LabeledTensor LabeledTensor::split(const std::string& label,
                                   const std::vector<std::string>& parts,
                                   const std::vector<std::size_t>& part_dims)
    const {
  int p = label_pos(label);
  if (p < 0) throw TensorError("unknown label: " + label);
  if (parts.size() != part_dims.size())
    throw TensorError("split parts/dims mismatch");
  if (product(part_dims) != dims_[p])
    throw TensorError("split dims do not factor " + label);
  std::vector<std::string> new_labels;
  std::vector<std::size_t> new_dims;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (static_cast<int>(i) == p) {
      new_labels.insert(new_labels.end(), parts.begin(), parts.end());
      new_dims.insert(new_dims.end(), part_dims.begin(), part_dims.end());
    } else {
      new_labels.push_back(labels_[i]);
      new_dims.push_back(dims_[i]);
    }
  }
  return LabeledTensor(new_labels, new_dims, data_);
}

LabeledTensor LabeledTensor::conjugated() const {
  LabeledTensor out = *this;
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

double LabeledTensor::norm() const {
  double s = 0;
  for (const auto& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

LabeledTensor& LabeledTensor::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

LabeledTensor& LabeledTensor::operator+=(const LabeledTensor& other) {
  LabeledTensor aligned = other.permuted(labels_);
  if (aligned.dims() != dims_) throw TensorError("add: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += aligned.data_[i];
  return *this;
}

LabeledTensor contract(
    const LabeledTensor& a, const LabeledTensor& b,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<std::string> a_con, b_con;
  for (const auto& [la, lb] : pairs) {
    if (!a.has_label(la)) throw TensorError("unknown label in a: " + la);
    if (!b.has_label(lb)) throw TensorError("unknown label in b: " + lb);
    if (a.dim(la) != b.dim(lb))
      throw TensorError("dimension mismatch on pair (" + la + "," + lb + ")");
    a_con.push_back(la);
    b_con.push_back(lb);
  }
  std::vector<std::string> a_free, b_free;
  for (const auto& l : a.labels())
    if (std::find(a_con.begin(), a_con.end(), l) == a_con.end())
      a_free.push_back(l);
  for (const auto& l : b.labels())
    if (std::find(b_con.begin(), b_con.end(), l) == b_con.end())
      b_free.push_back(l);
  for (const auto& l : a_free)
    for (const auto& m : b_free)
      if (l == m) throw TensorError("duplicate result label: " + l);

  std::vector<std::string> a_order = a_free;
  a_order.insert(a_order.end(), a_con.begin(), a_con.end());
  std::vector<std::string> b_order = b_con;
  b_order.insert(b_order.end(), b_free.begin(), b_free.end());

  LabeledTensor ap = a.permuted(a_order);
  LabeledTensor bp = b.permuted(b_order);

  std::size_t M = 1, K = 1, N = 1;
  for (const auto& l : a_free) M *= a.dim(l);
  for (const auto& l : a_con) K *= a.dim(l);
  for (const auto& l : b_free) N *= b.dim(l);

  std::vector<std::string> out_labels = a_free;
  out_labels.insert(out_labels.end(), b_free.begin(), b_free.end());
  std::vector<std::size_t> out_dims;
  for (const auto& l : a_free) out_dims.push_back(a.dim(l));
  for (const auto& l : b_free) out_dims.push_back(b.dim(l));

  LabeledTensor out(out_labels, out_dims);
  const cplx one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(M),
              static_cast<int>(N), static_cast<int>(K), &one, ap.data().data(),
              static_cast<int>(K), bp.data().data(), static_cast<int>(N),
              &zero, out.data().data(), static_cast<int>(N));
  return out;
}

LabeledTensor contract_shared(const LabeledTensor& a, const LabeledTensor& b) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& l : a.labels())
    if (b.has_label(l)) pairs.emplace_back(l, l);
  return contract(a, b, pairs);
}

LabeledTensor multiply_shared(const LabeledTensor& a, const LabeledTensor& b,
                              const std::vector<std::string>& sum_labels) {
  auto summed = [&](const std::string& l) {
    return std::find(sum_labels.begin(), sum_labels.end(), l) !=
           sum_labels.end();
  };
  // full index universe: kept labels first, then summed ones
  std::vector<std::string> kept, folded;
  std::vector<std::size_t> kept_dims, folded_dims;
  auto note = [&](const LabeledTensor& t) {
    for (std::size_t i = 0; i < t.rank(); ++i) {
      const auto& l = t.labels()[i];
      auto& names = summed(l) ? folded : kept;
      auto& dims = summed(l) ? folded_dims : kept_dims;
      auto it = std::find(names.begin(), names.end(), l);
      if (it == names.end()) {
        names.push_back(l);
        dims.push_back(t.dims()[i]);
      } else if (dims[it - names.begin()] != t.dims()[i]) {
        throw TensorError("multiply_shared: dimension mismatch on " + l);
      }
    }
  };
  note(a);
  note(b);
  for (const auto& l : sum_labels)
    if (std::find(folded.begin(), folded.end(), l) == folded.end())
      throw TensorError("multiply_shared: unknown sum label " + l);

  std::vector<std::string> universe = kept;
  universe.insert(universe.end(), folded.begin(), folded.end());
  std::vector<std::size_t> udims = kept_dims;
  udims.insert(udims.end(), folded_dims.begin(), folded_dims.end());

  // per-operand stride in the universe walk (0 where the label is absent)
  auto strides_of = [&](const LabeledTensor& t) {
    std::vector<std::size_t> ts(t.rank(), 1);
    for (std::size_t i = t.rank(); i-- > 1;)
      ts[i - 1] = ts[i] * t.dims()[i];
    std::vector<std::size_t> out(universe.size(), 0);
    for (std::size_t u = 0; u < universe.size(); ++u) {
      int p = t.label_pos(universe[u]);
      if (p >= 0) out[u] = ts[p];
    }
    return out;
  };
  std::vector<std::size_t> sa = strides_of(a), sb = strides_of(b);

  LabeledTensor out(kept, kept_dims);
  const std::size_t nu = universe.size();
  std::vector<std::size_t> idx(nu, 0);
  std::size_t oa = 0, ob = 0, oo = 0;
  std::size_t total = 1;
  for (auto d : udims) total *= d;
  std::vector<std::size_t> ostride(nu, 0);
  {
    std::vector<std::size_t> ks(kept.size(), 1);
    for (std::size_t i = kept.size(); i-- > 1;)
      ks[i - 1] = ks[i] * kept_dims[i];
    for (std::size_t u = 0; u < kept.size(); ++u) ostride[u] = ks[u];
  }
  for (std::size_t it = 0; it < total; ++it) {
    out[oo] += a[oa] * b[ob];
    for (std::size_t ax = nu; ax-- > 0;) {
      idx[ax]++;
      oa += sa[ax];
      ob += sb[ax];
      oo += ostride[ax];
      if (idx[ax] < udims[ax]) break;
      idx[ax] = 0;
      oa -= sa[ax] * udims[ax];
      ob -= sb[ax] * udims[ax];
      oo -= ostride[ax] * udims[ax];
    }
  }
  return out;
}

}  // namespace etempo
