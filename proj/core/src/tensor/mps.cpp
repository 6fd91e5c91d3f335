#include "etempo/tensor/mps.hpp"

#include <algorithm>
#include <cmath>

#include <lapacke.h>

namespace etempo {

namespace {

std::string bond_name(std::size_t i) { return "__b" + std::to_string(i); }

LabeledTensor with_axis(const LabeledTensor& t, const std::string& label,
                        bool front) {
  std::vector<std::string> labels = t.labels();
  std::vector<std::size_t> dims = t.dims();
  if (front) {
    labels.insert(labels.begin(), label);
    dims.insert(dims.begin(), 1);
  } else {
    labels.push_back(label);
    dims.push_back(1);
  }
  return LabeledTensor(labels, dims, t.data());
}

// A = L * Q, Q with orthonormal rows; a is m x n row-major.
void lq_factor(std::vector<cplx> a, std::size_t m, std::size_t n,
               std::vector<cplx>& L, std::vector<cplx>& Q, std::size_t& r) {
  r = std::min(m, n);
  std::vector<cplx> tau(r);
  int info = LAPACKE_zgelqf(
      LAPACK_ROW_MAJOR, static_cast<int>(m), static_cast<int>(n),
      reinterpret_cast<lapack_complex_double*>(a.data()), static_cast<int>(n),
      reinterpret_cast<lapack_complex_double*>(tau.data()));
  if (info != 0) throw SvdError("LQ factorization failed");
  L.assign(m * r, cplx(0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < std::min(i + 1, r); ++j)
      L[i * r + j] = a[i * n + j];
  info = LAPACKE_zunglq(
      LAPACK_ROW_MAJOR, static_cast<int>(r), static_cast<int>(n),
      static_cast<int>(r),
      reinterpret_cast<lapack_complex_double*>(a.data()), static_cast<int>(n),
      reinterpret_cast<lapack_complex_double*>(tau.data()));
  if (info != 0) throw SvdError("LQ Q-build failed");
  Q.assign(a.begin(), a.begin() + r * n);
}

}  // namespace

// ---------------------------------------------------------------------------
// MatrixProductState

MatrixProductState MatrixProductState::from_product(
    const std::vector<LabeledTensor>& vectors) {
  if (vectors.empty()) throw TensorError("empty chain");
  MatrixProductState m;
  const std::size_t n = vectors.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].rank() != 1)
      throw TensorError("from_product expects rank-1 site vectors");
    LabeledTensor s = vectors[i];
    if (i > 0) s = with_axis(s, bond_name(i - 1), true);
    if (i + 1 < n) s = with_axis(s, bond_name(i), false);
    m.sites_.push_back(std::move(s));
    m.phys_.push_back(vectors[i].labels()[0]);
    if (i + 1 < n) m.bonds_.push_back(bond_name(i));
  }
  return m;
}

MatrixProductState MatrixProductState::from_sites(
    std::vector<LabeledTensor> sites, std::vector<std::string> phys,
    std::vector<std::string> bonds) {
  MatrixProductState m;
  m.sites_ = std::move(sites);
  m.phys_ = std::move(phys);
  m.bonds_ = std::move(bonds);
  if (m.phys_.size() != m.sites_.size() ||
      m.bonds_.size() + 1 != m.sites_.size())
    throw TensorError("from_sites: inconsistent chain bookkeeping");
  // chain-consistency: adjacent sites share the declared bond
  for (std::size_t i = 0; i + 1 < m.sites_.size(); ++i) {
    if (!m.sites_[i].has_label(m.bonds_[i]) ||
        !m.sites_[i + 1].has_label(m.bonds_[i]) ||
        m.sites_[i].dim(m.bonds_[i]) != m.sites_[i + 1].dim(m.bonds_[i]))
      throw TensorError("from_sites: bond mismatch at " + std::to_string(i));
  }
  m.relabel_bonds();
  return m;
}

std::size_t MatrixProductState::phys_dim(std::size_t i) const {
  return sites_[i].dim(phys_[i]);
}

std::vector<std::size_t> MatrixProductState::bond_dims() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < sites_.size(); ++i)
    out.push_back(sites_[i].dim(bonds_[i]));
  return out;
}

std::size_t MatrixProductState::max_bond_dim() const {
  std::size_t m = 1;
  for (auto d : bond_dims()) m = std::max(m, d);
  return m;
}

int MatrixProductState::find_phys(const std::string& name) const {
  for (std::size_t i = 0; i < phys_.size(); ++i)
    if (phys_[i] == name) return static_cast<int>(i);
  return -1;
}

void MatrixProductState::relabel_bonds() {
  for (std::size_t i = 0; i + 1 < sites_.size(); ++i) {
    const std::string tmp = "__t" + std::to_string(i);
    if (bonds_[i] == bond_name(i)) continue;
    sites_[i].rename(bonds_[i], tmp);
    sites_[i + 1].rename(bonds_[i], tmp);
    bonds_[i] = tmp;
  }
  for (std::size_t i = 0; i + 1 < sites_.size(); ++i) {
    if (bonds_[i] == bond_name(i)) continue;
    sites_[i].rename(bonds_[i], bond_name(i));
    sites_[i + 1].rename(bonds_[i], bond_name(i));
    bonds_[i] = bond_name(i);
  }
}

LabeledTensor MatrixProductState::dense() const {
  LabeledTensor acc = sites_[0];
  for (std::size_t i = 1; i < sites_.size(); ++i)
    acc = contract(acc, sites_[i], {{bonds_[i - 1], bonds_[i - 1]}});
  return acc;
}

double MatrixProductState::compress(const TruncationPolicy& policy) {
  const std::size_t n = sites_.size();
  if (n < 2) return 0.0;

  // pass 1: right-canonicalize sites n-1 .. 1 via LQ
  for (std::size_t i = n - 1; i >= 1; --i) {
    std::vector<std::string> rgroup = {phys_[i]};
    if (i + 1 < n) rgroup.push_back(bonds_[i]);
    std::vector<std::string> order = {bonds_[i - 1]};
    order.insert(order.end(), rgroup.begin(), rgroup.end());
    LabeledTensor mat = sites_[i].permuted(order);
    std::size_t m = mat.dims()[0];
    std::size_t ncols = mat.size() / m;
    std::vector<cplx> L, Q;
    std::size_t r;
    lq_factor(mat.data(), m, ncols, L, Q, r);

    std::vector<std::string> qlabels = {bonds_[i - 1]};
    qlabels.insert(qlabels.end(), rgroup.begin(), rgroup.end());
    std::vector<std::size_t> qdims = {r};
    for (const auto& l : rgroup) qdims.push_back(sites_[i].dim(l));
    sites_[i] = LabeledTensor(qlabels, qdims, std::move(Q));

    LabeledTensor Lt({bonds_[i - 1], "__lq"}, {m, r}, std::move(L));
    sites_[i - 1] = contract(sites_[i - 1], Lt, {{bonds_[i - 1],
                                                  bonds_[i - 1]}});
    sites_[i - 1].rename("__lq", bonds_[i - 1]);
  }

  // pass 2: truncate left to right
  double discarded = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<std::string> left;
    if (i > 0) left.push_back(bonds_[i - 1]);
    left.push_back(phys_[i]);
    SvdResult res = svd_truncate(sites_[i], left, policy);
    discarded += res.discarded_sq;
    res.U.rename("__svd", bonds_[i]);
    sites_[i] = std::move(res.U);
    // scale V rows by s and absorb into the next site
    const std::size_t keep = res.s.size();
    const std::size_t cols = res.V.size() / keep;
    for (std::size_t a = 0; a < keep; ++a)
      for (std::size_t c = 0; c < cols; ++c) res.V[a * cols + c] *= res.s[a];
    LabeledTensor carry = std::move(res.V);
    sites_[i + 1] =
        contract(carry, sites_[i + 1], {{bonds_[i], bonds_[i]}});
    sites_[i + 1].rename("__svd", bonds_[i]);
  }
  return discarded;
}

// ---------------------------------------------------------------------------
// MatrixProductOperator

MatrixProductOperator MatrixProductOperator::from_sites(
    std::vector<LabeledTensor> sites, std::vector<std::string> phys_out,
    std::vector<std::string> phys_in, std::vector<std::string> bonds) {
  MatrixProductOperator op;
  op.sites_ = std::move(sites);
  op.phys_out_ = std::move(phys_out);
  op.phys_in_ = std::move(phys_in);
  op.bonds_ = std::move(bonds);
  if (op.phys_in_.size() != op.sites_.size() ||
      op.phys_out_.size() != op.sites_.size() ||
      op.bonds_.size() + 1 != op.sites_.size())
    throw TensorError("MPO from_sites: inconsistent bookkeeping");
  return op;
}

MatrixProductOperator MatrixProductOperator::from_dense(
    const LabeledTensor& op,
    const std::vector<std::pair<std::string, std::string>>& site_phys,
    const TruncationPolicy& policy) {
  const std::size_t n = site_phys.size();
  if (n == 1) {
    return from_sites({op}, {site_phys[0].first}, {site_phys[0].second}, {});
  }
  // fuse (out,in) per site, train, then split back
  LabeledTensor fused = op;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string fl = "__s" + std::to_string(i);
    fused = fused.fused({site_phys[i].first, site_phys[i].second}, fl);
    order.push_back(fl);
  }
  MatrixProductState train = tensor_train(fused, order, policy);
  MatrixProductOperator out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [po, pi] = site_phys[i];
    LabeledTensor s = train.site(i).split(
        train.phys(i), {po, pi}, {op.dim(po), op.dim(pi)});
    out.sites_.push_back(std::move(s));
    out.phys_out_.push_back(po);
    out.phys_in_.push_back(pi);
    if (i + 1 < n) out.bonds_.push_back(train.bond(i));
  }
  return out;
}

MatrixProductOperator MatrixProductOperator::identity(
    const std::vector<std::size_t>& phys_dims) {
  MatrixProductOperator op;
  for (std::size_t i = 0; i < phys_dims.size(); ++i) {
    const std::string in = "__i" + std::to_string(i);
    const std::string out = "__o" + std::to_string(i);
    op.sites_.push_back(LabeledTensor::identity(out, in, phys_dims[i]));
    op.phys_in_.push_back(in);
    op.phys_out_.push_back(out);
    if (i + 1 < phys_dims.size()) op.bonds_.push_back("");
  }
  return op;
}

std::size_t MatrixProductOperator::in_dim(std::size_t i) const {
  return sites_[i].dim(phys_in_[i]);
}
std::size_t MatrixProductOperator::out_dim(std::size_t i) const {
  return sites_[i].dim(phys_out_[i]);
}

LabeledTensor MatrixProductOperator::dense() const {
  LabeledTensor acc = sites_[0];
  for (std::size_t i = 1; i < sites_.size(); ++i) {
    if (!bonds_[i - 1].empty())
      acc = contract(acc, sites_[i], {{bonds_[i - 1], bonds_[i - 1]}});
    else
      acc = contract(acc, sites_[i], {});
  }
  return acc;
}

// ---------------------------------------------------------------------------
// chain operations

MatrixProductState apply_mpo(const MatrixProductState& state,
                             const MatrixProductOperator& op,
                             const TruncationPolicy& policy,
                             ApplyStats* stats) {
  const std::size_t n = state.size();
  if (op.size() != n) throw TensorError("apply_mpo: site count mismatch");
  MatrixProductState out;
  std::vector<std::string> mbond(n == 0 ? 0 : n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) mbond[i] = "__m" + std::to_string(i);

  for (std::size_t i = 0; i < n; ++i) {
    if (op.in_dim(i) != state.phys_dim(i))
      throw TensorError("apply_mpo: in-dimension mismatch at site " +
                        std::to_string(i));
    LabeledTensor osite = op.site(i);
    // localize op labels to avoid collisions
    if (i > 0 && !op.bonds_[i - 1].empty())
      osite.rename(op.bonds_[i - 1], mbond[i - 1]);
    if (i + 1 < n && !op.bonds_[i].empty())
      osite.rename(op.bonds_[i], mbond[i]);
    LabeledTensor t =
        contract(state.site(i), osite, {{state.phys(i), op.phys_in(i)}});
    if (op.phys_out(i) != state.phys(i)) t.rename(op.phys_out(i),
                                                  state.phys(i));
    // fuse state/op bond pairs; keep canonical bond names
    if (i > 0 && t.has_label(mbond[i - 1])) {
      t = t.fused({state.bond(i - 1), mbond[i - 1]}, "__fl");
      t.rename("__fl", state.bond(i - 1));
    }
    if (i + 1 < n && t.has_label(mbond[i])) {
      t = t.fused({state.bond(i), mbond[i]}, "__fr");
      t.rename("__fr", state.bond(i));
    }
    out.sites_.push_back(std::move(t));
    out.phys_.push_back(state.phys(i));
    if (i + 1 < n) out.bonds_.push_back(state.bond(i));
  }
  double disc = out.compress(policy);
  if (stats) {
    stats->discarded_sq += disc;
    stats->max_bond = std::max(stats->max_bond, out.max_bond_dim());
  }
  return out;
}

MatrixProductState close_site(const MatrixProductState& state,
                              std::size_t site,
                              const std::vector<cplx>& closure) {
  const std::size_t n = state.size();
  if (n <= 1)
    throw TensorError("close_site on a one-site chain: use full_contract");
  if (site >= n) throw TensorError("close_site: site out of range");
  if (closure.size() != state.phys_dim(site))
    throw TensorError("close_site: closure dimension mismatch");

  LabeledTensor cv({state.phys(site)}, {closure.size()}, closure);
  LabeledTensor rem =
      contract(state.site(site), cv, {{state.phys(site), state.phys(site)}});

  MatrixProductState out;
  out.sites_ = state.sites_;
  out.phys_ = state.phys_;
  out.bonds_ = state.bonds_;
  if (site > 0) {
    out.sites_[site - 1] = contract(out.sites_[site - 1], rem,
                                    {{out.bonds_[site - 1],
                                      out.bonds_[site - 1]}});
    out.sites_.erase(out.sites_.begin() + site);
    out.phys_.erase(out.phys_.begin() + site);
    out.bonds_.erase(out.bonds_.begin() + (site - 1));
  } else {
    out.sites_[1] = contract(rem, out.sites_[1],
                             {{out.bonds_[0], out.bonds_[0]}});
    out.sites_.erase(out.sites_.begin());
    out.phys_.erase(out.phys_.begin());
    out.bonds_.erase(out.bonds_.begin());
  }
  out.relabel_bonds();
  return out;
}

MatrixProductState extend(const MatrixProductState& state,
                          const std::vector<LabeledTensor>& new_sites,
                          ChainEnd end) {
  MatrixProductState out = state;
  for (const auto& v : new_sites) {
    if (v.rank() != 1)
      throw TensorError("extend expects rank-1 (bond-1 connector) sites");
    const std::size_t n = out.sites_.size();
    if (end == ChainEnd::kRight) {
      const std::string b = "__x" + std::to_string(n);
      out.sites_[n - 1] = with_axis(out.sites_[n - 1], b, false);
      out.sites_.push_back(with_axis(v, b, true));
      out.phys_.push_back(v.labels()[0]);
      out.bonds_.push_back(b);
    } else {
      const std::string b = "__x" + std::to_string(n);
      out.sites_[0] = with_axis(out.sites_[0], b, true);
      out.sites_.insert(out.sites_.begin(), with_axis(v, b, false));
      out.phys_.insert(out.phys_.begin(), v.labels()[0]);
      out.bonds_.insert(out.bonds_.begin(), b);
    }
  }
  out.relabel_bonds();
  return out;
}

cplx full_contract(const MatrixProductState& state,
                   const std::vector<std::vector<cplx>>& closures) {
  const std::size_t n = state.size();
  if (closures.size() != n)
    throw TensorError("full_contract: closure count mismatch");
  LabeledTensor acc = LabeledTensor::scalar(1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (closures[i].size() != state.phys_dim(i))
      throw TensorError("full_contract: closure dim mismatch at site " +
                        std::to_string(i));
    LabeledTensor cv({state.phys(i)}, {closures[i].size()}, closures[i]);
    LabeledTensor sc =
        contract(state.site(i), cv, {{state.phys(i), state.phys(i)}});
    if (i == 0)
      acc = sc;
    else
      acc = contract(acc, sc, {{state.bond(i - 1), state.bond(i - 1)}});
  }
  return acc.data()[0];
}

MatrixProductState tensor_train(const LabeledTensor& t,
                                const std::vector<std::string>& site_order,
                                const TruncationPolicy& policy) {
  const std::size_t n = site_order.size();
  {
    std::vector<std::string> sorted_a = t.labels(), sorted_b = site_order;
    std::sort(sorted_a.begin(), sorted_a.end());
    std::sort(sorted_b.begin(), sorted_b.end());
    if (sorted_a != sorted_b)
      throw TensorError("tensor_train: site_order must permute labels");
  }
  MatrixProductState out;
  if (n == 1) {
    out.sites_ = {t};
    out.phys_ = {site_order[0]};
    return out;
  }
  LabeledTensor rem = t;
  std::string carry;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<std::string> left;
    if (!carry.empty()) left.push_back(carry);
    left.push_back(site_order[i]);
    SvdResult res = svd_truncate(rem, left, policy);
    res.U.rename("__svd", bond_name(i));
    out.sites_.push_back(std::move(res.U));
    out.phys_.push_back(site_order[i]);
    out.bonds_.push_back(bond_name(i));
    const std::size_t keep = res.s.size();
    const std::size_t cols = res.V.size() / keep;
    for (std::size_t a = 0; a < keep; ++a)
      for (std::size_t c = 0; c < cols; ++c) res.V[a * cols + c] *= res.s[a];
    rem = std::move(res.V);
    rem.rename("__svd", bond_name(i));
    carry = bond_name(i);
  }
  out.sites_.push_back(std::move(rem));
  out.phys_.push_back(site_order[n - 1]);
  return out;
}

}  // namespace etempo
