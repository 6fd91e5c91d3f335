#include "etempo/tensor/decomp.hpp"

#include <algorithm>
#include <cmath>

#include <lapacke.h>

namespace etempo {

namespace {

struct RawSvd {
  std::vector<cplx> u;      // m x r col blocks, row-major
  std::vector<double> s;    // r
  std::vector<cplx> vt;     // r x n
  std::size_t m, n, r;
};

RawSvd dense_svd(std::vector<cplx> a, std::size_t m, std::size_t n) {
  RawSvd out;
  out.m = m;
  out.n = n;
  out.r = std::min(m, n);
  out.u.resize(m * out.r);
  out.s.resize(out.r);
  out.vt.resize(out.r * n);
  std::vector<cplx> work_a = a;  // gesdd clobbers
  int info = LAPACKE_zgesdd(
      LAPACK_ROW_MAJOR, 'S', static_cast<int>(m), static_cast<int>(n),
      reinterpret_cast<lapack_complex_double*>(work_a.data()),
      static_cast<int>(n), out.s.data(),
      reinterpret_cast<lapack_complex_double*>(out.u.data()),
      static_cast<int>(out.r),
      reinterpret_cast<lapack_complex_double*>(out.vt.data()),
      static_cast<int>(n));
  if (info != 0) {
    // divide-and-conquer can fail on rare inputs; retry with QR-based driver
    std::vector<double> superb(out.r);
    work_a = a;
    info = LAPACKE_zgesvd(
        LAPACK_ROW_MAJOR, 'S', 'S', static_cast<int>(m), static_cast<int>(n),
        reinterpret_cast<lapack_complex_double*>(work_a.data()),
        static_cast<int>(n), out.s.data(),
        reinterpret_cast<lapack_complex_double*>(out.u.data()),
        static_cast<int>(out.r),
        reinterpret_cast<lapack_complex_double*>(out.vt.data()),
        static_cast<int>(n), superb.data());
    if (info != 0) throw SvdError("SVD failed to converge (info != 0)");
  }
  return out;
}

}  // namespace

SvdResult svd_truncate(const LabeledTensor& t,
                       const std::vector<std::string>& left_labels,
                       const TruncationPolicy& policy,
                       const std::string& bond_label) {
  if (left_labels.empty()) throw TensorError("svd_truncate: empty left set");
  if (policy.max_bond == 0) throw TensorError("max_bond must be >= 1");
  if (policy.cutoff < 0.0 || policy.cutoff >= 1.0)
    throw TensorError("cutoff must lie in [0,1)");
  std::vector<std::string> right_labels;
  for (const auto& l : t.labels())
    if (std::find(left_labels.begin(), left_labels.end(), l) ==
        left_labels.end())
      right_labels.push_back(l);
  if (right_labels.empty())
    throw TensorError("svd_truncate: left set must be a proper subset");

  std::vector<std::string> order = left_labels;
  order.insert(order.end(), right_labels.begin(), right_labels.end());
  LabeledTensor mat = t.permuted(order);

  std::size_t m = 1, n = 1;
  std::vector<std::size_t> ldims, rdims;
  for (const auto& l : left_labels) {
    ldims.push_back(t.dim(l));
    m *= ldims.back();
  }
  for (const auto& l : right_labels) {
    rdims.push_back(t.dim(l));
    n *= rdims.back();
  }

  RawSvd raw = dense_svd(mat.data(), m, n);

  double total_sq = 0;
  for (double s : raw.s) total_sq += s * s;
  std::size_t keep = std::min<std::size_t>(raw.r, policy.max_bond);
  if (total_sq > 0.0 && policy.cutoff > 0.0) {
    double discarded = 0;
    std::size_t k = raw.r;
    while (k > 1) {
      double next = discarded + raw.s[k - 1] * raw.s[k - 1];
      if (next > policy.cutoff * total_sq) break;
      discarded = next;
      --k;
    }
    keep = std::min(keep, k);
  }
  keep = std::max<std::size_t>(keep, 1);

  double discarded_sq = 0;
  for (std::size_t i = keep; i < raw.r; ++i)
    discarded_sq += raw.s[i] * raw.s[i];

  SvdResult res;
  res.s.assign(raw.s.begin(), raw.s.begin() + keep);
  res.discarded_sq = discarded_sq;

  std::vector<std::string> ulabels = left_labels;
  ulabels.push_back(bond_label);
  std::vector<std::size_t> udims = ldims;
  udims.push_back(keep);
  LabeledTensor U(ulabels, udims);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < keep; ++j)
      U[i * keep + j] = raw.u[i * raw.r + j];

  std::vector<std::string> vlabels = {bond_label};
  vlabels.insert(vlabels.end(), right_labels.begin(), right_labels.end());
  std::vector<std::size_t> vdims = {keep};
  vdims.insert(vdims.end(), rdims.begin(), rdims.end());
  LabeledTensor V(vlabels, vdims);
  std::copy(raw.vt.begin(), raw.vt.begin() + keep * n, V.data().begin());

  res.U = std::move(U);
  res.V = std::move(V);
  return res;
}

std::vector<double> singular_values(const LabeledTensor& t,
                                    const std::vector<std::string>& left) {
  TruncationPolicy lossless;
  return svd_truncate(t, left, lossless).s;
}

}  // namespace etempo
