#ifndef ETEMPO_INFLUENCE_FACTORS_HPP
#define ETEMPO_INFLUENCE_FACTORS_HPP

#include <array>

#include "etempo/influence/tensors.hpp"

namespace etempo {

// Exact low-rank factorizations of the E and M tensors, built symbolically
// from Kronecker patterns plus embedded kernel blocks (never by numeric
// factorization).  Contracting a factor set over its internal indices
// (m1, m2, q1, q2, s1, p2 for E; pt2, mt, m2, s1t, p1t for M) reproduces
// build_E / build_M entrywise.
//
// Conventions fixed by the contraction identity:
//   m1/m2 = Liouville side (0 left, 1 right) of the earlier/later insertion
//   of a pair; for k = 1 only the later side m2 is live and equals l.
//   mt = 2 is the pass-through mode of the M factors.
//   The commutator signs sit in E1 (right-side single insertion) and M4
//   (right-side completion); M5 is unsigned.

struct EFactors {
  LabeledTensor e1;  // (pL, sL, k, m1, m2)
  LabeledTensor e2;  // (pR, sR, k, m1, m2)
  LabeledTensor e3;  // (pL, pR, k, m1, m2, q1, q2)
  LabeledTensor e4;  // (sL, sR, k, m1, m2, q2)
  LabeledTensor e5;  // (k, m1, m2, s1, q1, q2, p2, l)
  LabeledTensor e6;  // (sL, sR, k, m1, m2, as, s1)
  LabeledTensor e7;  // (pL, pR, k, m1, m2, ap, p2)
};

struct MFactors {
  LabeledTensor m1;  // (ap, app, pt2, mt)
  LabeledTensor m2;  // (k, kp, as, asp, s1t, p1t, pt2, m2, mt)   [lag block]
  LabeledTensor m3;  // (l, lp, m2, mt)
  LabeledTensor m4;  // (s1t, sL, sR, mt)
  LabeledTensor m5;  // (p1t, pL, pR, mt)
  LabeledTensor m6;  // (sL, sR, pL, pR, mt)
};

EFactors decompose_E(const LiftedKernel& lk, const IndexScheme& scheme);
MFactors decompose_M(const LiftedKernel& lk, std::size_t lag,
                     const IndexScheme& scheme);

/// Contracts the factor set over the internal indices; the result carries
/// build_E's external labels.
LabeledTensor contract_E_factors(const EFactors& f, const IndexScheme& scheme);
/// Sector (k, kp) of the contracted M factors, labels as build_M minus k/kp.
LabeledTensor contract_M_factors(const MFactors& f, const IndexScheme& scheme,
                                 std::size_t k, std::size_t kp);
/// Sector extraction of the dense reference.
LabeledTensor build_M_sector(const LiftedKernel& lk, std::size_t lag,
                             const IndexScheme& scheme, std::size_t k,
                             std::size_t kp);

/// Entrywise identity checks; return the max abs deviation and throw
/// TensorError naming the offending index tuple when above tol.
double verify_E(const EFactors& f, const LiftedKernel& lk,
                const IndexScheme& scheme, double tol = 1e-12);
double verify_M(const MFactors& f, const LiftedKernel& lk, std::size_t lag,
                const IndexScheme& scheme, double tol = 1e-12);

}  // namespace etempo

#endif
