#include "etempo/influence/factors.hpp"

#include <cmath>
#include <sstream>

namespace etempo {

namespace {
constexpr std::size_t L = 0, R = 1, PASS = 2;
double sgn(std::size_t side) { return side == L ? 1.0 : -1.0; }
}  // namespace

EFactors decompose_E(const LiftedKernel& lk, const IndexScheme& scheme) {
  const std::size_t d = scheme.d;
  const std::size_t al = scheme.alpha();
  const LabeledTensor& F0 = lk.fwd[0];
  const LabeledTensor& R0 = lk.rev[0];
  EFactors f;
  f.e1 = LabeledTensor({"pL", "sL", "k", "m1", "m2"}, {d, d, kKDim, 2, 2});
  f.e2 = LabeledTensor({"pR", "sR", "k", "m1", "m2"}, {d, d, kKDim, 2, 2});
  f.e3 = LabeledTensor({"pL", "pR", "k", "m1", "m2", "q1", "q2"},
                       {d, d, kKDim, 2, 2, d, d});
  f.e4 = LabeledTensor({"sL", "sR", "k", "m1", "m2", "q2"},
                       {d, d, kKDim, 2, 2, d});
  f.e5 = LabeledTensor({"k", "m1", "m2", "s1", "q1", "q2", "p2", "l"},
                       {kKDim, 2, 2, d, d, d, d, 2});
  f.e6 = LabeledTensor({"sL", "sR", "k", "m1", "m2", "as", "s1"},
                       {d, d, kKDim, 2, 2, al, d});
  f.e7 = LabeledTensor({"pL", "pR", "k", "m1", "m2", "ap", "p2"},
                       {d, d, kKDim, 2, 2, al, d});

  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      const double eq = a == b ? 1.0 : 0.0;
      // E1 over (pL, sL) = (a, b)
      f.e1.at({a, b, kNone, L, L}) = eq;
      f.e1.at({a, b, kLink, L, L}) = 1.0;
      f.e1.at({a, b, kSingle, L, L}) = 1.0;
      f.e1.at({a, b, kSingle, L, R}) = -eq;
      for (std::size_t m1 = 0; m1 < 2; ++m1)
        for (std::size_t m2 = 0; m2 < 2; ++m2)
          f.e1.at({a, b, kDouble, m1, m2}) =
              (m1 == R && m2 == R) ? eq : 1.0;
      // E2 over (pR, sR) = (a, b)
      f.e2.at({a, b, kNone, L, L}) = eq;
      f.e2.at({a, b, kLink, L, L}) = 1.0;
      f.e2.at({a, b, kSingle, L, L}) = eq;
      f.e2.at({a, b, kSingle, L, R}) = 1.0;
      for (std::size_t m1 = 0; m1 < 2; ++m1)
        for (std::size_t m2 = 0; m2 < 2; ++m2)
          f.e2.at({a, b, kDouble, m1, m2}) =
              (m1 == L && m2 == L) ? eq : 1.0;
    }

  // E3: routes q1; same-side pairs tie q1 = q2 for the internal state sum
  for (std::size_t pL = 0; pL < d; ++pL)
    for (std::size_t pR = 0; pR < d; ++pR)
      for (std::size_t k = 0; k < kKDim; ++k) {
        if (k != kDouble) {
          for (std::size_t m1 = 0; m1 < 2; ++m1)
            for (std::size_t m2 = 0; m2 < 2; ++m2)
              f.e3.at({pL, pR, k, m1, m2, 0, 0}) = 1.0;
          continue;
        }
        for (std::size_t q1 = 0; q1 < d; ++q1)
          for (std::size_t q2 = 0; q2 < d; ++q2) {
            if (q1 == q2) {
              f.e3.at({pL, pR, kDouble, L, L, q1, q2}) = 1.0;
              f.e3.at({pL, pR, kDouble, R, R, q1, q2}) = 1.0;
            }
            if (q1 == pL) f.e3.at({pL, pR, kDouble, L, R, q1, q2}) = 1.0;
            if (q1 == pR) f.e3.at({pL, pR, kDouble, R, L, q1, q2}) = 1.0;
          }
      }

  // E4: routes q2 for mixed-side pairs
  for (std::size_t sL = 0; sL < d; ++sL)
    for (std::size_t sR = 0; sR < d; ++sR)
      for (std::size_t k = 0; k < kKDim; ++k) {
        if (k != kDouble) {
          for (std::size_t m1 = 0; m1 < 2; ++m1)
            for (std::size_t m2 = 0; m2 < 2; ++m2)
              f.e4.at({sL, sR, k, m1, m2, 0}) = 1.0;
          continue;
        }
        for (std::size_t q2 = 0; q2 < d; ++q2) {
          // same-side pairs leave q2 to E3's internal state sum
          f.e4.at({sL, sR, kDouble, L, L, q2}) = 1.0;
          f.e4.at({sL, sR, kDouble, R, R, q2}) = 1.0;
          if (q2 == sR) f.e4.at({sL, sR, kDouble, L, R, q2}) = 1.0;
          if (q2 == sL) f.e4.at({sL, sR, kDouble, R, L, q2}) = 1.0;
        }
      }

  // E5: l bookkeeping plus the embedded same-interval block for k = 2
  for (std::size_t s1 = 0; s1 < d; ++s1)
    for (std::size_t q1 = 0; q1 < d; ++q1)
      for (std::size_t q2 = 0; q2 < d; ++q2)
        for (std::size_t p2 = 0; p2 < d; ++p2) {
          f.e5.at({kNone, L, L, s1, q1, q2, p2, L}) = 1.0;
          f.e5.at({kLink, L, L, s1, q1, q2, p2, L}) = 1.0;
          for (std::size_t l = 0; l < 2; ++l)
            f.e5.at({kSingle, L, l, s1, q1, q2, p2, l}) = 1.0;
          for (std::size_t m1 = 0; m1 < 2; ++m1)
            for (std::size_t m2 = 0; m2 < 2; ++m2) {
              cplx block;
              if (m1 == L && m2 == L)
                block = F0.at({p2, q1, q2, s1});
              else if (m1 == L && m2 == R)
                block = F0.at({q2, p2, q1, s1});
              else if (m1 == R && m2 == L)
                block = R0.at({p2, q2, s1, q1});
              else
                block = R0.at({q2, p2, s1, q1});
              f.e5.at({kDouble, m1, m2, s1, q1, q2, p2, L}) =
                  sgn(m1) * sgn(m2) * block;
            }
        }

  // E6 / E7: alpha records for k = 1, kernel feeds for k = 2
  for (std::size_t sL = 0; sL < d; ++sL)
    for (std::size_t sR = 0; sR < d; ++sR) {
      f.e6.at({sL, sR, kNone, L, L, 0, 0}) = 1.0;
      f.e6.at({sL, sR, kLink, L, L, 0, 0}) = 1.0;
      f.e6.at({sL, sR, kSingle, L, L, sL + 1, 0}) = 1.0;
      f.e6.at({sL, sR, kSingle, L, R, sR + 1, 0}) = 1.0;
      for (std::size_t m2 = 0; m2 < 2; ++m2) {
        f.e6.at({sL, sR, kDouble, L, m2, 0, sL}) = 1.0;
        f.e6.at({sL, sR, kDouble, R, m2, 0, sR}) = 1.0;
      }
    }
  for (std::size_t pL = 0; pL < d; ++pL)
    for (std::size_t pR = 0; pR < d; ++pR) {
      f.e7.at({pL, pR, kNone, L, L, 0, 0}) = 1.0;
      f.e7.at({pL, pR, kLink, L, L, 0, 0}) = 1.0;
      f.e7.at({pL, pR, kSingle, L, L, pL + 1, 0}) = 1.0;
      f.e7.at({pL, pR, kSingle, L, R, pR + 1, 0}) = 1.0;
      for (std::size_t m1 = 0; m1 < 2; ++m1) {
        f.e7.at({pL, pR, kDouble, m1, L, 0, pL}) = 1.0;
        f.e7.at({pL, pR, kDouble, m1, R, 0, pR}) = 1.0;
      }
    }
  return f;
}

MFactors decompose_M(const LiftedKernel& lk, std::size_t lag,
                     const IndexScheme& scheme) {
  const std::size_t d = scheme.d;
  const std::size_t al = scheme.alpha();
  const LabeledTensor& F = lk.fwd[lag];
  const LabeledTensor& Rv = lk.rev[lag];
  MFactors f;
  f.m1 = LabeledTensor({"ap", "app", "pt2", "mt"},
                       {al, al, d, IndexScheme::mt_dim});
  f.m2 = LabeledTensor({"k", "kp", "as", "asp", "s1t", "p1t", "pt2", "m2",
                        "mt"},
                       {kKDim, kKDim, al, al, d, d, d, 2,
                        IndexScheme::mt_dim});
  f.m3 = LabeledTensor({"l", "lp", "m2", "mt"}, {2, 2, 2,
                                                 IndexScheme::mt_dim});
  f.m4 = LabeledTensor({"s1t", "sL", "sR", "mt"},
                       {d, d, d, IndexScheme::mt_dim});
  f.m5 = LabeledTensor({"p1t", "pL", "pR", "mt"},
                       {d, d, d, IndexScheme::mt_dim});
  f.m6 = LabeledTensor({"sL", "sR", "pL", "pR", "mt"},
                       {d, d, d, d, IndexScheme::mt_dim});

  // M1: alpha_p line; records pass the state into pt2 when a pair completes
  for (std::size_t ap = 0; ap < al; ++ap)
    f.m1.at({ap, ap, 0, PASS}) = 1.0;
  for (std::size_t pt2 = 0; pt2 < d; ++pt2)
    for (std::size_t y = 0; y < 2; ++y)
      f.m1.at({pt2 + 1, 0, pt2, y}) = 1.0;

  // M2: k line and alpha_s line; hosts the cross-interval kernel block
  for (std::size_t k = 0; k < kKDim; ++k)
    for (std::size_t as = 0; as < al; ++as)
      f.m2.at({k, k, as, as, 0, 0, 0, 0, PASS}) = 1.0;
  for (std::size_t as = 1; as < al; ++as)
    for (std::size_t s1t = 0; s1t < d; ++s1t)
      for (std::size_t p1t = 0; p1t < d; ++p1t)
        for (std::size_t pt2 = 0; pt2 < d; ++pt2)
          for (std::size_t m2 = 0; m2 < 2; ++m2)
            for (std::size_t y = 0; y < 2; ++y) {
              const std::size_t a2 = m2 == L ? pt2 : as - 1;
              const std::size_t b2 = m2 == L ? as - 1 : pt2;
              const cplx block = y == L ? F.at({a2, b2, p1t, s1t})
                                        : Rv.at({a2, b2, s1t, p1t});
              f.m2.at({kSingle, kLink, as, 0, s1t, p1t, pt2, m2, y}) = block;
            }

  // M3: l line
  for (std::size_t l = 0; l < 2; ++l) f.m3.at({l, l, 0, PASS}) = 1.0;
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t y = 0; y < 2; ++y) f.m3.at({l, 0, l, y}) = 1.0;

  // M4 / M5: connect the kernel feeds to the interval's own s and p sides;
  // the right-side completion carries the commutator sign in M4
  for (std::size_t sL = 0; sL < d; ++sL)
    for (std::size_t sR = 0; sR < d; ++sR) {
      f.m4.at({0, sL, sR, PASS}) = 1.0;
      f.m4.at({sL, sL, sR, L}) = 1.0;
      f.m4.at({sR, sL, sR, R}) = -1.0;
    }
  for (std::size_t pL = 0; pL < d; ++pL)
    for (std::size_t pR = 0; pR < d; ++pR) {
      f.m5.at({0, pL, pR, PASS}) = 1.0;
      f.m5.at({pL, pL, pR, L}) = 1.0;
      f.m5.at({pR, pL, pR, R}) = 1.0;
    }

  // M6: untouched-side delta
  for (std::size_t sL = 0; sL < d; ++sL)
    for (std::size_t sR = 0; sR < d; ++sR)
      for (std::size_t pL = 0; pL < d; ++pL)
        for (std::size_t pR = 0; pR < d; ++pR) {
          f.m6.at({sL, sR, pL, pR, PASS}) = 1.0;
          if (sR == pR) f.m6.at({sL, sR, pL, pR, L}) = 1.0;
          if (sL == pL) f.m6.at({sL, sR, pL, pR, R}) = 1.0;
        }
  return f;
}

LabeledTensor contract_E_factors(const EFactors& f,
                                 const IndexScheme& scheme) {
  (void)scheme;
  LabeledTensor t = multiply_shared(f.e3, f.e4, {});
  t = multiply_shared(t, f.e5, {"q1", "q2"});
  t = multiply_shared(t, f.e6, {"s1"});
  t = multiply_shared(t, f.e7, {"p2"});
  t = multiply_shared(t, f.e1, {});
  t = multiply_shared(t, f.e2, {"m1", "m2"});
  return t;
}

LabeledTensor contract_M_factors(const MFactors& f, const IndexScheme& scheme,
                                 std::size_t k, std::size_t kp) {
  (void)scheme;
  // slice m2 over the requested (k, kp) sector
  const auto& m2 = f.m2;
  std::vector<std::string> labels;
  std::vector<std::size_t> dims;
  for (std::size_t i = 2; i < m2.rank(); ++i) {
    labels.push_back(m2.labels()[i]);
    dims.push_back(m2.dims()[i]);
  }
  LabeledTensor m2s(labels, dims);
  std::size_t block = m2s.size();
  const std::size_t off = (k * kKDim + kp) * block;
  for (std::size_t i = 0; i < block; ++i) m2s[i] = m2[off + i];

  LabeledTensor t = multiply_shared(m2s, f.m1, {"pt2"});
  t = multiply_shared(t, f.m3, {"m2"});
  t = multiply_shared(t, f.m4, {"s1t"});
  t = multiply_shared(t, f.m5, {"p1t"});
  t = multiply_shared(t, f.m6, {"mt"});
  return t;
}

LabeledTensor build_M_sector(const LiftedKernel& lk, std::size_t lag,
                             const IndexScheme& scheme, std::size_t k,
                             std::size_t kp) {
  const std::size_t d = scheme.d;
  const std::size_t al = scheme.alpha();
  LabeledTensor m({"pL", "pR", "sL", "sR", "ap", "as", "l", "app", "asp",
                   "lp"},
                  {d, d, d, d, al, al, 2, al, al, 2});
  LabeledTensor gm = cross_interval_block(lk, lag, scheme);
  for (std::size_t pL = 0; pL < d; ++pL)
    for (std::size_t pR = 0; pR < d; ++pR)
      for (std::size_t sL = 0; sL < d; ++sL)
        for (std::size_t sR = 0; sR < d; ++sR) {
          if (k == kp)
            for (std::size_t ap = 0; ap < al; ++ap)
              for (std::size_t as = 0; as < al; ++as)
                for (std::size_t l = 0; l < 2; ++l)
                  m.at({pL, pR, sL, sR, ap, as, l, ap, as, l}) = 1.0;
          if (k == kSingle && kp == kLink)
            for (std::size_t ap = 1; ap < al; ++ap)
              for (std::size_t as = 1; as < al; ++as)
                for (std::size_t l = 0; l < 2; ++l)
                  m.at({pL, pR, sL, sR, ap, as, l, 0, 0, 0}) +=
                      gm.at({pL, pR, sL, sR, l, ap - 1, as - 1});
        }
  return m;
}

namespace {

void compare_report(const LabeledTensor& got, const LabeledTensor& ref,
                    double tol, double& worst, const std::string& what) {
  LabeledTensor aligned = got.permuted(ref.labels());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    double diff = std::abs(aligned[i] - ref[i]);
    worst = std::max(worst, diff);
    if (diff > tol) {
      // recover the multi-index for the report
      std::vector<std::size_t> idx(ref.rank());
      std::size_t rem = i;
      for (std::size_t ax = ref.rank(); ax-- > 0;) {
        idx[ax] = rem % ref.dims()[ax];
        rem /= ref.dims()[ax];
      }
      std::ostringstream os;
      os << what << " identity violated at (";
      for (std::size_t ax = 0; ax < idx.size(); ++ax)
        os << ref.labels()[ax] << "=" << idx[ax]
           << (ax + 1 < idx.size() ? ", " : ")");
      os << ": |diff| = " << diff;
      throw TensorError(os.str());
    }
  }
}

}  // namespace

double verify_E(const EFactors& f, const LiftedKernel& lk,
                const IndexScheme& scheme, double tol) {
  double worst = 0;
  LabeledTensor got = contract_E_factors(f, scheme);
  LabeledTensor ref = build_E(lk, scheme);
  compare_report(got, ref, tol, worst, "E");
  return worst;
}

double verify_M(const MFactors& f, const LiftedKernel& lk, std::size_t lag,
                const IndexScheme& scheme, double tol) {
  double worst = 0;
  for (std::size_t k = 0; k < kKDim; ++k)
    for (std::size_t kp = 0; kp < kKDim; ++kp) {
      LabeledTensor got = contract_M_factors(f, scheme, k, kp);
      LabeledTensor ref = build_M_sector(lk, lag, scheme, k, kp);
      compare_report(got, ref, tol, worst,
                     "M(k=" + std::to_string(k) + ",kp=" + std::to_string(kp) +
                         ")");
    }
  return worst;
}

}  // namespace etempo
