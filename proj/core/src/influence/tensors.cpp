#include "etempo/influence/tensors.hpp"

namespace etempo {

namespace {

// nonzero when a and b differ at most on emitter n; the emitter-local levels
bool element_on(const CompositeBasis& basis, std::size_t n, std::size_t a,
                std::size_t b, std::size_t& i, std::size_t& j) {
  for (std::size_t k = 0; k < basis.n_emitters(); ++k) {
    if (k == n) continue;
    if (basis.level_of(a, k) != basis.level_of(b, k)) return false;
  }
  i = basis.level_of(a, n);
  j = basis.level_of(b, n);
  return true;
}

}  // namespace

LiftedKernel lift_kernel(const KernelTensors& kt, const CompositeBasis& basis) {
  LiftedKernel out;
  const std::size_t d = basis.dim();
  out.d = d;
  const std::size_t n_em = basis.n_emitters();
  for (std::size_t lag = 0; lag <= kt.n_max; ++lag) {
    LabeledTensor f({"a2", "b2", "a1", "b1"}, {d, d, d, d});
    LabeledTensor r({"a2", "b2", "a1", "b1"}, {d, d, d, d});
    for (std::size_t a2 = 0; a2 < d; ++a2)
      for (std::size_t b2 = 0; b2 < d; ++b2)
        for (std::size_t a1 = 0; a1 < d; ++a1)
          for (std::size_t b1 = 0; b1 < d; ++b1) {
            cplx vf = 0, vr = 0;
            for (std::size_t n = 0; n < n_em; ++n) {
              std::size_t i2, j2;
              if (!element_on(basis, n, a2, b2, i2, j2)) continue;
              for (std::size_t m = 0; m < n_em; ++m) {
                std::size_t i1, j1;
                if (!element_on(basis, m, a1, b1, i1, j1)) continue;
                vf += kt.at(lag, n, m).fwd.at({i2, j2, i1, j1});
                vr += kt.at(lag, n, m).rev.at({i2, j2, i1, j1});
              }
            }
            f.at({a2, b2, a1, b1}) = vf;
            r.at({a2, b2, a1, b1}) = vr;
          }
    out.fwd.push_back(std::move(f));
    out.rev.push_back(std::move(r));
  }
  return out;
}

LabeledTensor same_interval_block(const LiftedKernel& lk,
                                  const IndexScheme& scheme) {
  const std::size_t d = scheme.d;
  const LabeledTensor& F = lk.fwd[0];
  const LabeledTensor& R = lk.rev[0];
  LabeledTensor g({"pL", "pR", "sL", "sR"}, {d, d, d, d});
  for (std::size_t pL = 0; pL < d; ++pL)
    for (std::size_t pR = 0; pR < d; ++pR)
      for (std::size_t sL = 0; sL < d; ++sL)
        for (std::size_t sR = 0; sR < d; ++sR) {
          cplx v = 0;
          // both insertions left: later (pL,q), earlier (q,sL)
          if (pR == sR)
            for (std::size_t q = 0; q < d; ++q)
              v += F.at({pL, q, q, sL});
          // later left, earlier right
          v -= R.at({pL, sL, sR, pR});
          // later right, earlier left
          v -= F.at({sR, pR, pL, sL});
          // both right: later (q,pR), earlier (sR,q)
          if (pL == sL)
            for (std::size_t q = 0; q < d; ++q)
              v += R.at({q, pR, sR, q});
          g.at({pL, pR, sL, sR}) = v;
        }
  return g;
}

LabeledTensor cross_interval_block(const LiftedKernel& lk, std::size_t lag,
                                   const IndexScheme& scheme) {
  const std::size_t d = scheme.d;
  const LabeledTensor& F = lk.fwd[lag];
  const LabeledTensor& R = lk.rev[lag];
  LabeledTensor g({"pL", "pR", "sL", "sR", "l", "u", "v"},
                  {d, d, d, d, IndexScheme::l_dim, d, d});
  for (std::size_t pL = 0; pL < d; ++pL)
    for (std::size_t pR = 0; pR < d; ++pR)
      for (std::size_t sL = 0; sL < d; ++sL)
        for (std::size_t sR = 0; sR < d; ++sR)
          for (std::size_t l = 0; l < 2; ++l)
            for (std::size_t u = 0; u < d; ++u)
              for (std::size_t v = 0; v < d; ++v) {
                // later insertion element per recorded side
                std::size_t a2 = l == 0 ? u : v;
                std::size_t b2 = l == 0 ? v : u;
                cplx val = 0;
                if (pR == sR) val += F.at({a2, b2, pL, sL});
                if (pL == sL) val -= R.at({a2, b2, sR, pR});
                g.at({pL, pR, sL, sR, l, u, v}) = val;
              }
  return g;
}

LabeledTensor build_E(const LiftedKernel& lk, const IndexScheme& scheme) {
  const std::size_t d = scheme.d;
  const std::size_t al = scheme.alpha();
  LabeledTensor gee = same_interval_block(lk, scheme);
  LabeledTensor e({"pL", "pR", "sL", "sR", "k", "ap", "as", "l"},
                  {d, d, d, d, kKDim, al, al, IndexScheme::l_dim});
  for (std::size_t pL = 0; pL < d; ++pL)
    for (std::size_t pR = 0; pR < d; ++pR)
      for (std::size_t sL = 0; sL < d; ++sL)
        for (std::size_t sR = 0; sR < d; ++sR) {
          // clamped-record sectors: k = 0, -1, 2
          if (pL == sL && pR == sR)
            e.at({pL, pR, sL, sR, kNone, 0, 0, 0}) = 1.0;
          e.at({pL, pR, sL, sR, kLink, 0, 0, 0}) = 1.0;
          e.at({pL, pR, sL, sR, kDouble, 0, 0, 0}) =
              gee.at({pL, pR, sL, sR});
          // k = 1: record the interaction side and states
          if (pR == sR)
            e.at({pL, pR, sL, sR, kSingle, pL + 1, sL + 1, 0}) = 1.0;
          if (pL == sL)
            e.at({pL, pR, sL, sR, kSingle, pR + 1, sR + 1, 1}) = -1.0;
        }
  return e;
}

LabeledTensor build_M(const LiftedKernel& lk, std::size_t lag,
                      const IndexScheme& scheme) {
  const std::size_t d = scheme.d;
  const std::size_t al = scheme.alpha();
  LabeledTensor gm = cross_interval_block(lk, lag, scheme);
  LabeledTensor m({"pL", "pR", "sL", "sR", "k", "ap", "as", "l", "kp", "app",
                   "asp", "lp"},
                  {d, d, d, d, kKDim, al, al, IndexScheme::l_dim, kKDim, al,
                   al, IndexScheme::l_dim});
  for (std::size_t pL = 0; pL < d; ++pL)
    for (std::size_t pR = 0; pR < d; ++pR)
      for (std::size_t sL = 0; sL < d; ++sL)
        for (std::size_t sR = 0; sR < d; ++sR) {
          // pass-through branch
          for (std::size_t k = 0; k < kKDim; ++k)
            for (std::size_t ap = 0; ap < al; ++ap)
              for (std::size_t as = 0; as < al; ++as)
                for (std::size_t l = 0; l < 2; ++l)
                  m.at({pL, pR, sL, sR, k, ap, as, l, k, ap, as, l}) = 1.0;
          // interaction branch: k 1 -> -1 consuming the pending record
          for (std::size_t ap = 1; ap < al; ++ap)
            for (std::size_t as = 1; as < al; ++as)
              for (std::size_t l = 0; l < 2; ++l)
                m.at({pL, pR, sL, sR, kSingle, ap, as, l, kLink, 0, 0, 0}) +=
                    gm.at({pL, pR, sL, sR, l, ap - 1, as - 1});
        }
  return m;
}

}  // namespace etempo
