#include "etempo/oracle/brute_force.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "etempo/bath/quadrature.hpp"
#include "etempo/liouville/superop.hpp"

namespace etempo {

void CorrelationRequest::validate(std::size_t d) const {
  if (steps == 0 || dt <= 0) throw std::invalid_argument("bad request grid");
  if (static_cast<std::size_t>(rho0.rows()) != d)
    throw std::invalid_argument("rho0 dimension mismatch");
  std::size_t prev = 0;
  for (const auto& ins : insertions) {
    if (ins.step < prev)
      throw std::invalid_argument("insertion steps must be nondecreasing");
    if (ins.step > steps) throw std::invalid_argument("insertion beyond run");
    if (static_cast<std::size_t>(ins.op.rows()) != d * d)
      throw std::invalid_argument("insertion operator dimension mismatch");
    prev = ins.step;
  }
  if (std::abs(rho0.trace() - 1.0) > 1e-9)
    throw std::invalid_argument("rho0 must have unit trace");
}

namespace {

LabeledTensor mat_tensor(const Mat& m, const std::string& out,
                         const std::string& in) {
  LabeledTensor t({out, in}, {static_cast<std::size_t>(m.rows()),
                              static_cast<std::size_t>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      t.at({static_cast<std::size_t>(i), static_cast<std::size_t>(j)}) =
          m(i, j);
  return t;
}

// independently integrated pair tensors (own quadrature order, own loops)
struct OracleKernels {
  // lifted to composite elements; [lag] with 0 = ordered same-interval
  std::vector<LabeledTensor> fwd, rev;
  LabeledTensor gee;                  // same-interval matrix (p, s), d^2
  std::vector<LabeledTensor> tpair;   // [lag], labels (p2, s2, p1, s1), d^2
};

OracleKernels oracle_kernels(const SystemSpec& sys, const PairKernel& kernel,
                             double dt, std::size_t n_max) {
  CompositeBasis basis(sys.emitters);
  const std::size_t d = basis.dim();
  const std::size_t n_em = basis.n_emitters();
  const double frame = kernel.frame();
  const std::size_t K = 40;
  std::vector<double> x, w, xu, wu;
  gauss_legendre(K, 0.0, dt, x, w);
  gauss_legendre(K, 0.0, 1.0, xu, wu);

  auto gap = [&](std::size_t em, std::size_t i, std::size_t j) {
    const auto& e = sys.emitters[em].energies;
    return e[i] - e[j] -
           frame * (static_cast<double>(i) - static_cast<double>(j));
  };
  auto element = [&](std::size_t em, std::size_t a, std::size_t b,
                     std::size_t& i, std::size_t& j) {
    for (std::size_t q = 0; q < n_em; ++q) {
      if (q == em) continue;
      if (basis.level_of(a, q) != basis.level_of(b, q)) return false;
    }
    i = basis.level_of(a, em);
    j = basis.level_of(b, em);
    return true;
  };

  OracleKernels out;
  for (std::size_t lag = 0; lag <= n_max; ++lag) {
    LabeledTensor f({"a2", "b2", "a1", "b1"}, {d, d, d, d});
    LabeledTensor r({"a2", "b2", "a1", "b1"}, {d, d, d, d});
    for (std::size_t a2 = 0; a2 < d; ++a2)
      for (std::size_t b2 = 0; b2 < d; ++b2)
        for (std::size_t a1 = 0; a1 < d; ++a1)
          for (std::size_t b1 = 0; b1 < d; ++b1) {
            cplx vf = 0, vr = 0;
            for (std::size_t n = 0; n < n_em; ++n) {
              std::size_t i2, j2;
              if (!element(n, a2, b2, i2, j2)) continue;
              for (std::size_t m = 0; m < n_em; ++m) {
                std::size_t i1, j1;
                if (!element(m, a1, b1, i1, j1)) continue;
                const double ph2 = gap(n, i2, j2), ph1 = gap(m, i1, j1);
                cplx af = 0, ar = 0;
                if (lag == 0) {
                  for (std::size_t a = 0; a < K; ++a)
                    for (std::size_t b = 0; b < K; ++b) {
                      const double t2 = x[a], t1 = xu[b] * t2;
                      const double ww = w[a] * wu[b] * t2;
                      const cplx ph =
                          std::exp(cplx(0, ph2 * (t2 - 0.5 * dt) +
                                               ph1 * (t1 - 0.5 * dt)));
                      af += ww * ph *
                            kernel.eval(n, {i2, j2}, m, {i1, j1}, t2 - t1);
                      ar += ww * ph *
                            kernel.eval(m, {i1, j1}, n, {i2, j2}, t1 - t2);
                    }
                } else {
                  const double off = lag * dt;
                  for (std::size_t a = 0; a < K; ++a)
                    for (std::size_t b = 0; b < K; ++b) {
                      const double t2 = x[a], t1 = x[b];
                      const double ww = w[a] * w[b];
                      const cplx ph =
                          std::exp(cplx(0, ph2 * (t2 - 0.5 * dt) +
                                               ph1 * (t1 - 0.5 * dt)));
                      af += ww * ph * kernel.eval(n, {i2, j2}, m, {i1, j1},
                                                  off + t2 - t1);
                      ar += ww * ph * kernel.eval(m, {i1, j1}, n, {i2, j2},
                                                  t1 - t2 - off);
                    }
                }
                vf -= af;
                vr -= ar;
              }
            }
            f.at({a2, b2, a1, b1}) = vf;
            r.at({a2, b2, a1, b1}) = vr;
          }
    out.fwd.push_back(std::move(f));
    out.rev.push_back(std::move(r));
  }

  // same-interval Liouville matrix over composite (p, s)
  auto idx = [d](std::size_t l, std::size_t rr) { return l * d + rr; };
  out.gee = LabeledTensor({"p", "s"}, {d * d, d * d});
  for (std::size_t pL = 0; pL < d; ++pL)
    for (std::size_t pR = 0; pR < d; ++pR)
      for (std::size_t sL = 0; sL < d; ++sL)
        for (std::size_t sR = 0; sR < d; ++sR) {
          cplx v = 0;
          if (pR == sR)
            for (std::size_t q = 0; q < d; ++q)
              v += out.fwd[0].at({pL, q, q, sL});
          v -= out.rev[0].at({pL, sL, sR, pR});
          v -= out.fwd[0].at({sR, pR, pL, sL});
          if (pL == sL)
            for (std::size_t q = 0; q < d; ++q)
              v += out.rev[0].at({q, pR, sR, q});
          out.gee.at({idx(pL, pR), idx(sL, sR)}) = v;
        }

  // cross-interval joint couplings
  for (std::size_t lag = 0; lag <= n_max; ++lag) {
    LabeledTensor t({"p2", "s2", "p1", "s1"}, {d * d, d * d, d * d, d * d});
    if (lag > 0) {
      for (std::size_t p2L = 0; p2L < d; ++p2L)
        for (std::size_t p2R = 0; p2R < d; ++p2R)
          for (std::size_t s2L = 0; s2L < d; ++s2L)
            for (std::size_t s2R = 0; s2R < d; ++s2R)
              for (std::size_t p1L = 0; p1L < d; ++p1L)
                for (std::size_t p1R = 0; p1R < d; ++p1R)
                  for (std::size_t s1L = 0; s1L < d; ++s1L)
                    for (std::size_t s1R = 0; s1R < d; ++s1R) {
                      cplx v = 0;
                      if (p2R == s2R && p1R == s1R)
                        v += out.fwd[lag].at({p2L, s2L, p1L, s1L});
                      if (p2R == s2R && p1L == s1L)
                        v -= out.rev[lag].at({p2L, s2L, s1R, p1R});
                      if (p2L == s2L && p1R == s1R)
                        v -= out.fwd[lag].at({s2R, p2R, p1L, s1L});
                      if (p2L == s2L && p1L == s1L)
                        v += out.rev[lag].at({s2R, p2R, s1R, p1R});
                      t.at({idx(p2L, p2R), idx(s2L, s2R), idx(p1L, p1R),
                            idx(s1L, s1R)}) = v;
                    }
    }
    out.tpair.push_back(std::move(t));
  }
  return out;
}

enum class Slot { kNoneOp, kDoubleOp, kPairOp };

struct ConfigWalker {
  std::size_t horizon;
  const std::vector<Mat>* halves_first;   // U0(t_j -> t_j + dt/2)
  const std::vector<Mat>* halves_second;  // U0(t_j + dt/2 -> t_{j+1})
  const CorrelationRequest* req;
  const OracleKernels* ker;
  std::size_t d2;

  Mat insertion_product(std::size_t step) const {
    Mat m = Mat::Identity(d2, d2);
    for (const auto& ins : req->insertions)
      if (ins.step == step) m = ins.op * m;
    return m;
  }

  cplx contract_config(const std::vector<Slot>& slots,
                       const std::vector<int>& partner) const;
};

cplx ConfigWalker::contract_config(const std::vector<Slot>& slots,
                                   const std::vector<int>& partner) const {
  const std::size_t h = horizon;
  const std::size_t d = static_cast<std::size_t>(req->rho0.rows());
  Vec v0 = vectorize(req->rho0);
  v0 = insertion_product(0) * v0;
  if (h == 0) {
    Vec closed = req->readout * v0;
    Vec tr0 = trace_vector(d);
    cplx val = 0;
    for (std::size_t s = 0; s < d * d; ++s) val += tr0(s) * closed(s);
    return val;
  }
  LabeledTensor running;
  {
    Vec s0 = (*halves_first)[0] * v0;
    running = LabeledTensor({"c"}, {d2});
    for (std::size_t i = 0; i < d2; ++i) running[i] = s0(i);
  }
  for (std::size_t j = 0; j < h; ++j) {
    // interval-j coupling
    if (slots[j] == Slot::kDoubleOp) {
      LabeledTensor g = ker->gee.renamed({{"p", "c2"}, {"s", "c"}});
      running = contract(running, g, {{"c", "c"}});
      running.rename("c2", "c");
    } else if (slots[j] == Slot::kPairOp && partner[j] > static_cast<int>(j)) {
      // earlier member: expose copies of (s_j, p_{j+1})
      running.rename("c", "u" + std::to_string(j));
      LabeledTensor link = LabeledTensor::identity("w" + std::to_string(j),
                                                   "c", d2);
      running = contract(running, link, {});
    } else if (slots[j] == Slot::kPairOp) {
      const std::size_t j0 = static_cast<std::size_t>(partner[j]);
      const std::size_t lag = j - j0;
      LabeledTensor t = ker->tpair[lag];
      running = contract(running, t,
                         {{"c", "s2"},
                          {"u" + std::to_string(j0), "s1"},
                          {"w" + std::to_string(j0), "p1"}});
      running.rename("p2", "c");
    }
    if (j + 1 < h) {
      Mat vj = (*halves_first)[j + 1] * insertion_product(j + 1) *
               (*halves_second)[j];
      LabeledTensor m = mat_tensor(vj, "c2", "c");
      running = contract(running, m, {{"c", "c"}});
      running.rename("c2", "c");
    }
  }
  // close: trailing half, insertions at step h, readout, trace
  Mat close = req->readout * insertion_product(h) * (*halves_second)[h - 1];
  Vec tr = trace_vector(d);
  LabeledTensor cv({"c"}, {d2});
  for (std::size_t p = 0; p < d2; ++p) {
    cplx acc = 0;
    for (std::size_t s = 0; s < d2; ++s) acc += tr(s) * close(s, p);
    cv[p] = acc;
  }
  LabeledTensor val = contract(running, cv, {{"c", "c"}});
  return val[0];
}

void enumerate_matchings(std::vector<std::size_t>& open,
                         std::vector<int>& partner,
                         const std::function<void()>& emit) {
  if (open.empty()) {
    emit();
    return;
  }
  std::size_t first = open.front();
  std::vector<std::size_t> rest(open.begin() + 1, open.end());
  for (std::size_t i = 0; i < rest.size(); ++i) {
    std::size_t mate = rest[i];
    partner[first] = static_cast<int>(mate);
    partner[mate] = static_cast<int>(first);
    std::vector<std::size_t> next = rest;
    next.erase(next.begin() + i);
    enumerate_matchings(next, partner, emit);
    partner[first] = partner[mate] = -1;
  }
}

}  // namespace

TimeSeries brute_force_correlation(const CorrelationRequest& req,
                                   const SystemSpec& sys,
                                   const PairKernel& kernel,
                                   std::size_t config_budget) {
  CompositeBasis basis(sys.emitters);
  const std::size_t d = basis.dim();
  req.validate(d);
  const std::size_t M = req.steps;

  // configuration count estimate: 3^M assignments times <= 15 matchings
  double est = std::pow(3.0, static_cast<double>(M)) * 15.0 *
               std::pow(static_cast<double>(d * d), 4.0);
  if (est > static_cast<double>(config_budget))
    throw std::invalid_argument("brute force budget exceeded");

  std::vector<Mat> halves_first, halves_second;
  for (std::size_t j = 0; j < M; ++j) {
    halves_first.push_back(free_propagator(sys, j * req.dt, req.dt / 2));
    halves_second.push_back(
        free_propagator(sys, (j + 0.5) * req.dt, req.dt / 2));
  }
  OracleKernels ker = oracle_kernels(sys, kernel, req.dt,
                                     M > 0 ? M - 1 : 0);

  TimeSeries out;
  out.dt = req.dt;
  for (std::size_t h = 0; h <= M; ++h) {
    ConfigWalker walker{h, &halves_first, &halves_second, &req, &ker, d * d};
    cplx total = 0;
    std::vector<Slot> slots(h, Slot::kNoneOp);
    std::vector<int> partner(h, -1);
    std::function<void(std::size_t)> rec = [&](std::size_t j) {
      if (j == h) {
        std::vector<std::size_t> open;
        for (std::size_t i = 0; i < h; ++i)
          if (slots[i] == Slot::kPairOp) open.push_back(i);
        if (open.size() % 2 != 0) return;
        if (open.empty()) {
          total += walker.contract_config(slots, partner);
          return;
        }
        enumerate_matchings(open, partner, [&] {
          total += walker.contract_config(slots, partner);
        });
        return;
      }
      for (Slot s : {Slot::kNoneOp, Slot::kDoubleOp, Slot::kPairOp}) {
        slots[j] = s;
        rec(j + 1);
      }
      slots[j] = Slot::kNoneOp;
    };
    rec(0);
    out.times.push_back(h * req.dt);
    out.values.push_back(total);
  }
  return out;
}

TimeSeries free_evolution_series(const CorrelationRequest& req,
                                 const SystemSpec& sys) {
  CompositeBasis basis(sys.emitters);
  const std::size_t d = basis.dim();
  req.validate(d);
  TimeSeries out;
  out.dt = req.dt;
  Vec tr = trace_vector(d);
  auto ins_at = [&](std::size_t step) {
    Mat m = Mat::Identity(d * d, d * d);
    for (const auto& ins : req.insertions)
      if (ins.step == step) m = ins.op * m;
    return m;
  };
  Vec v = ins_at(0) * vectorize(req.rho0);
  for (std::size_t h = 0; h <= req.steps; ++h) {
    Vec closed = req.readout * v;
    cplx val = 0;
    for (std::size_t s = 0; s < d * d; ++s) val += tr(s) * closed(s);
    out.times.push_back(h * req.dt);
    out.values.push_back(val);
    if (h < req.steps) {
      Mat u = free_propagator(sys, h * req.dt, req.dt);
      v = ins_at(h + 1) * (u * v);
    }
  }
  return out;
}

}  // namespace etempo
