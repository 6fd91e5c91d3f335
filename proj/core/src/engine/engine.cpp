#include "etempo/engine/engine.hpp"

#include <algorithm>
#include <cmath>

#include "etempo/engine/layers.hpp"
#include "etempo/influence/factors.hpp"
#include "etempo/liouville/superop.hpp"

namespace etempo {

namespace {

Mat insertions_at(const CorrelationRequest& req, std::size_t step,
                  std::size_t d2) {
  Mat m = Mat::Identity(d2, d2);
  for (const auto& ins : req.insertions)
    if (ins.step == step) m = ins.op * m;
  return m;
}

// row functional w(pL, pR) = sum_s trace(s) [R ins U_half](s, p)
LabeledTensor close_functional(const Mat& m, std::size_t d) {
  LabeledTensor w({"pl", "pr"}, {d, d});
  for (std::size_t pl = 0; pl < d; ++pl)
    for (std::size_t pr = 0; pr < d; ++pr) {
      cplx acc = 0;
      for (std::size_t s = 0; s < d; ++s) acc += m(s * d + s, pl * d + pr);
      w.at({pl, pr}) = acc;
    }
  return w;
}

// four-site exchange at the chain head: consumes (ePL, ePR), writes the
// propagated state onto (eSL, eSR)
MatrixProductOperator head_exchange(const Mat& v, std::size_t d) {
  LabeledTensor t({"sl", "sr", "pl", "pr"}, {d, d, d, d});
  for (std::size_t sl = 0; sl < d; ++sl)
    for (std::size_t sr = 0; sr < d; ++sr)
      for (std::size_t pl = 0; pl < d; ++pl)
        for (std::size_t pr = 0; pr < d; ++pr)
          t.at({sl, sr, pl, pr}) = v(sl * d + sr, pl * d + pr);
  // train over the four head positions
  LabeledTensor dense = t;
  std::vector<std::string> order = {"sl", "sr", "pl", "pr"};
  MatrixProductState train = tensor_train(dense, order,
                                          TruncationPolicy::lossless());
  std::vector<LabeledTensor> sites;
  std::vector<std::string> pout, pin, bonds;
  for (std::size_t i = 0; i < 4; ++i) {
    LabeledTensor s = train.site(i);
    const std::string o = "__ho" + std::to_string(i);
    const std::string in = "__hi" + std::to_string(i);
    std::vector<std::string> labels = s.labels();
    std::vector<std::size_t> dims = s.dims();
    labels.push_back(i < 2 ? in : o);
    dims.push_back(1);
    s = LabeledTensor(labels, dims, s.data());
    s.rename(order[i], i < 2 ? o : in);
    sites.push_back(std::move(s));
    pout.push_back(o);
    pin.push_back(in);
    if (i + 1 < 4) bonds.push_back(train.bond(i));
  }
  return MatrixProductOperator::from_sites(std::move(sites), pout, pin,
                                           bonds);
}

struct EngineRun {
  const CorrelationRequest* req;
  const SystemSpec* sys;
  std::size_t d, d2, K, M;
  ChainSchema schema;
  std::vector<Mat> half_first, half_second;

  Mat w_matrix(const Mat& readout, std::size_t step) const {
    Mat m = readout * insertions_at(*req, step, d2);
    if (step > 0) m = m * half_second[step - 1];
    return m;
  }
};

std::vector<cplx> read_values(const MatrixProductState& chain,
                              const std::vector<LabeledTensor>& ws) {
  // fold the register side down to the head
  LabeledTensor env = LabeledTensor::scalar(1.0);
  const std::size_t n = chain.size();
  for (std::size_t p = n; p-- > 4;) {
    std::size_t dim = chain.phys_dim(p);
    std::vector<cplx> cl(dim, 0.0);
    if (dim == 1) {
      cl[0] = 1.0;
    } else {
      cl[0] = 1.0;  // registers close in the no-pending slot
    }
    LabeledTensor cv({chain.phys(p)}, {dim}, cl);
    LabeledTensor sc_t = contract(chain.site(p), cv,
                                  {{chain.phys(p), chain.phys(p)}});
    if (p == n - 1)
      env = sc_t;
    else
      env = contract(sc_t, env, {{chain.bond(p), chain.bond(p)}});
  }
  // env now hangs on bond(3); absorb ePR (3) and ePL (2) keeping phys open
  LabeledTensor t3 = contract(chain.site(3), env,
                              {{chain.bond(3), chain.bond(3)}});
  LabeledTensor t2 = contract(chain.site(2), t3,
                              {{chain.bond(2), chain.bond(2)}});
  // t2: (bond(1), ePL phys, ePR phys)
  std::vector<cplx> out;
  for (const auto& w : ws) {
    LabeledTensor v = contract(
        t2, w, {{chain.phys(2), "pl"}, {chain.phys(3), "pr"}});
    // close the parked head sites 0, 1
    LabeledTensor s1 = contract(chain.site(1), v,
                                {{chain.bond(1), chain.bond(1)}});
    std::vector<cplx> one = {1.0};
    LabeledTensor c1({chain.phys(1)}, {1}, one);
    s1 = contract(s1, c1, {{chain.phys(1), chain.phys(1)}});
    LabeledTensor s0 = contract(chain.site(0), s1,
                                {{chain.bond(0), chain.bond(0)}});
    LabeledTensor c0({chain.phys(0)}, {1}, one);
    s0 = contract(s0, c0, {{chain.phys(0), chain.phys(0)}});
    out.push_back(s0[0]);
  }
  return out;
}

void rename_canonical(MatrixProductState& chain, const ChainSchema& sc) {
  auto names = sc.site_names();
  for (std::size_t p = 0; p < chain.size(); ++p) {
    if (chain.phys_[p] == names[p]) continue;
    chain.sites_[p].rename(chain.phys_[p], names[p]);
    chain.phys_[p] = names[p];
  }
}

}  // namespace

Mat collective_lowering(const CompositeBasis& basis) {
  const std::size_t d = basis.dim();
  Mat p = Mat::Zero(d, d);
  for (std::size_t n = 0; n < basis.n_emitters(); ++n)
    p += basis.transition(n, 0, 1);
  return p;
}

std::vector<TimeSeries> run_correlation_multi(const CorrelationRequest& req,
                                              const SystemSpec& sys,
                                              const PairKernel& kernel,
                                              const std::vector<Mat>&
                                                  readouts) {
  CompositeBasis basis(sys.emitters);
  const std::size_t d = basis.dim();
  req.validate(d);
  EngineRun run;
  run.req = &req;
  run.sys = &sys;
  run.d = d;
  run.d2 = d * d;
  run.M = req.steps;
  run.K = std::min<std::size_t>(req.memory_horizon,
                                run.M > 0 ? run.M - 1 : 0);
  if (run.K == 0) run.K = 1;  // the schema keeps one tap slot regardless

  for (std::size_t j = 0; j < run.M; ++j) {
    run.half_first.push_back(free_propagator(sys, j * req.dt, req.dt / 2));
    run.half_second.push_back(
        free_propagator(sys, (j + 0.5) * req.dt, req.dt / 2));
  }

  IndexScheme scheme{d};
  KernelTensors kt = integrated_kernels(kernel, sys.emitters, req.dt, run.K);
  LiftedKernel lk = lift_kernel(kt, basis);
  EFactors ef = decompose_E(lk, scheme);
  std::vector<MFactors> mf;
  for (std::size_t lag = 0; lag <= run.K; ++lag)
    mf.push_back(decompose_M(lk, lag, scheme));
  BlockPasses passes(ef, mf, scheme, run.K);
  run.schema = passes.schema();

  std::vector<TimeSeries> series(readouts.size());
  for (auto& s : series) s.dt = req.dt;

  // step-0 value straight from the initial state
  Vec v0 = insertions_at(req, 0, run.d2) * vectorize(req.rho0);
  for (std::size_t r = 0; r < readouts.size(); ++r) {
    Vec closed = readouts[r] * v0;
    cplx val = 0;
    for (std::size_t s = 0; s < d; ++s) val += closed(s * d + s);
    series[r].times.push_back(0.0);
    series[r].values.push_back(val);
  }
  if (run.M == 0) return series;

  ApplyStats stats;
  MatrixProductState chain = run.schema.rest_chain(run.half_first[0] * v0);
  for (std::size_t j = 0; j < run.M; ++j) {
    passes.apply(chain, req.policy, &stats);
    // read out at t_{j+1}
    std::vector<LabeledTensor> ws;
    for (const auto& r : readouts)
      ws.push_back(close_functional(run.w_matrix(r, j + 1), d));
    auto vals = read_values(chain, ws);
    for (std::size_t r = 0; r < readouts.size(); ++r) {
      series[r].times.push_back((j + 1) * req.dt);
      series[r].values.push_back(vals[r]);
    }
    if (j + 1 == run.M) break;
    // attach the propagator row: p-edge becomes the next s-edge
    Mat v = run.half_first[j + 1] * insertions_at(req, j + 1, run.d2) *
            run.half_second[j];
    apply_mpo_range(chain, head_exchange(v, d), 0, &stats);
    // retire the spent lag-0 register group
    for (std::size_t k = 0; k < ChainSchema::kGroup; ++k)
      chain = close_site(chain, ChainSchema::kEdge, {cplx(1.0)});
    // fresh group enters the horizon
    std::vector<LabeledTensor> fresh;
    for (std::size_t k = 0; k < ChainSchema::kGroup; ++k) {
      auto reg = static_cast<ChainSchema::Reg>(k);
      std::size_t dim = run.schema.reg_rest_dim(reg);
      LabeledTensor vtx({"__new" + std::to_string(k)}, {dim});
      vtx[0] = 1.0;
      fresh.push_back(std::move(vtx));
    }
    chain = extend(chain, fresh, ChainEnd::kRight);
    rename_canonical(chain, run.schema);
  }

  for (auto& s : series) {
    s.max_bond = stats.max_bond;
    s.discarded_weight = stats.discarded_sq;
    s.truncation_warning = stats.discarded_sq > req.truncation_ceiling;
  }
  return series;
}

TimeSeries run_correlation(const CorrelationRequest& req,
                           const SystemSpec& sys, const PairKernel& kernel) {
  return run_correlation_multi(req, sys, kernel, {req.readout})[0];
}

std::vector<Mat> reduced_density_series(const Mat& rho0, const SystemSpec& sys,
                                        const PairKernel& kernel,
                                        std::size_t steps, double dt,
                                        const TruncationPolicy& policy,
                                        std::size_t memory_horizon,
                                        TimeSeries* meta) {
  CompositeBasis basis(sys.emitters);
  const std::size_t d = basis.dim();
  CorrelationRequest req;
  req.rho0 = rho0;
  req.readout = Mat::Identity(d * d, d * d);
  req.steps = steps;
  req.dt = dt;
  req.policy = policy;
  req.memory_horizon = memory_horizon;
  std::vector<Mat> readouts;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      Mat e = Mat::Zero(d, d);
      e(j, i) = 1.0;  // |j><i| picks rho_ij
      readouts.push_back(left_mult(e));
    }
  auto series = run_correlation_multi(req, sys, kernel, readouts);
  std::vector<Mat> out;
  for (std::size_t t = 0; t <= steps; ++t) {
    Mat rho(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        rho(i, j) = series[i * d + j].values[t];
    out.push_back(rho);
  }
  if (meta) *meta = series[0];
  return out;
}

TimeSeries single_quantum(const SystemSpec& sys, const PairKernel& kernel,
                          const Mat& rho0, std::size_t steps, double dt,
                          const TruncationPolicy& policy,
                          std::size_t memory_horizon, int local) {
  CompositeBasis basis(sys.emitters);
  Mat p = local >= 0 ? basis.transition(static_cast<std::size_t>(local), 0, 1)
                     : collective_lowering(basis);
  CorrelationRequest req;
  req.rho0 = rho0;
  req.insertions = {{0, left_mult(p.adjoint())}};
  req.readout = left_mult(p);
  req.steps = steps;
  req.dt = dt;
  req.policy = policy;
  req.memory_horizon = memory_horizon;
  return run_correlation(req, sys, kernel);
}

TimeSeries double_quantum(const SystemSpec& sys, const PairKernel& kernel,
                          const Mat& rho0, std::size_t steps, double dt,
                          const TruncationPolicy& policy,
                          std::size_t memory_horizon) {
  CompositeBasis basis(sys.emitters);
  Mat p = collective_lowering(basis);
  Mat pp = p * p;
  CorrelationRequest req;
  req.rho0 = rho0;
  req.insertions = {{0, left_mult((pp).adjoint())}};
  req.readout = left_mult(pp);
  req.steps = steps;
  req.dt = dt;
  req.policy = policy;
  req.memory_horizon = memory_horizon;
  return run_correlation(req, sys, kernel);
}

// ---------------------------------------------------------------------------
// dense register-recursion reference

TimeSeries dense_reference_correlation(const CorrelationRequest& req,
                                       const SystemSpec& sys,
                                       const PairKernel& kernel) {
  CompositeBasis basis(sys.emitters);
  const std::size_t d = basis.dim();
  req.validate(d);
  const std::size_t M = req.steps;
  const std::size_t K = std::max<std::size_t>(
      1, std::min<std::size_t>(req.memory_horizon, M > 0 ? M - 1 : 1));
  IndexScheme scheme{d};
  const std::size_t al = scheme.alpha();

  KernelTensors kt = integrated_kernels(kernel, sys.emitters, req.dt, K);
  LiftedKernel lk = lift_kernel(kt, basis);
  LabeledTensor etens = build_E(lk, scheme);
  std::vector<LabeledTensor> mtens;  // lag 1..K
  for (std::size_t lag = 1; lag <= K; ++lag)
    mtens.push_back(build_M(lk, lag, scheme));

  LabeledTensor etens_relab = etens.renamed({{"ap", "ap0"},
                                             {"as", "as0"},
                                             {"l", "l0"}});
  LabeledTensor kw({"k"}, {kKDim});
  kw[kLink] = 0.0;
  kw[kNone] = kw[kSingle] = kw[kDouble] = 1.0;

  std::vector<Mat> half_first, half_second;
  for (std::size_t j = 0; j < M; ++j) {
    half_first.push_back(free_propagator(sys, j * req.dt, req.dt / 2));
    half_second.push_back(
        free_propagator(sys, (j + 0.5) * req.dt, req.dt / 2));
  }

  TimeSeries out;
  out.dt = req.dt;
  Vec v0 = insertions_at(req, 0, d * d) * vectorize(req.rho0);
  {
    Vec closed = req.readout * v0;
    cplx val = 0;
    for (std::size_t s = 0; s < d; ++s) val += closed(s * d + s);
    out.times.push_back(0.0);
    out.values.push_back(val);
  }
  if (M == 0) return out;

  // state over (c, regs of slots 0..K)
  std::vector<std::string> reg_labels;
  std::vector<std::size_t> reg_dims;
  for (std::size_t g = 0; g <= K; ++g) {
    reg_labels.push_back("ap" + std::to_string(g));
    reg_dims.push_back(al);
    reg_labels.push_back("as" + std::to_string(g));
    reg_dims.push_back(al);
    reg_labels.push_back("l" + std::to_string(g));
    reg_dims.push_back(2);
  }
  std::vector<std::string> labels = {"c"};
  std::vector<std::size_t> dims = {d * d};
  labels.insert(labels.end(), reg_labels.begin(), reg_labels.end());
  dims.insert(dims.end(), reg_dims.begin(), reg_dims.end());
  LabeledTensor state(labels, dims);
  {
    Vec s0 = half_first[0] * v0;
    std::vector<std::size_t> idx(labels.size(), 0);
    for (std::size_t c = 0; c < d * d; ++c) {
      idx[0] = c;
      state.at(idx) = s0(c);
    }
  }

  auto readout_now = [&](std::size_t step) {
    // close registers at the no-pending slot, apply the functional
    LabeledTensor folded = state;
    for (std::size_t g = 0; g <= K; ++g)
      for (const char* nm : {"ap", "as", "l"}) {
        std::string lbl = std::string(nm) + std::to_string(g);
        LabeledTensor cv = LabeledTensor::basis(lbl, folded.dim(lbl), 0);
        folded = contract(folded, cv, {{lbl, lbl}});
      }
    Mat m = req.readout * insertions_at(req, step, d * d) *
            half_second[step - 1];
    cplx val = 0;
    for (std::size_t s = 0; s < d; ++s)
      for (std::size_t p = 0; p < d * d; ++p)
        val += m(s * d + s, p) * folded[p];
    return val;
  };

  for (std::size_t j = 0; j < M; ++j) {
    // consume the edge and slot-0 registers with E, then tap slots 1..K,
    // keeping (sL, sR) entrywise-shared until every tap has read them
    LabeledTensor next = state.split("c", {"sL", "sR"}, {d, d});
    next = multiply_shared(next, etens_relab, {"ap0", "as0", "l0"});
    for (std::size_t g = 1; g <= K; ++g) {
      LabeledTensor m = mtens[g - 1].renamed(
          {{"ap", "apo" + std::to_string(g)},
           {"as", "aso" + std::to_string(g)},
           {"l", "lo" + std::to_string(g)},
           {"app", "ap" + std::to_string(g)},
           {"asp", "as" + std::to_string(g)},
           {"lp", "l" + std::to_string(g)},
           {"k", "knext"}});
      next.rename("k", "kp");
      next = multiply_shared(next, m,
                             {"kp", "ap" + std::to_string(g),
                              "as" + std::to_string(g),
                              "l" + std::to_string(g)});
      next.rename("knext", "k");
    }
    next = contract(next, kw, {{"k", "k"}});
    // the interval's own Liouville indices are now fully used
    LabeledTensor ones({"x"}, {d});
    for (std::size_t q = 0; q < d; ++q) ones[q] = 1.0;
    next = contract(next, ones.renamed({{"x", "sL"}}), {{"sL", "sL"}});
    next = contract(next, ones.renamed({{"x", "sR"}}), {{"sR", "sR"}});
    next = next.fused({"pL", "pR"}, "c");
    // slots shift down; a fresh neutral register enters at slot K
    for (std::size_t g = 1; g <= K; ++g) {
      next.rename("apo" + std::to_string(g), "ap" + std::to_string(g - 1));
      next.rename("aso" + std::to_string(g), "as" + std::to_string(g - 1));
      next.rename("lo" + std::to_string(g), "l" + std::to_string(g - 1));
    }
    LabeledTensor freshp = LabeledTensor::basis("ap" + std::to_string(K),
                                                al, 0);
    LabeledTensor freshs = LabeledTensor::basis("as" + std::to_string(K),
                                                al, 0);
    LabeledTensor freshl = LabeledTensor::basis("l" + std::to_string(K), 2,
                                                0);
    next = contract(contract(contract(next, freshp, {}), freshs, {}),
                    freshl, {});
    state = std::move(next);

    out.times.push_back((j + 1) * req.dt);
    out.values.push_back(readout_now(j + 1));
    if (j + 1 == M) break;
    // propagate the edge
    Mat v = half_first[j + 1] * insertions_at(req, j + 1, d * d) *
            half_second[j];
    LabeledTensor vt({"cnew", "c"}, {d * d, d * d});
    for (std::size_t a = 0; a < d * d; ++a)
      for (std::size_t b = 0; b < d * d; ++b) vt.at({a, b}) = v(a, b);
    state = contract(state, vt, {{"c", "c"}});
    state.rename("cnew", "c");
  }
  return out;
}

}  // namespace etempo
