#include "etempo/engine/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etempo {

namespace {

LabeledTensor add_unit_axis(const LabeledTensor& t, const std::string& label) {
  std::vector<std::string> labels = t.labels();
  std::vector<std::size_t> dims = t.dims();
  labels.push_back(label);
  dims.push_back(1);
  return LabeledTensor(labels, dims, t.data());
}

LabeledTensor delta_read(const LabeledTensor& t, const std::string& lbl,
                         const std::string& in_lbl) {
  return multiply_shared(t, LabeledTensor::identity(lbl, in_lbl, t.dim(lbl)),
                         {});
}

struct PassOp {
  std::size_t pos;
  std::string out;  // "" = slot retires to dim 1
  std::string in;   // "" = slot was parked at dim 1
};

struct Segment {
  LabeledTensor dense;
  std::vector<PassOp> ops;  // sorted by pos
  bool lin = false, lout = false;
};

struct EmittedSite {
  std::size_t pos;
  LabeledTensor t;
  std::string left, right;  // hanging connector labels ("" = none)
  std::string out, in;      // physical labels on t
  std::size_t out_dim, in_dim;
};

std::string pb(std::size_t p) { return "__pb" + std::to_string(p); }

std::vector<EmittedSite> train_segment(const Segment& seg) {
  LabeledTensor dense = seg.dense;
  const std::size_t nops = seg.ops.size();
  std::vector<std::string> so(nops), si(nops);
  std::vector<std::size_t> od(nops), id(nops);
  for (std::size_t k = 0; k < nops; ++k) {
    so[k] = seg.ops[k].out.empty() ? "__do" + std::to_string(k)
                                   : seg.ops[k].out;
    si[k] = seg.ops[k].in.empty() ? "__di" + std::to_string(k)
                                  : seg.ops[k].in;
    if (seg.ops[k].out.empty()) dense = add_unit_axis(dense, so[k]);
    if (seg.ops[k].in.empty()) dense = add_unit_axis(dense, si[k]);
    od[k] = dense.dim(so[k]);
    id[k] = dense.dim(si[k]);
  }
  std::vector<std::string> order;
  if (seg.lin) order.push_back("__lin");
  for (std::size_t k = 0; k < nops; ++k) {
    const std::string f = "__s" + std::to_string(k);
    dense = dense.fused({so[k], si[k]}, f);
    order.push_back(f);
  }
  if (seg.lout) order.push_back("__lout");
  MatrixProductState train =
      tensor_train(dense, order, TruncationPolicy{100000, 1e-30});

  const std::size_t off = seg.lin ? 1 : 0;
  std::vector<LabeledTensor> sites(nops);
  for (std::size_t k = 0; k < nops; ++k) sites[k] = train.site(off + k);
  if (seg.lin)
    sites[0] = contract(train.site(0), sites[0],
                        {{train.bond(0), train.bond(0)}});
  if (seg.lout) {
    const std::size_t lb = train.size() - 2;
    sites[nops - 1] = contract(sites[nops - 1], train.site(train.size() - 1),
                               {{train.bond(lb), train.bond(lb)}});
  }

  std::vector<EmittedSite> out(nops);
  for (std::size_t k = 0; k < nops; ++k) {
    EmittedSite& es = out[k];
    es.pos = seg.ops[k].pos;
    es.t = sites[k].split("__s" + std::to_string(k), {so[k], si[k]},
                          {od[k], id[k]});
    es.left = k == 0 ? (seg.lin ? std::string("__lin") : std::string())
                     : train.bond(off + k - 1);
    es.right = k + 1 == nops
                   ? (seg.lout ? std::string("__lout") : std::string())
                   : train.bond(off + k);
    es.out = so[k];
    es.in = si[k];
    es.out_dim = od[k];
    es.in_dim = id[k];
  }
  return out;
}

/// Assembles a full pass MPO over the dim table from ordered segments;
/// adjacent segments chain on their line connectors, with the final line
/// folded against `closure`.  Updates the dim table to the post-pass state.
MatrixProductOperator build_pass(std::vector<std::size_t>& dims,
                                 const std::vector<Segment>& segments,
                                 const std::vector<cplx>& closure = {}) {
  std::vector<EmittedSite> emitted;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    auto part = train_segment(segments[s]);
    for (auto& es : part) {
      if (es.left == "__lin") {
        const std::string nl = "__ln" + std::to_string(s);
        es.t.rename("__lin", nl);
        es.left = nl;
      }
      if (es.right == "__lout") {
        const std::string nl = "__ln" + std::to_string(s + 1);
        es.t.rename("__lout", nl);
        es.right = nl;
      }
    }
    emitted.insert(emitted.end(), part.begin(), part.end());
  }
  if (!emitted.empty() && !emitted.back().right.empty()) {
    // close the trailing line
    EmittedSite& es = emitted.back();
    if (closure.empty())
      throw TensorError("build_pass: open line without closure");
    LabeledTensor cv({es.right}, {closure.size()},
                     std::vector<cplx>(closure));
    es.t = contract(es.t, cv, {{es.right, es.right}});
    es.right = "";
  }
  for (std::size_t k = 0; k + 1 < emitted.size(); ++k) {
    if (emitted[k].right.empty() != emitted[k + 1].left.empty())
      throw TensorError("build_pass: mismatched connectors");
    if (!emitted[k].right.empty() &&
        emitted[k].t.dim(emitted[k].right) !=
            emitted[k + 1].t.dim(emitted[k + 1].left))
      throw TensorError("build_pass: connector dimension mismatch");
  }

  const std::size_t n = dims.size();
  std::vector<LabeledTensor> sites(n);
  std::vector<std::string> pout(n), pin(n), bonds(n > 0 ? n - 1 : 0, "");
  std::size_t e = 0;        // next emitted site
  std::string carry;        // label crossing the upcoming link
  std::size_t carry_dim = 1;
  for (std::size_t p = 0; p < n; ++p) {
    const std::string o = "__po" + std::to_string(p);
    const std::string i = "__pi" + std::to_string(p);
    if (e < emitted.size() && emitted[e].pos == p) {
      EmittedSite& es = emitted[e];
      if (es.in_dim != dims[p])
        throw TensorError("build_pass: stale dim table at position " +
                          std::to_string(p));
      LabeledTensor t = es.t;
      if (!es.left.empty()) {
        t.rename(es.left, pb(p - 1));
        bonds[p - 1] = pb(p - 1);
      }
      if (!es.right.empty()) {
        t.rename(es.right, pb(p));
        carry = emitted[e].right;
        carry_dim = t.dim(pb(p));
      } else {
        carry.clear();
        carry_dim = 1;
      }
      t.rename(es.out, o);
      t.rename(es.in, i);
      sites[p] = std::move(t);
      dims[p] = es.out_dim;
      ++e;
    } else {
      LabeledTensor t = LabeledTensor::identity(o, i, dims[p]);
      if (!carry.empty()) {
        LabeledTensor link =
            LabeledTensor::identity(pb(p - 1), pb(p), carry_dim);
        t = contract(t, link, {});
        bonds[p - 1] = pb(p - 1);
      }
      sites[p] = std::move(t);
    }
    pout[p] = o;
    pin[p] = i;
  }
  if (!carry.empty())
    throw TensorError("build_pass: line extends past the chain");
  return MatrixProductOperator::from_sites(std::move(sites), pout, pin, bonds);
}

}  // namespace

std::size_t ChainSchema::reg_rest_dim(Reg r) const {
  switch (r) {
    case aP:
    case aS:
      return alpha();
    case aL:
      return 2;
    default:
      return 1;
  }
}

std::vector<std::string> ChainSchema::site_names() const {
  static const char* edge[] = {"eSL", "eSR", "ePL", "ePR", "eK", "eM1",
                               "eM2", "eQ1", "eQ2", "eS1", "eP2"};
  static const char* reg[] = {"aP", "tP", "tT", "tM", "aS", "tS",
                              "tS2", "tQ", "tQ2", "tU", "tU2", "aL"};
  std::vector<std::string> names;
  for (auto* eN : edge) names.emplace_back(eN);
  for (std::size_t g = 0; g < n_groups(); ++g)
    for (auto* r : reg) names.push_back(std::string(r) + std::to_string(g));
  return names;
}

MatrixProductState ChainSchema::rest_chain(const Vec& s_edge_vec) const {
  std::vector<LabeledTensor> vecs;
  auto names = site_names();
  for (std::size_t p = 0; p < size(); ++p) {
    std::size_t dim = 1;
    if (p >= kEdge) {
      std::size_t off = (p - kEdge) % kGroup;
      dim = reg_rest_dim(static_cast<Reg>(off));
    } else if (p == eSL || p == eSR) {
      dim = d;
    }
    LabeledTensor v({names[p]}, {dim});
    v[0] = 1.0;
    vecs.push_back(std::move(v));
  }
  MatrixProductState chain = MatrixProductState::from_product(vecs);
  // patch the entangled system edge over (eSL, eSR)
  LabeledTensor s({"sl", "sr"}, {d, d});
  for (std::size_t i = 0; i < d * d; ++i) s[i] = s_edge_vec(i);
  SvdResult split = svd_truncate(s, {"sl"}, TruncationPolicy::lossless());
  const std::size_t chi = split.s.size();
  for (std::size_t a = 0; a < chi; ++a)
    for (std::size_t c = 0; c < d; ++c) split.V[a * d + c] *= split.s[a];
  LabeledTensor s0 = split.U.renamed({{"sl", names[0]},
                                      {"__svd", chain.bond(0)}});
  LabeledTensor s1 = split.V.renamed({{"sr", names[1]},
                                      {"__svd", chain.bond(0)}});
  s1 = add_unit_axis(s1, chain.bond(1));
  chain.sites_[0] = std::move(s0);
  chain.sites_[1] = std::move(s1);
  return chain;
}

// ---------------------------------------------------------------------------
// BlockPasses

namespace {

// register-write patterns for the split side lines
LabeledTensor u_pattern_a(std::size_t d) {
  // tU from the sL line: holds sL when the completion is right-side
  LabeledTensor t({"u", "lv", "mt"}, {d, d, 3});
  for (std::size_t s = 0; s < d; ++s) {
    t.at({s, s, 1}) = 1.0;
    t.at({0, s, 0}) = 1.0;
    t.at({0, s, 2}) = 1.0;
  }
  return t;
}

LabeledTensor u_pattern_b(std::size_t d) {
  // tU2 from the sR line: holds sR when the completion is left-side
  LabeledTensor t({"u", "lv", "mt"}, {d, d, 3});
  for (std::size_t s = 0; s < d; ++s) {
    t.at({s, s, 0}) = 1.0;
    t.at({0, s, 1}) = 1.0;
    t.at({0, s, 2}) = 1.0;
  }
  return t;
}

LabeledTensor record_pattern(std::size_t d, bool right_side, bool negate) {
  // tS / tS2 / tQ / tQ2: the kernel feed from one line component
  LabeledTensor t({"r", "lv", "mt"}, {d, d, 3});
  const std::size_t act = right_side ? 1 : 0;
  const double sign = negate ? -1.0 : 1.0;
  for (std::size_t s = 0; s < d; ++s) {
    t.at({s, s, act}) = sign;
    t.at({0, s, 1 - act}) = 1.0;
    t.at({0, s, 2}) = 1.0;
  }
  return t;
}

LabeledTensor compare_pattern(std::size_t d, bool right_side) {
  // consumes tU/tU2 against one p-line component (the untouched-side delta)
  LabeledTensor t({"u", "lv", "mt"}, {d, d, 3});
  const std::size_t act = right_side ? 0 : 1;  // tU holds sL -> compare pL
  for (std::size_t s = 0; s < d; ++s) {
    t.at({s, s, act}) = 1.0;
    t.at({0, s, 1 - act}) = 1.0;
    t.at({0, s, 2}) = 1.0;
  }
  return t;
}

LabeledTensor line_source(std::size_t d, const std::string& in_label,
                          bool consume) {
  // maps one edge component onto the line; optionally retires the site
  LabeledTensor t({"__lout", in_label}, {d, d});
  for (std::size_t s = 0; s < d; ++s) t.at({s, s}) = 1.0;
  if (!consume) return delta_read(t, in_label, in_label + "__i");
  return t;
}

LabeledTensor m2_tap(const LabeledTensor& m2, std::size_t d, std::size_t al) {
  // T(lin=kp, lout=k, as, asp, pt2, mt, m2v, ts, ts2, tq, tq2)
  LabeledTensor t({"__lin", "__lout", "as", "asp", "pt2", "mt", "m2v", "ts",
                   "ts2", "tq", "tq2"},
                  {kKDim, kKDim, al, al, d, 3, 2, d, d, d, d});
  // pass-through: registers parked, k and alpha_s lines untouched
  for (std::size_t k = 0; k < kKDim; ++k)
    for (std::size_t as = 0; as < al; ++as)
      t.at({k, k, as, as, 0, 2, 0, 0, 0, 0, 0}) = 1.0;
  // completion: k' = link -> k = single, consuming the kernel feeds
  for (std::size_t as = 1; as < al; ++as)
    for (std::size_t pt2 = 0; pt2 < d; ++pt2)
      for (std::size_t m2v = 0; m2v < 2; ++m2v)
        for (std::size_t y = 0; y < 2; ++y)
          for (std::size_t s1 = 0; s1 < d; ++s1)
            for (std::size_t p1 = 0; p1 < d; ++p1) {
              const cplx v =
                  m2.at({kSingle, kLink, as, 0, s1, p1, pt2, m2v, y});
              if (v == cplx(0.0)) continue;
              std::size_t ts = y == 0 ? s1 : 0;
              std::size_t ts2 = y == 0 ? 0 : s1;
              std::size_t tq = y == 0 ? p1 : 0;
              std::size_t tq2 = y == 0 ? 0 : p1;
              t.at({kLink, kSingle, as, 0, pt2, y, m2v, ts, ts2, tq, tq2}) =
                  v;
            }
  return t;
}

}  // namespace

BlockPasses::BlockPasses(const EFactors& ef,
                         const std::vector<MFactors>& mf_per_lag,
                         const IndexScheme& scheme, std::size_t K) {
  schema_.d = scheme.d;
  schema_.K = K;
  const std::size_t d = scheme.d;
  const std::size_t al = scheme.alpha();
  if (mf_per_lag.size() != K + 1)
    throw TensorError("BlockPasses: need factors for lags 0..K");

  using E = ChainSchema::Edge;
  using R = ChainSchema::Reg;
  auto gp = [&](std::size_t slot, R r) { return schema_.group_pos(slot, r); };

  // dim table for the edge window [0 .. end of slot 0]
  const std::size_t wsize = ChainSchema::kEdge + ChainSchema::kGroup;
  std::vector<std::size_t> wd(wsize, 1);
  wd[E::eSL] = wd[E::eSR] = d;
  wd[gp(0, R::aP) ] = al;
  wd[gp(0, R::aS)] = al;
  wd[gp(0, R::aL)] = 2;

  auto seg1 = [&](LabeledTensor dense, std::vector<PassOp> ops) {
    Segment s;
    s.dense = std::move(dense);
    s.ops = std::move(ops);
    return std::vector<Segment>{std::move(s)};
  };

  // E1: creates the k/m lines and the left outgoing component
  {
    LabeledTensor t = delta_read(ef.e1, "sL", "sL_i");
    edge_passes_.push_back(build_pass(
        wd, seg1(std::move(t), {{E::eSL, "sL", "sL_i"},
                                {E::ePL, "pL", ""},
                                {E::eK, "k", ""},
                                {E::eM1, "m1", ""},
                                {E::eM2, "m2", ""}})));
  }
  // E2
  {
    LabeledTensor t = delta_read(ef.e2, "sR", "sR_i");
    t = delta_read(t, "k", "k_i");
    t = delta_read(t, "m1", "m1_i");
    t = delta_read(t, "m2", "m2_i");
    edge_passes_.push_back(build_pass(
        wd, seg1(std::move(t), {{E::eSR, "sR", "sR_i"},
                                {E::ePR, "pR", ""},
                                {E::eK, "k", "k_i"},
                                {E::eM1, "m1", "m1_i"},
                                {E::eM2, "m2", "m2_i"}})));
  }
  // E3: q feeds
  {
    LabeledTensor t = delta_read(ef.e3, "pL", "pL_i");
    t = delta_read(t, "pR", "pR_i");
    t = delta_read(t, "k", "k_i");
    t = delta_read(t, "m1", "m1_i");
    t = delta_read(t, "m2", "m2_i");
    edge_passes_.push_back(build_pass(
        wd, seg1(std::move(t), {{E::ePL, "pL", "pL_i"},
                                {E::ePR, "pR", "pR_i"},
                                {E::eK, "k", "k_i"},
                                {E::eM1, "m1", "m1_i"},
                                {E::eM2, "m2", "m2_i"},
                                {E::eQ1, "q1", ""},
                                {E::eQ2, "q2", ""}})));
  }
  // E4: q2 cross-check against the s side
  {
    LabeledTensor t = delta_read(ef.e4, "sL", "sL_i");
    t = delta_read(t, "sR", "sR_i");
    t = delta_read(t, "k", "k_i");
    t = delta_read(t, "m1", "m1_i");
    t = delta_read(t, "m2", "m2_i");
    t = delta_read(t, "q2", "q2_i");
    edge_passes_.push_back(build_pass(
        wd, seg1(std::move(t), {{E::eSL, "sL", "sL_i"},
                                {E::eSR, "sR", "sR_i"},
                                {E::eK, "k", "k_i"},
                                {E::eM1, "m1", "m1_i"},
                                {E::eM2, "m2", "m2_i"},
                                {E::eQ2, "q2", "q2_i"}})));
  }
  // E6: s1 feed and the alpha_s record of the current interval
  {
    LabeledTensor t = delta_read(ef.e6, "sL", "sL_i");
    t = delta_read(t, "sR", "sR_i");
    t = delta_read(t, "k", "k_i");
    t = delta_read(t, "m1", "m1_i");
    t = delta_read(t, "m2", "m2_i");
    edge_passes_.push_back(build_pass(
        wd, seg1(std::move(t), {{E::eSL, "sL", "sL_i"},
                                {E::eSR, "sR", "sR_i"},
                                {E::eK, "k", "k_i"},
                                {E::eM1, "m1", "m1_i"},
                                {E::eM2, "m2", "m2_i"},
                                {E::eS1, "s1", ""},
                                {gp(0, R::aS), "", "as"}})));
  }
  // E7: p2 feed and the alpha_p record
  {
    LabeledTensor t = delta_read(ef.e7, "pL", "pL_i");
    t = delta_read(t, "pR", "pR_i");
    t = delta_read(t, "k", "k_i");
    t = delta_read(t, "m1", "m1_i");
    t = delta_read(t, "m2", "m2_i");
    edge_passes_.push_back(build_pass(
        wd, seg1(std::move(t), {{E::ePL, "pL", "pL_i"},
                                {E::ePR, "pR", "pR_i"},
                                {E::eK, "k", "k_i"},
                                {E::eM1, "m1", "m1_i"},
                                {E::eM2, "m2", "m2_i"},
                                {E::eP2, "p2", ""},
                                {gp(0, R::aP), "", "ap"}})));
  }
  // E5: retires the helper slots and hosts the same-interval block
  {
    LabeledTensor t = delta_read(ef.e5, "k", "k_i");
    edge_passes_.push_back(build_pass(
        wd, seg1(std::move(t), {{E::eK, "k", "k_i"},
                                {E::eM1, "", "m1"},
                                {E::eM2, "", "m2"},
                                {E::eQ1, "", "q1"},
                                {E::eQ2, "", "q2"},
                                {E::eS1, "", "s1"},
                                {E::eP2, "", "p2"},
                                {gp(0, R::aL), "", "l"}})));
  }

  // full-chain dim table after the edge passes
  std::vector<std::size_t> cd(schema_.size(), 1);
  for (std::size_t p = 0; p < wsize; ++p) cd[p] = wd[p];
  for (std::size_t g = 1; g <= K; ++g) {
    cd[gp(g, R::aP)] = al;
    cd[gp(g, R::aS)] = al;
    cd[gp(g, R::aL)] = 2;
  }

  const MFactors& mf1 = mf_per_lag[std::min<std::size_t>(1, K)];

  // M1: alpha_p registers emit their completion feeds
  {
    std::vector<Segment> segs;
    for (std::size_t g = 1; g <= K; ++g) {
      Segment s;
      s.dense = mf1.m1;  // lag-independent
      s.ops = {{gp(g, R::aP), "ap", "app"},
               {gp(g, R::tP), "pt2", ""},
               {gp(g, R::tT), "mt", ""}};
      segs.push_back(std::move(s));
    }
    chain_passes_.push_back(build_pass(cd, segs));
  }
  // M3: l registers
  {
    std::vector<Segment> segs;
    for (std::size_t g = 1; g <= K; ++g) {
      Segment s;
      s.dense = delta_read(mf1.m3, "mt", "mt_i");
      s.ops = {{gp(g, R::tT), "mt", "mt_i"},
               {gp(g, R::tM), "m2", ""},
               {gp(g, R::aL), "l", "lp"}};
      segs.push_back(std::move(s));
    }
    chain_passes_.push_back(build_pass(cd, segs));
  }
  // side-line passes; each tap dense carries (lin, lout, mt read) plus its
  // register writes/consumes, entrywise-aligned on the line value
  struct LineSpec {
    ChainSchema::Edge src;
    bool consume_src;
    LabeledTensor tap;              // labels: lv, mt, plus r and/or u
    std::vector<std::pair<ChainSchema::Reg, int>> regs;  // (+1 write, -1 eat)
  };
  auto with_u = [&](LabeledTensor rec, LabeledTensor up) {
    return multiply_shared(rec, up, {});  // shares (lv, mt): Hadamard
  };
  std::vector<LineSpec> lines;
  lines.push_back({E::eSL, true,
                   with_u(record_pattern(d, false, false), u_pattern_a(d)),
                   {{R::tS, +1}, {R::tU, +1}}});
  lines.push_back({E::eSR, true,
                   with_u(record_pattern(d, true, true), u_pattern_b(d)),
                   {{R::tS2, +1}, {R::tU2, +1}}});
  lines.push_back({E::ePL, false, record_pattern(d, false, false),
                   {{R::tQ, +1}}});
  lines.push_back({E::ePR, false, record_pattern(d, true, false),
                   {{R::tQ2, +1}}});
  lines.push_back({E::ePL, false, compare_pattern(d, true), {{R::tU, -1}}});
  lines.push_back({E::ePR, false, compare_pattern(d, false), {{R::tU2, -1}}});
  for (auto& ls : lines) {
    std::vector<Segment> segs;
    {
      Segment s;
      s.dense = line_source(d, "lv", ls.consume_src);
      s.lout = true;
      if (ls.consume_src)
        s.ops = {{static_cast<std::size_t>(ls.src), "", "lv"}};
      else
        s.ops = {{static_cast<std::size_t>(ls.src), "lv", "lv__i"}};
      segs.push_back(std::move(s));
    }
    for (std::size_t g = 1; g <= K; ++g) {
      LabeledTensor tap = delta_read(ls.tap, "mt", "mt_i");
      // thread the line: lin = lout = lv
      tap.rename("lv", "__lin");
      tap = multiply_shared(
          tap, LabeledTensor::identity("__lin", "__lout", d), {});
      Segment seg;
      seg.lin = true;
      seg.lout = true;
      seg.dense = std::move(tap);
      seg.ops = {{gp(g, R::tT), "mt", "mt_i"}};
      for (auto [reg, rw] : ls.regs) {
        const std::string lbl = (reg == R::tU || reg == R::tU2) ? "u" : "r";
        if (rw > 0)
          seg.ops.push_back({gp(g, reg), lbl, ""});
        else
          seg.ops.push_back({gp(g, reg), "", lbl});
      }
      std::sort(seg.ops.begin(), seg.ops.end(),
                [](const PassOp& a, const PassOp& b) { return a.pos < b.pos; });
      segs.push_back(std::move(seg));
    }
    chain_passes_.push_back(
        build_pass(cd, segs, std::vector<cplx>(d, cplx(1.0))));
  }
  // M2: the k line with the lag-resolved kernel taps
  {
    std::vector<Segment> segs;
    {
      Segment s;
      s.dense = line_source(kKDim, "kv", true);
      s.lout = true;
      s.ops = {{static_cast<std::size_t>(E::eK), "", "kv"}};
      segs.push_back(std::move(s));
    }
    for (std::size_t g = 1; g <= K; ++g) {
      Segment s;
      s.lin = true;
      s.lout = true;
      s.dense = m2_tap(mf_per_lag[g].m2, d, al);
      s.ops = {{gp(g, R::tP), "", "pt2"},
               {gp(g, R::tT), "", "mt"},
               {gp(g, R::tM), "", "m2v"},
               {gp(g, R::aS), "as", "asp"},
               {gp(g, R::tS), "", "ts"},
               {gp(g, R::tS2), "", "ts2"},
               {gp(g, R::tQ), "", "tq"},
               {gp(g, R::tQ2), "", "tq2"}};
      segs.push_back(std::move(s));
    }
    // edge weight: the exposed interaction index excludes the link value
    std::vector<cplx> weight = {0.0, 1.0, 1.0, 1.0};
    chain_passes_.push_back(build_pass(cd, segs, weight));
  }

  // post-block sanity: only ePL/ePR and the registers of slots 1..K live
  for (std::size_t p = 0; p < schema_.size(); ++p) {
    std::size_t expect = 1;
    if (p == E::ePL || p == E::ePR) expect = d;
    if (p >= ChainSchema::kEdge) {
      std::size_t off = (p - ChainSchema::kEdge) % ChainSchema::kGroup;
      std::size_t slot = (p - ChainSchema::kEdge) / ChainSchema::kGroup;
      if (slot >= 1)
        expect = schema_.reg_rest_dim(static_cast<ChainSchema::Reg>(off));
    }
    if (cd[p] != expect)
      throw TensorError("BlockPasses: dim table mismatch at position " +
                        std::to_string(p));
  }
}

void BlockPasses::apply(MatrixProductState& chain,
                        const TruncationPolicy& policy,
                        ApplyStats* stats) const {
  if (chain.size() != schema_.size())
    throw TensorError("BlockPasses::apply: chain size mismatch");
  for (const auto& pass : edge_passes_)
    apply_mpo_range(chain, pass, 0, stats);
  for (const auto& pass : chain_passes_)
    chain = apply_mpo(chain, pass, policy, stats);
}

void apply_mpo_range(MatrixProductState& chain, const MatrixProductOperator& op,
                     std::size_t start, ApplyStats* stats) {
  const std::size_t w = op.size();
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t p = start + i;
    LabeledTensor osite = op.site(i);
    if (i > 0 && !op.bonds_[i - 1].empty())
      osite.rename(op.bonds_[i - 1], "__mw" + std::to_string(i - 1));
    if (i + 1 < w && !op.bonds_[i].empty())
      osite.rename(op.bonds_[i], "__mw" + std::to_string(i));
    LabeledTensor t = contract(chain.sites_[p], osite,
                               {{chain.phys_[p], op.phys_in(i)}});
    if (op.phys_out(i) != chain.phys_[p]) t.rename(op.phys_out(i),
                                                   chain.phys_[p]);
    if (i > 0 && t.has_label("__mw" + std::to_string(i - 1))) {
      t = t.fused({chain.bonds_[p - 1], "__mw" + std::to_string(i - 1)},
                  "__fl");
      t.rename("__fl", chain.bonds_[p - 1]);
    }
    if (i + 1 < w && t.has_label("__mw" + std::to_string(i))) {
      t = t.fused({chain.bonds_[p], "__mw" + std::to_string(i)}, "__fr");
      t.rename("__fr", chain.bonds_[p]);
    }
    chain.sites_[p] = std::move(t);
  }
  // window-local near-lossless compression
  const std::size_t lo = start, hi = start + w - 1;
  const TruncationPolicy lossless{1000000, 1e-28};
  for (std::size_t i = hi; i > lo; --i) {
    std::vector<std::string> left = {chain.bonds_[i - 1]};
    SvdResult res = svd_truncate(chain.sites_[i], left, lossless);
    const std::size_t keep = res.s.size();
    LabeledTensor us = res.U;
    const std::size_t rows = us.size() / keep;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < keep; ++c) us[r * keep + c] *= res.s[c];
    res.V.rename("__svd", chain.bonds_[i - 1]);
    us.rename("__svd", "__tmpb");
    chain.sites_[i] = std::move(res.V);
    chain.sites_[i - 1] =
        contract(chain.sites_[i - 1], us,
                 {{chain.bonds_[i - 1], chain.bonds_[i - 1]}});
    chain.sites_[i - 1].rename("__tmpb", chain.bonds_[i - 1]);
  }
  double disc = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    std::vector<std::string> left;
    if (i > 0) left.push_back(chain.bonds_[i - 1]);
    left.push_back(chain.phys_[i]);
    SvdResult res = svd_truncate(chain.sites_[i], left, lossless);
    disc += res.discarded_sq;
    res.U.rename("__svd", chain.bonds_[i]);
    chain.sites_[i] = std::move(res.U);
    const std::size_t keep = res.s.size();
    const std::size_t cols = res.V.size() / keep;
    for (std::size_t a = 0; a < keep; ++a)
      for (std::size_t c = 0; c < cols; ++c) res.V[a * cols + c] *= res.s[a];
    res.V.rename("__svd", "__tmpc");
    chain.sites_[i + 1] = contract(res.V, chain.sites_[i + 1],
                                   {{chain.bonds_[i], chain.bonds_[i]}});
    chain.sites_[i + 1].rename("__tmpc", chain.bonds_[i]);
  }
  if (stats) {
    stats->discarded_sq += disc;
    stats->max_bond = std::max(stats->max_bond, chain.max_bond_dim());
  }
}

}  // namespace etempo
