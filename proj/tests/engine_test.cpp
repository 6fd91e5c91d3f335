#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "etempo/engine/engine.hpp"
#include "etempo/liouville/superop.hpp"
#include "etempo/oracle/brute_force.hpp"
#include "test_util.hpp"

using namespace etempo;

namespace {

SystemSpec one_tls(double w0, double frame) {
  SystemSpec s;
  s.emitters.push_back({{0.0, w0}, {{Vec3{1, 0, 0}}}});
  s.rotating_frame = frame;
  return s;
}

SystemSpec two_tls(double w1, double w2, double frame) {
  SystemSpec s;
  s.emitters.push_back({{0.0, w1}, {{Vec3{1, 0, 0}}}});
  s.emitters.push_back({{0.0, w2}, {{Vec3{1, 0, 0}}}});
  s.rotating_frame = frame;
  return s;
}

Mat lower2() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

AnalyticPairKernel exp_kernel(std::size_t n_em,
                              std::vector<std::vector<double>> en,
                              double frame, double amp, double gamma,
                              double delta, bool cross = true) {
  std::vector<std::vector<cplx>> dips(n_em, std::vector<cplx>{1.0});
  auto base = [amp, gamma, delta, cross](std::size_t n, std::size_t m,
                                         double tau) -> cplx {
    double scale = (n == m) ? 1.0 : (cross ? 0.6 : 0.0);
    return scale * amp *
           std::exp(cplx(-gamma * std::abs(tau), -delta * tau));
  };
  return AnalyticPairKernel(n_em, base, std::move(en), std::move(dips), frame,
                            false, 1e30);
}

double max_series_diff(const TimeSeries& a, const TimeSeries& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("dense reference agrees with the path-sum oracle (d = 2)") {
  SystemSpec sys = one_tls(2.0, 1.6);
  auto kern = exp_kernel(1, {{0.0, 2.0}}, 1.6, 0.5, 0.8, 0.5);
  CorrelationRequest req;
  Mat rho0 = Mat::Zero(2, 2);
  rho0(1, 1) = 1.0;
  req.rho0 = rho0;
  req.readout = left_mult(rho0);
  req.steps = 4;
  req.dt = 0.3;
  auto bf = brute_force_correlation(req, sys, kern);
  auto dr = dense_reference_correlation(req, sys, kern);
  CHECK(max_series_diff(bf, dr) < 1e-9);
}

TEST_CASE("layered engine matches the dense register recursion (d = 2)") {
  SystemSpec sys = one_tls(2.0, 1.7);
  auto kern = exp_kernel(1, {{0.0, 2.0}}, 1.7, 0.4, 0.7, 0.9);
  CorrelationRequest req;
  Mat rho0 = Mat::Zero(2, 2);
  rho0(1, 1) = 1.0;
  req.rho0 = rho0;
  req.readout = left_mult(rho0);
  req.steps = 4;
  req.dt = 0.25;
  auto dr = dense_reference_correlation(req, sys, kern);
  auto en = run_correlation(req, sys, kern);
  CHECK(max_series_diff(dr, en) < 1e-10);

  // coherence request exercises the off-diagonal sectors
  CorrelationRequest req2 = req;
  Mat g = Mat::Zero(2, 2);
  g(0, 0) = 1.0;
  req2.rho0 = g;
  req2.insertions = {{0, left_mult(lower2().adjoint())}};
  req2.readout = left_mult(lower2());
  auto dr2 = dense_reference_correlation(req2, sys, kern);
  auto en2 = run_correlation(req2, sys, kern);
  CHECK(max_series_diff(dr2, en2) < 1e-10);
}

TEST_CASE("engine: zero coupling reproduces free evolution") {
  SystemSpec sys = one_tls(2.0, 1.5);
  auto kern = exp_kernel(1, {{0.0, 2.0}}, 1.5, 0.0, 1.0, 0.0);
  CorrelationRequest req;
  Mat g = Mat::Zero(2, 2);
  g(0, 0) = 1.0;
  req.rho0 = g;
  req.insertions = {{0, left_mult(lower2().adjoint())}};
  req.readout = left_mult(lower2());
  req.steps = 5;
  req.dt = 0.4;
  auto en = run_correlation(req, sys, kern);
  auto fr = free_evolution_series(req, sys);
  CHECK(max_series_diff(en, fr) < 1e-10);
}

TEST_CASE("engine matches the path-sum oracle on coupled TLS pair (d = 4)") {
  SystemSpec sys = two_tls(3.0, 3.0, 2.8);
  auto kern = exp_kernel(2, {{0.0, 3.0}, {0.0, 3.0}}, 2.8, 0.35, 0.9, 0.4);
  CorrelationRequest req;
  CompositeBasis basis(sys.emitters);
  Mat rho0 = Mat::Zero(4, 4);
  rho0(2, 2) = 1.0;  // emitter 0 excited
  req.rho0 = rho0;
  req.readout = left_mult(rho0);
  req.steps = 3;
  req.dt = 0.3;
  auto bf = brute_force_correlation(req, sys, kern);
  auto en = run_correlation(req, sys, kern);
  CHECK(max_series_diff(bf, en) < 1e-10);

  // polarization correlator with the collective operator
  Mat p = collective_lowering(basis);
  CorrelationRequest req2 = req;
  Mat g = Mat::Zero(4, 4);
  g(0, 0) = 1.0;
  req2.rho0 = g;
  req2.insertions = {{0, left_mult(p.adjoint())}};
  req2.readout = left_mult(p);
  auto bf2 = brute_force_correlation(req2, sys, kern);
  auto en2 = run_correlation(req2, sys, kern);
  CHECK(max_series_diff(bf2, en2) < 1e-10);
}

TEST_CASE("engine: memory horizon approaches the full-history result") {
  SystemSpec sys = one_tls(2.0, 2.0);
  auto kern = exp_kernel(1, {{0.0, 2.0}}, 2.0, 0.3, 0.5, 0.2);
  CorrelationRequest req;
  Mat rho0 = Mat::Zero(2, 2);
  rho0(1, 1) = 1.0;
  req.rho0 = rho0;
  req.readout = left_mult(rho0);
  req.steps = 6;
  req.dt = 0.3;
  auto full = run_correlation(req, sys, kern);
  double prev = 1e9;
  for (std::size_t k : {1u, 2u, 3u, 5u}) {
    CorrelationRequest capped = req;
    capped.memory_horizon = k;
    auto s = run_correlation(capped, sys, kern);
    double dev = max_series_diff(full, s);
    CHECK(dev < prev + 1e-12);
    prev = dev;
  }
  CHECK(prev < 1e-10);  // horizon 5 == full history for 6 steps
}

TEST_CASE("engine: reduced density series stays physical") {
  SystemSpec sys = one_tls(2.0, 2.0);
  auto kern = exp_kernel(1, {{0.0, 2.0}}, 2.0, 0.4, 0.8, 0.0);
  Mat rho0 = Mat::Zero(2, 2);
  rho0(1, 1) = 1.0;
  TimeSeries meta;
  auto rhos = reduced_density_series(rho0, sys, kern, 6, 0.25,
                                     TruncationPolicy{64, 1e-12}, 100, &meta);
  for (const auto& r : rhos) {
    CHECK(std::abs(r.trace().real() - 1.0) < 1e-6);
    CHECK((r - r.adjoint()).norm() < 1e-8);
    Eigen::SelfAdjointEigenSolver<Mat> es(r);
    CHECK(es.eigenvalues().minCoeff() > -1e-4);
  }
  // population must actually decay into the bath
  CHECK(rhos.back()(1, 1).real() < 0.95);
}

TEST_CASE("engine: truncated run tracks the lossless run") {
  SystemSpec sys = one_tls(2.0, 2.0);
  auto kern = exp_kernel(1, {{0.0, 2.0}}, 2.0, 0.5, 0.6, 0.3);
  CorrelationRequest req;
  Mat rho0 = Mat::Zero(2, 2);
  rho0(1, 1) = 1.0;
  req.rho0 = rho0;
  req.readout = left_mult(rho0);
  req.steps = 6;
  req.dt = 0.25;
  auto lossless = run_correlation(req, sys, kern);
  CorrelationRequest trunc = req;
  trunc.policy = TruncationPolicy{16, 1e-10};
  auto t = run_correlation(trunc, sys, kern);
  CHECK(max_series_diff(lossless, t) < 1e-6);
  CHECK(t.max_bond <= 16);
}
