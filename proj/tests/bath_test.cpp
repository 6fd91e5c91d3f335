#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "etempo/bath/green.hpp"
#include "etempo/bath/integrated.hpp"
#include "etempo/bath/kernel.hpp"
#include "etempo/bath/quadrature.hpp"
#include "test_util.hpp"

using namespace etempo;

namespace {

std::vector<EmitterSpec> two_tls(double w1, double w2) {
  return {{{0.0, w1}, {Vec3{1, 0, 0}}}, {{0.0, w2}, {Vec3{1, 0, 0}}}};
}

// adaptive Simpson for complex integrands (independent quadrature oracle)
cplx adaptive_simpson(const std::function<cplx(double)>& f, double a, double b,
                      double tol, int depth = 28) {
  cplx fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  std::function<cplx(double, double, cplx, cplx, cplx, double, int)> rec =
      [&](double lo, double hi, cplx flo, cplx fhi, cplx fmid, double eps,
          int d) -> cplx {
    double m = 0.5 * (lo + hi);
    cplx fl = f(0.5 * (lo + m)), fr = f(0.5 * (m + hi));
    cplx whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    cplx left = (m - lo) / 6.0 * (flo + 4.0 * fl + fmid);
    cplx right = (hi - m) / 6.0 * (fmid + 4.0 * fr + fhi);
    if (d <= 0 || std::abs(left + right - whole) < 15 * eps)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, m, flo, fmid, fl, eps / 2, d - 1) +
           rec(m, hi, fmid, fhi, fr, eps / 2, d - 1);
  };
  return rec(a, b, fa, fb, fm, tol, depth);
}

}  // namespace

TEST_CASE("green_matrix: no waveguide coupling kills the cross terms") {
  TwoCavityParams p;
  p.Q_c = std::numeric_limits<double>::infinity();  // gamma_c -> 0
  auto g = green_matrix(p, p.omega_c * 1.001);
  CHECK(std::abs(g(0, 1)) == 0.0);
  CHECK(std::abs(g(1, 0)) == 0.0);
  CHECK(std::abs(g(0, 0)) > 0.0);
}

TEST_CASE("green_matrix: identical cavities give symmetric cross terms") {
  TwoCavityParams p;
  for (double f : {0.97, 0.999, 1.0, 1.002, 1.05}) {
    auto g = green_matrix(p, p.omega_c * f);
    CHECK(std::abs(g(0, 1) - g(1, 0)) <= 1e-14 * std::abs(g(0, 1)));
    CHECK(std::abs(g(0, 0) - g(1, 1)) <= 1e-14 * std::abs(g(0, 0)));
  }
}

TEST_CASE("green_matrix: golden fixture at omega_c with default parameters") {
  // frozen from an independent 50-digit evaluation of the closed form
  TwoCavityParams p;
  auto g = green_matrix(p, p.omega_c);
  const cplx G11(-8.9352071692277583e+38, 2.7805289802274691e+39);
  const cplx G12(2.8916369225228486e+39, -9.3485227407988709e+36);
  CHECK(std::abs(g(0, 0) - G11) < 1e-10 * std::abs(G11));
  CHECK(std::abs(g(0, 1) - G12) < 1e-10 * std::abs(G12));
}

TEST_CASE("spectral density: diagonal Im G stays positive over the band") {
  TwoCavityParams p;
  const double W = 40 * (p.gamma_c() + p.gamma0());
  for (int i = 0; i <= 200; ++i) {
    double w = p.omega_c - W + 2 * W * i / 200.0;
    auto g = green_matrix(p, w);
    CHECK(g(0, 0).imag() >= 0.0);
    CHECK(g(1, 1).imag() >= 0.0);
  }
}

TEST_CASE("correlation_kernel: zero dipole gives an identically zero kernel") {
  TwoCavityParams p;
  const double wc = p.omega_c;
  auto kern = correlation_kernel(p, two_tls(wc, wc), {0.0, 1e-29}, wc, false,
                                 60.0 / p.gamma_c());
  CHECK(std::abs(kern.eval(0, {1, 0}, 0, {0, 1}, 1e-13)) == 0.0);
  CHECK(std::abs(kern.eval(0, {1, 0}, 1, {0, 1}, 1e-13)) == 0.0);
  CHECK(std::abs(kern.eval(1, {1, 0}, 1, {0, 1}, 1e-13)) != 0.0);
}

TEST_CASE("correlation_kernel: FFT grid matches adaptive quadrature") {
  TwoCavityParams p;
  const double wc = p.omega_c;
  const double gtot = p.gamma_c() + p.gamma0();
  auto kern = correlation_kernel(p, two_tls(wc, wc), {1e-29, 1e-29}, wc, false,
                                 60.0 / gtot);
  const auto& grid = kern.sample_grid();
  const double pref = 1.0 / (constants::hbar * M_PI * constants::eps0);

  double peak = 0;
  for (const auto& v : grid.base[0][1]) peak = std::max(peak, std::abs(v));

  auto& gen = testutil::rng();
  std::uniform_int_distribution<std::size_t> pick(1, grid.tau.size() - 1);
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t k = pick(gen);
    double tau = grid.tau[k];
    auto integrand = [&](double w) -> cplx {
      auto g = green_matrix(p, w);
      return pref * kern.band_window(w) * g(0, 1).imag() *
             std::exp(cplx(0, -(w - wc) * tau));
    };
    cplx oracle = adaptive_simpson(integrand, kern.band_lo(), kern.band_hi(),
                                   1e-10 * peak);
    CHECK(std::abs(grid.base[0][1][k] - oracle) < 1e-8 * peak);
  }
}

TEST_CASE("correlation_kernel: single-cavity limit decays as a Lorentzian") {
  TwoCavityParams p;
  p.gamma0_frac = 20.0;  // off-chip dominated: feedback negligible
  const double wc = p.omega_c;
  const double gtot = p.gamma_c() + p.gamma0();
  auto kern = correlation_kernel(p, two_tls(wc, wc), {1e-29, 1e-29}, wc, false,
                                 40.0 / gtot);
  const auto& grid = kern.sample_grid();
  // linear fit of log|C11| over a 3/gtot window
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t k = 0; k < grid.tau.size(); ++k) {
    double t = grid.tau[k];
    if (t < 0.2 / gtot || t > 3.0 / gtot) continue;
    double y = std::log(std::abs(grid.base[0][0][k]));
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++cnt;
  }
  double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  CHECK(std::abs(-slope - 0.5 * gtot) < 0.02 * (0.5 * gtot));
}

TEST_CASE("correlation_kernel: spectrum round trip on the band interior") {
  TwoCavityParams p;
  const double wc = p.omega_c;
  const double gtot = p.gamma_c() + p.gamma0();
  auto kern = correlation_kernel(p, two_tls(wc, wc), {1e-29, 1e-29}, wc, false,
                                 80.0 / gtot);
  const auto& grid = kern.sample_grid();
  const double pref = 1e-29 * 1e-29 /
                      (constants::hbar * M_PI * constants::eps0);
  double jpeak = pref * green_matrix(p, wc)(0, 0).imag();
  for (double det : {-4.0, -1.0, 0.5, 2.0, 3.5}) {
    double w = wc + det * gtot;
    // J(w) = (1/pi) Re int_0^inf C(tau) e^{i(w-frame)tau} dtau
    cplx acc = 0;
    for (std::size_t k = 0; k + 1 < grid.tau.size(); ++k) {
      double t = grid.tau[k];
      cplx f1 = 1e-29 * 1e-29 * grid.base[0][0][k] *
                std::exp(cplx(0, (w - wc) * t));
      cplx f2 = 1e-29 * 1e-29 * grid.base[0][0][k + 1] *
                std::exp(cplx(0, (w - wc) * grid.tau[k + 1]));
      acc += 0.5 * (f1 + f2) * grid.step;
    }
    double j_rec = acc.real() / M_PI;
    double j_ref = pref * kern.band_window(w) *
                   green_matrix(p, w)(0, 0).imag();
    CHECK(std::abs(j_rec - j_ref) < 2e-6 * jpeak);
  }
}

TEST_CASE("integrated_kernels: zero kernel gives zero tensors") {
  auto base = [](std::size_t, std::size_t, double) -> cplx { return 0.0; };
  AnalyticPairKernel k(1, base, {{0.0, 1.0}}, {{cplx(1.0)}}, 0.0, false, 1e3);
  auto kt = integrated_kernels(k, {{{0.0, 1.0}, {Vec3{1, 0, 0}}}}, 0.1, 3);
  for (std::size_t lag = 0; lag <= 3; ++lag) {
    CHECK(kt.at(lag, 0, 0).fwd.norm() == 0.0);
    CHECK(kt.at(lag, 0, 0).rev.norm() == 0.0);
  }
}

namespace {
cplx I1(cplx c, double L) {
  if (std::abs(c) < 1e-300) return cplx(L);
  return (std::exp(c * L) - 1.0) / c;
}
}  // namespace

TEST_CASE("integrated_kernels: exponential kernel matches the closed form") {
  // C(tau) = exp(-gamma |tau| - i delta tau), two emitters with distinct gaps
  const double gamma = 0.8, delta = 1.7;
  const double wa = 2.3, wb = -1.1, frame = 0.4;
  auto base = [=](std::size_t, std::size_t, double tau) -> cplx {
    return std::exp(cplx(-gamma * std::abs(tau), -delta * tau));
  };
  std::vector<EmitterSpec> ems = {{{0.0, wa}, {Vec3{1, 0, 0}}},
                                  {{0.0, wb}, {Vec3{1, 0, 0}}}};
  AnalyticPairKernel k(2, base, {{0.0, wa}, {0.0, wb}},
                       {{cplx(1.0)}, {cplx(1.0)}}, frame, false, 1e6);
  const double dt = 0.9;
  auto kt = integrated_kernels(k, ems, dt, 4, 32);

  // later transition (1,0) on emitter 0, earlier (0,1) on emitter 1
  const double a = wa - frame;
  const double b = -(wb - frame);
  const cplx gi(gamma, delta), gc(gamma, -delta);
  const cplx anchor = std::exp(cplx(0, -(a + b) * dt / 2));

  for (std::size_t lag : {1u, 3u}) {
    cplx fwd_expect = -anchor * std::exp(-gi * static_cast<double>(lag) * dt) *
                      I1(cplx(0, a) - gi, dt) * I1(cplx(0, b) + gi, dt);
    cplx rev_expect = -anchor * std::exp(-gc * static_cast<double>(lag) * dt) *
                      I1(cplx(0, a) - gc, dt) * I1(cplx(0, b) + gc, dt);
    cplx fwd_got = kt.at(lag, 0, 1).fwd.at({1, 0, 0, 1});
    cplx rev_got = kt.at(lag, 0, 1).rev.at({1, 0, 0, 1});
    CHECK(std::abs(fwd_got - fwd_expect) < 1e-10);
    CHECK(std::abs(rev_got - rev_expect) < 1e-10);
  }

  // same-interval (ordered) integrals
  cplx same_fwd = -anchor / (cplx(0, b) + gi) *
                  (I1(cplx(0, a + b), dt) - I1(cplx(0, a) - gi, dt));
  cplx same_rev = -anchor / (cplx(0, b) + gc) *
                  (I1(cplx(0, a + b), dt) - I1(cplx(0, a) - gc, dt));
  CHECK(std::abs(kt.at(0, 0, 1).fwd.at({1, 0, 0, 1}) - same_fwd) < 1e-10);
  CHECK(std::abs(kt.at(0, 0, 1).rev.at({1, 0, 0, 1}) - same_rev) < 1e-10);
}

TEST_CASE("integrated_kernels: stationarity against a shifted-window sum") {
  const double gamma = 0.6, delta = 0.9;
  auto base = [=](std::size_t, std::size_t, double tau) -> cplx {
    return std::exp(cplx(-gamma * std::abs(tau), -delta * tau));
  };
  std::vector<EmitterSpec> ems = {{{0.0, 1.3}, {Vec3{1, 0, 0}}}};
  AnalyticPairKernel k(1, base, {{0.0, 1.3}}, {{cplx(1.0)}}, 0.2, false, 1e6);
  const double dt = 0.7;
  auto kt = integrated_kernels(k, ems, dt, 2, 32);

  // lag-2 window starting at an arbitrary absolute time s; phases are
  // midpoint-anchored so the result must not depend on s
  const double a = 1.3 - 0.2, b = -(1.3 - 0.2);
  for (double s : {0.0, 5.0 * dt}) {
    const int N = 400;
    cplx acc = 0;
    double h = dt / N;
    for (int i2 = 0; i2 < N; ++i2)
      for (int i1 = 0; i1 < N; ++i1) {
        double t2 = s + 2 * dt + (i2 + 0.5) * h;
        double t1 = s + (i1 + 0.5) * h;
        double m2 = s + 2 * dt + 0.5 * dt, m1 = s + 0.5 * dt;
        acc += h * h * std::exp(cplx(0, a * (t2 - m2) + b * (t1 - m1))) *
               base(0, 0, t2 - t1);
      }
    cplx got = kt.at(2, 0, 0).fwd.at({1, 0, 0, 1});
    CHECK(std::abs(got - (-acc)) < 1e-5 * std::max(1.0, std::abs(got)));
  }
}

TEST_CASE("integrated_kernels: same-interval tensor scales as dT^2") {
  auto base = [](std::size_t, std::size_t, double tau) -> cplx {
    return std::exp(cplx(-0.5 * std::abs(tau), -0.3 * tau));
  };
  std::vector<EmitterSpec> ems = {{{0.0, 0.7}, {Vec3{1, 0, 0}}}};
  AnalyticPairKernel k(1, base, {{0.0, 0.7}}, {{cplx(1.0)}}, 0.0, false, 1e6);
  std::vector<double> norms;
  double dt = 0.4;
  for (int halvings = 0; halvings < 4; ++halvings) {
    auto kt = integrated_kernels(k, ems, dt, 0, 24);
    norms.push_back(kt.at(0, 0, 0).fwd.norm());
    dt /= 2;
  }
  for (int i = 0; i + 1 < 4; ++i) {
    double order = std::log2(norms[i] / norms[i + 1]);
    CHECK(std::abs(order - 2.0) < 0.1);
  }
}

TEST_CASE("secular filter keeps only co-rotating pairings") {
  TwoCavityParams p;
  const double wc = p.omega_c;
  auto kern = correlation_kernel(p, two_tls(wc, wc), {1e-29, 1e-29}, wc, true,
                                 60.0 / (p.gamma_c() + p.gamma0()));
  // raising-then-lowering survives
  CHECK(std::abs(kern.eval(0, {1, 0}, 1, {0, 1}, 1e-13)) > 0.0);
  // anything else is dropped
  CHECK(std::abs(kern.eval(0, {0, 1}, 1, {1, 0}, 1e-13)) == 0.0);
  CHECK(std::abs(kern.eval(0, {1, 0}, 1, {1, 0}, 1e-13)) == 0.0);
  CHECK(std::abs(kern.eval(0, {0, 1}, 1, {0, 1}, 1e-13)) == 0.0);
}
