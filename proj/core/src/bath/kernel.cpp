#include "etempo/bath/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fftw3.h>

#include "etempo/bath/quadrature.hpp"

namespace etempo {

void gauss_legendre(std::size_t n, double a, double b,
                    std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      double dp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double dp = n * (x * p0 - p1) / (x * x - 1.0);
    nodes[i] = mid - half * x;
    nodes[n - 1 - i] = mid + half * x;
    weights[i] = weights[n - 1 - i] = 2.0 * half / ((1.0 - x * x) * dp * dp);
  }
}

cplx PairKernel::eval(std::size_t n, Transition a, std::size_t m, Transition b,
                      double tau) const {
  if (secular() && !(raising(n, a) && !raising(m, b))) return 0.0;
  cplx amp = amplitude(n, a) * amplitude(m, b);
  if (amp == cplx(0.0)) return 0.0;
  return amp * base(n, m, tau);
}

cplx GeneralizedKernel::base(std::size_t n, std::size_t m, double tau) const {
  if (analytic_) return analytic_(n, m, tau);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    double w = nodes_[i] - frame_;
    acc += weights_[i] * j_nodes_[n][m][i] *
           std::exp(cplx(0.0, -w * tau));
  }
  return acc;
}

cplx GeneralizedKernel::amplitude(std::size_t n, Transition a) const {
  if (a.row == a.col) return 0.0;
  if (a.row == a.col + 1) return dipoles_[n][a.col];
  if (a.col == a.row + 1) return std::conj(dipoles_[n][a.row]);
  return 0.0;  // beyond-adjacent transitions carry no dipole here
}

bool GeneralizedKernel::raising(std::size_t n, Transition a) const {
  return energies_[n][a.row] > energies_[n][a.col];
}

cplx GeneralizedKernel::spectral_density(std::size_t n, std::size_t m,
                                         double omega) const {
  if (!j_uniform_)
    throw std::logic_error("spectral_density unavailable for this kernel");
  return amplitude(n, {1, 0}) * amplitude(m, {1, 0}) * j_uniform_(n, m, omega);
}

double GeneralizedKernel::band_window(double omega) const {
  if (!windowed_) return 1.0;
  const double W = 0.5 * (band_hi_ - band_lo_);
  const double mid = 0.5 * (band_hi_ + band_lo_);
  const double x = std::abs(omega - mid) / W;
  if (x >= 1.0) return 0.0;
  if (x <= 0.8) return 1.0;
  const double u = (x - 0.8) / 0.2;
  const double c = std::cos(0.5 * M_PI * u);
  return c * c;
}

void GeneralizedKernel::check_tail() const {
  for (std::size_t n = 0; n < n_emitters(); ++n)
    for (std::size_t m = 0; m < n_emitters(); ++m) {
      double peak = 0;
      const auto& s = grid_.base[n][m];
      for (const auto& v : s) peak = std::max(peak, std::abs(v));
      if (peak == 0) continue;
      double tail = std::abs(s.back());
      if (tail > 1e-6 * peak)
        throw std::runtime_error(
            "kernel grid extent too short: tail above 1e-6 of peak");
    }
}

void GeneralizedKernel::fill_grid(double tau_extent) {
  // FFT of the band-limited spectral density onto a uniform tau grid.
  // Simpson end corrections keep the quadrature error at O(h^4).
  const std::size_t n_em = n_emitters();
  const double B = band_hi_ - band_lo_;
  const std::size_t n_w = 16384;
  // pad the spectrum so the tau resolution beats the kernel timescale
  const std::size_t pad_factor = 64;
  const std::size_t N = n_w * pad_factor;
  const double dw = B / static_cast<double>(n_w - 1);
  const double dt = 2.0 * M_PI / (dw * static_cast<double>(N));

  grid_.step = dt;
  grid_.tau.clear();
  std::size_t keep = std::min<std::size_t>(
      N / 2, static_cast<std::size_t>(tau_extent / dt) + 1);
  for (std::size_t k = 0; k < keep; ++k) grid_.tau.push_back(k * dt);
  grid_.base.assign(n_em,
                    std::vector<std::vector<cplx>>(n_em,
                                                   std::vector<cplx>(keep)));

  std::vector<cplx> in(N), out(N);
  fftw_plan plan = fftw_plan_dft_1d(
      static_cast<int>(N), reinterpret_cast<fftw_complex*>(in.data()),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
      FFTW_ESTIMATE);
  // resample J onto the uniform grid from the GL nodes via local projection:
  // evaluate the stored Lorentzian-like density directly when available.
  for (std::size_t n = 0; n < n_em; ++n)
    for (std::size_t m = 0; m < n_em; ++m) {
      std::fill(in.begin(), in.end(), cplx(0.0));
      for (std::size_t j = 0; j < n_w; ++j) {
        double w = band_lo_ + j * dw;
        double simpson = (j == 0 || j + 1 == n_w) ? 1.0
                         : (j % 2 == 1)           ? 4.0
                                                  : 2.0;
        in[j] = j_uniform_(n, m, w) * simpson / 3.0;
      }
      fftw_execute(plan);
      // C(tau_k) = dw * sum_j J(w_j) e^{-i w_j tau_k} e^{+i frame tau_k}
      for (std::size_t k = 0; k < keep; ++k) {
        cplx phase = std::exp(cplx(0.0, (frame_ - band_lo_) * grid_.tau[k]));
        grid_.base[n][m][k] = dw * phase * out[k];
      }
    }
  fftw_destroy_plan(plan);
}

namespace {}  // namespace

GeneralizedKernel correlation_kernel(const TwoCavityParams& p,
                                     const std::vector<EmitterSpec>& emitters,
                                     const std::vector<double>& dipole_scalars,
                                     double frame, bool secular,
                                     double tau_extent, double band_halfwidth,
                                     std::size_t n_nodes) {
  p.validate();
  if (emitters.size() != dipole_scalars.size() || emitters.size() != 2)
    throw std::invalid_argument("two-cavity kernel expects two emitters");
  GeneralizedKernel k;
  k.frame_ = frame;
  k.secular_ = secular;
  for (const auto& e : emitters) {
    k.energies_.push_back(e.energies);
    std::vector<cplx> dips;
    for (std::size_t t = 0; t + 1 < e.levels(); ++t) dips.push_back(1.0);
    k.dipoles_.push_back(dips);
  }
  // dipole scalar folds into the per-emitter amplitude (transition 0<->1)
  for (std::size_t n = 0; n < 2; ++n) k.dipoles_[n][0] = dipole_scalars[n];

  const double W = band_halfwidth > 0
                       ? band_halfwidth
                       : 40.0 * (p.gamma_c() + p.gamma0());
  k.band_lo_ = std::max(p.omega_c - W, 1e-6 * p.omega_c);
  k.band_hi_ = p.omega_c + W;
  k.windowed_ = true;
  gauss_legendre(n_nodes, k.band_lo_, k.band_hi_, k.nodes_, k.weights_);
  const double pref = 1.0 / (constants::hbar * M_PI * constants::eps0);
  k.j_nodes_.assign(2, std::vector<std::vector<double>>(
                           2, std::vector<double>(n_nodes)));
  for (std::size_t i = 0; i < n_nodes; ++i) {
    Eigen::Matrix2cd g = green_matrix(p, k.nodes_[i]);
    const double win = k.band_window(k.nodes_[i]);
    for (std::size_t n = 0; n < 2; ++n)
      for (std::size_t m = 0; m < 2; ++m)
        k.j_nodes_[n][m][i] = pref * win * g(n, m).imag();
  }
  const double wlo = k.band_lo_, whi = k.band_hi_;
  k.j_uniform_ = [p, pref, wlo, whi](std::size_t n, std::size_t m,
                                     double w) -> double {
    Eigen::Matrix2cd g = green_matrix(p, w);
    const double half = 0.5 * (whi - wlo), mid = 0.5 * (whi + wlo);
    const double x = std::abs(w - mid) / half;
    double win = 0.0;
    if (x < 1.0)
      win = x <= 0.8 ? 1.0
                     : std::pow(std::cos(0.5 * M_PI * (x - 0.8) / 0.2), 2);
    return pref * win * g(n, m).imag();
  };
  k.memory_extent_ = tau_extent;
  k.fill_grid(tau_extent);
  k.check_tail();
  return k;
}

GeneralizedKernel lorentzian_kernel(double omega0, double kappa, double g,
                                    const std::vector<EmitterSpec>& emitters,
                                    double frame, bool secular,
                                    double tau_extent) {
  GeneralizedKernel k;
  k.frame_ = frame;
  k.secular_ = secular;
  for (const auto& e : emitters) {
    k.energies_.push_back(e.energies);
    std::vector<cplx> dips;
    for (std::size_t t = 0; t + 1 < e.levels(); ++t) dips.push_back(1.0);
    k.dipoles_.push_back(dips);
  }
  const double g2 = g * g;
  k.analytic_ = [omega0, kappa, g2, frame](std::size_t, std::size_t,
                                           double tau) -> cplx {
    return g2 * std::exp(cplx(0.0, -(omega0 - frame) * tau) -
                         0.5 * kappa * std::abs(tau));
  };
  k.j_uniform_ = [omega0, kappa, g2](std::size_t, std::size_t,
                                     double w) -> double {
    double half = 0.5 * kappa;
    return g2 * (half / M_PI) / ((w - omega0) * (w - omega0) + half * half);
  };
  k.band_lo_ = omega0 - 40 * kappa;
  k.band_hi_ = omega0 + 40 * kappa;
  k.memory_extent_ = tau_extent;
  // uniform grid directly from the closed form
  const std::size_t keep = 4096;
  k.grid_.step = tau_extent / (keep - 1);
  k.grid_.tau.resize(keep);
  std::size_t n_em = emitters.size();
  k.grid_.base.assign(
      n_em, std::vector<std::vector<cplx>>(n_em, std::vector<cplx>(keep)));
  for (std::size_t i = 0; i < keep; ++i) {
    k.grid_.tau[i] = i * k.grid_.step;
    for (std::size_t n = 0; n < n_em; ++n)
      for (std::size_t m = 0; m < n_em; ++m)
        k.grid_.base[n][m][i] = k.analytic_(n, m, k.grid_.tau[i]);
  }
  k.check_tail();
  return k;
}

cplx AnalyticPairKernel::amplitude(std::size_t n, Transition a) const {
  if (a.row == a.col) return 0.0;
  if (a.row == a.col + 1) return dipoles_[n][a.col];
  if (a.col == a.row + 1) return std::conj(dipoles_[n][a.row]);
  return 0.0;
}

}  // namespace etempo
