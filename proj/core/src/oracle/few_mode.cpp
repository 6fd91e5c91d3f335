#include "etempo/oracle/few_mode.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <map>
#include <unsupported/Eigen/MatrixFunctions>
#include <stdexcept>

#include "etempo/bath/quadrature.hpp"
#include "etempo/liouville/superop.hpp"

namespace etempo {

namespace {

// basis of (system state, mode occupations) with total quanta <= cap
struct FockBasis {
  std::vector<std::vector<std::size_t>> occ;  // per state: [sys, n_1..n_K]
  std::map<std::vector<std::size_t>, std::size_t> index;
  std::size_t dim() const { return occ.size(); }
};

FockBasis build_basis(const CompositeBasis& cb, std::size_t n_modes,
                      std::size_t cap) {
  FockBasis b;
  std::vector<std::size_t> cur(n_modes + 1, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t mode,
                                                          std::size_t used) {
    if (mode == n_modes + 1) {
      b.index[cur] = b.occ.size();
      b.occ.push_back(cur);
      return;
    }
    if (mode == 0) {
      for (std::size_t s = 0; s < cb.dim(); ++s) {
        std::size_t q = cb.excitation(s);
        if (q > cap) continue;
        cur[0] = s;
        rec(1, q);
      }
      cur[0] = 0;
      return;
    }
    for (std::size_t n = 0; used + n <= cap; ++n) {
      cur[mode] = n;
      rec(mode + 1, used + n);
    }
    cur[mode] = 0;
  };
  rec(0, 0);
  return b;
}

Mat build_hamiltonian(const SystemSpec& sys, const FewModeBath& bath,
                      const CompositeBasis& cb, const FockBasis& basis) {
  const std::size_t D = basis.dim();
  const double frame = sys.rotating_frame;
  Mat h = Mat::Zero(D, D);
  for (std::size_t a = 0; a < D; ++a) {
    const auto& st = basis.occ[a];
    double e = cb.frame_energy(st[0], frame);
    for (std::size_t k = 0; k < bath.modes.size(); ++k)
      e += (bath.modes[k].omega - frame) * st[k + 1];
    h(a, a) = e;
  }
  // excitation-conserving coupling: sigma^+_n a_k + h.c. on the 0<->1
  // transition of each emitter
  for (std::size_t k = 0; k < bath.modes.size(); ++k)
    for (std::size_t n = 0; n < sys.emitters.size(); ++n) {
      const cplx g = bath.modes[k].coupling[n];
      if (g == cplx(0.0)) continue;
      for (std::size_t a = 0; a < D; ++a) {
        const auto& st = basis.occ[a];
        if (st[k + 1] == 0) continue;
        if (cb.level_of(st[0], n) != 0) continue;
        // absorb a photon: raise emitter n, lower mode k
        std::vector<std::size_t> lv;
        for (std::size_t q = 0; q < sys.emitters.size(); ++q)
          lv.push_back(cb.level_of(st[0], q));
        lv[n] = 1;
        auto tgt = st;
        tgt[0] = cb.state_from(lv);
        tgt[k + 1] -= 1;
        auto it = basis.index.find(tgt);
        if (it == basis.index.end()) continue;
        const double amp = std::sqrt(static_cast<double>(st[k + 1]));
        h(it->second, a) += g * amp;
        h(a, it->second) += std::conj(g) * amp;
      }
    }
  return h;
}

bool lossy(const FewModeBath& bath) {
  for (const auto& m : bath.modes)
    if (m.kappa > 0) return true;
  return false;
}

// full-space Liouvillian with photon loss on each lossy mode
Mat liouville_generator(const SystemSpec& sys, const FewModeBath& bath,
                        const CompositeBasis& cb, const FockBasis& basis) {
  const std::size_t D = basis.dim();
  Mat h = build_hamiltonian(sys, bath, cb, basis);
  Mat L = cplx(0, -1) * (left_mult(h) - right_mult(h));
  for (std::size_t k = 0; k < bath.modes.size(); ++k) {
    if (bath.modes[k].kappa <= 0) continue;
    Mat a = Mat::Zero(D, D);
    for (std::size_t x = 0; x < D; ++x) {
      auto st = basis.occ[x];
      if (st[k + 1] == 0) continue;
      const double amp = std::sqrt(static_cast<double>(st[k + 1]));
      st[k + 1] -= 1;
      auto it = basis.index.find(st);
      if (it == basis.index.end()) continue;
      a(it->second, x) = amp;
    }
    Mat ada = a.adjoint() * a;
    L += bath.modes[k].kappa *
         (left_mult(a) * right_mult(a.adjoint()) - 0.5 * left_mult(ada) -
          0.5 * right_mult(ada));
  }
  return L;
}

Mat reduce_density(const FockBasis& basis, const CompositeBasis& cb,
                   const Mat& rho_full) {
  Mat rho = Mat::Zero(cb.dim(), cb.dim());
  const std::size_t D = basis.dim();
  for (std::size_t x = 0; x < D; ++x)
    for (std::size_t y = 0; y < D; ++y) {
      bool same_modes = true;
      for (std::size_t k = 1; k < basis.occ[x].size(); ++k)
        if (basis.occ[x][k] != basis.occ[y][k]) same_modes = false;
      if (same_modes)
        rho(basis.occ[x][0], basis.occ[y][0]) += rho_full(x, y);
    }
  return rho;
}

Vec vacuum_embed(const FockBasis& basis, const Vec& psi0_system) {
  Vec psi0 = Vec::Zero(basis.dim());
  for (std::size_t x = 0; x < basis.dim(); ++x) {
    const auto& st = basis.occ[x];
    bool vacuum = true;
    for (std::size_t k = 1; k < st.size(); ++k)
      if (st[k] != 0) vacuum = false;
    if (vacuum) psi0(x) = psi0_system(st[0]);
  }
  return psi0;
}

}  // namespace

FewModeBath lorentzian_pseudo_mode(double omega0, double kappa, double g,
                                   std::size_t n_emitters,
                                   std::size_t coupled_emitter) {
  FewModeBath bath;
  FewModeBath::Mode m;
  m.omega = omega0;
  m.kappa = kappa;
  m.coupling.assign(n_emitters, cplx(0.0));
  m.coupling[coupled_emitter] = g;
  bath.modes.push_back(std::move(m));
  return bath;
}

std::vector<Mat> few_mode_exact(const SystemSpec& sys, const FewModeBath& bath,
                                const Vec& psi0_system,
                                const std::vector<double>& t_grid) {
  CompositeBasis cb(sys.emitters);
  FockBasis basis = build_basis(cb, bath.modes.size(), bath.excitation_cap);
  const std::size_t D = basis.dim();
  if (D > 10000) throw std::invalid_argument("few-mode basis too large");

  if (lossy(bath)) {
    if (D > 80) throw std::invalid_argument("lossy few-mode space too large");
    Mat L = liouville_generator(sys, bath, cb, basis);
    Vec psi0 = vacuum_embed(basis, psi0_system);
    Mat rho_full = psi0 * psi0.adjoint();
    Vec v = vectorize(rho_full);
    std::vector<Mat> out;
    double t_prev = 0.0;
    Mat step;
    double step_dt = -1;
    bool first = true;
    for (double t : t_grid) {
      if (first && t == 0.0) {
        out.push_back(reduce_density(basis, cb, unvectorize(v, D)));
        first = false;
        t_prev = t;
        continue;
      }
      first = false;
      double h = t - t_prev;
      if (h > 0) {
        if (std::abs(h - step_dt) > 1e-15 * std::max(1.0, std::abs(h))) {
          step = (L * h).exp();
          step_dt = h;
        }
        v = step * v;
      }
      t_prev = t;
      out.push_back(reduce_density(basis, cb, unvectorize(v, D)));
    }
    return out;
  }

  Mat h = build_hamiltonian(sys, bath, cb, basis);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Vec psi0 = vacuum_embed(basis, psi0_system);

  std::vector<Mat> out;
  const std::size_t d = cb.dim();
  Vec c0 = es.eigenvectors().adjoint() * psi0;
  for (double t : t_grid) {
    Vec c = c0;
    for (std::size_t i = 0; i < D; ++i)
      c(i) *= std::exp(cplx(0, -es.eigenvalues()(i) * t));
    Vec psi = es.eigenvectors() * c;
    Mat rho = Mat::Zero(d, d);
    for (std::size_t a = 0; a < D; ++a)
      for (std::size_t b = 0; b < D; ++b) {
        bool same_modes = true;
        for (std::size_t k = 1; k < basis.occ[a].size(); ++k)
          if (basis.occ[a][k] != basis.occ[b][k]) same_modes = false;
        if (!same_modes) continue;
        rho(basis.occ[a][0], basis.occ[b][0]) += psi(a) * std::conj(psi(b));
      }
    out.push_back(rho);
  }
  return out;
}

std::vector<cplx> few_mode_two_time(const SystemSpec& sys,
                                    const FewModeBath& bath,
                                    const Vec& psi0_system, const Mat& a,
                                    const Mat& b,
                                    const std::vector<double>& t_grid) {
  CompositeBasis cb(sys.emitters);
  FockBasis basis = build_basis(cb, bath.modes.size(), bath.excitation_cap);
  const std::size_t D = basis.dim();
  if (D > 10000) throw std::invalid_argument("few-mode basis too large");

  auto lift_system = [&](const Mat& op) {
    Mat full = Mat::Zero(D, D);
    for (std::size_t x = 0; x < D; ++x)
      for (std::size_t y = 0; y < D; ++y) {
        bool same_modes = true;
        for (std::size_t k = 1; k < basis.occ[x].size(); ++k)
          if (basis.occ[x][k] != basis.occ[y][k]) same_modes = false;
        if (same_modes) full(x, y) = op(basis.occ[x][0], basis.occ[y][0]);
      }
    return full;
  };
  Mat A = lift_system(a), B = lift_system(b);
  Vec psi0 = vacuum_embed(basis, psi0_system);

  if (lossy(bath)) {
    // quantum regression: <A(t) B(0)> = tr[A V(t)(B rho0)]
    if (D > 80) throw std::invalid_argument("lossy few-mode space too large");
    Mat L = liouville_generator(sys, bath, cb, basis);
    Mat rho_full = psi0 * psi0.adjoint();
    Vec v = vectorize(B * rho_full);
    std::vector<cplx> out;
    double t_prev = 0.0;
    Mat step;
    double step_dt = -1;
    bool first = true;
    for (double t : t_grid) {
      double h = t - t_prev;
      if (!(first && t == 0.0) && h > 0) {
        if (std::abs(h - step_dt) > 1e-15 * std::max(1.0, std::abs(h))) {
          step = (L * h).exp();
          step_dt = h;
        }
        v = step * v;
      }
      first = false;
      t_prev = t;
      Mat m = unvectorize(v, D);
      out.push_back((A * m).trace());
    }
    return out;
  }

  Mat hham = build_hamiltonian(sys, bath, cb, basis);
  Eigen::SelfAdjointEigenSolver<Mat> es(hham);
  Vec phi = B * psi0;  // B acts at t = 0
  Vec c_phi = es.eigenvectors().adjoint() * phi;
  Vec c_psi = es.eigenvectors().adjoint() * psi0;
  std::vector<cplx> out;
  for (double t : t_grid) {
    Vec cp = c_phi, cs = c_psi;
    for (std::size_t i = 0; i < D; ++i) {
      cplx ph = std::exp(cplx(0, -es.eigenvalues()(i) * t));
      cp(i) *= ph;
      cs(i) *= ph;
    }
    Vec phit = es.eigenvectors() * cp;
    Vec psit = es.eigenvectors() * cs;
    out.push_back(psit.dot(A * phit));  // <psi(t)| A |phi(t)>
  }
  return out;
}

DiscretizedBath discretize_bath(const GeneralizedKernel& kernel,
                                std::size_t n_nodes, double t_window) {
  const std::size_t n_em = kernel.n_emitters();
  // locate the dominant spectral peak and its half width, then place the
  // quadrature nodes by Lorentzian mass (arctan substitution) so narrow
  // densities are resolved
  const double lo = kernel.band_lo(), hi = kernel.band_hi();
  double w_peak = 0.5 * (lo + hi), j_peak = 0;
  const int scan = 4000;
  for (int i = 0; i <= scan; ++i) {
    double wq = lo + (hi - lo) * i / scan;
    double j = std::abs(kernel.spectral_density(0, 0, wq).real());
    if (j > j_peak) {
      j_peak = j;
      w_peak = wq;
    }
  }
  double hwhm = (hi - lo) / 10.0;
  for (int i = 0; i <= scan; ++i) {
    double wq = w_peak + (hi - w_peak) * i / scan;
    if (std::abs(kernel.spectral_density(0, 0, wq).real()) <
        0.5 * j_peak) {
      hwhm = std::max(wq - w_peak, (hi - lo) * 1e-5);
      break;
    }
  }
  const double u_lo = std::atan((lo - w_peak) / hwhm);
  const double u_hi = std::atan((hi - w_peak) / hwhm);
  std::vector<double> x, w;
  gauss_legendre(n_nodes, u_lo, u_hi, x, w);
  DiscretizedBath out;
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const double omega = w_peak + hwhm * std::tan(x[k]);
    const double jac = hwhm / std::pow(std::cos(x[k]), 2.0);
    Eigen::MatrixXd j(n_em, n_em);
    for (std::size_t n = 0; n < n_em; ++n)
      for (std::size_t m = 0; m < n_em; ++m)
        j(n, m) = kernel.spectral_density(n, m, omega).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    for (Eigen::Index v = 0; v < es.eigenvalues().size(); ++v) {
      double lam = es.eigenvalues()(v);
      if (lam <= 0) continue;
      FewModeBath::Mode mode;
      mode.omega = omega;
      for (std::size_t n = 0; n < n_em; ++n)
        mode.coupling.push_back(std::sqrt(lam * w[k] * jac) *
                                es.eigenvectors()(n, v));
      out.bath.modes.push_back(std::move(mode));
    }
  }
  // reconstruction check against the kernel over the simulated window
  double peak = 0, worst = 0;
  for (int i = 0; i <= 60; ++i) {
    double tau = t_window * i / 60.0;
    cplx ref = kernel.eval(0, {1, 0}, 0, {0, 1}, tau);
    cplx rec = 0;
    for (const auto& m : out.bath.modes)
      rec += m.coupling[0] * std::conj(m.coupling[0]) *
             std::exp(cplx(0, -(m.omega - kernel.frame()) * tau));
    peak = std::max(peak, std::abs(ref));
    worst = std::max(worst, std::abs(rec - ref));
  }
  out.reconstruction_error = peak > 0 ? worst / peak : 0.0;
  return out;
}

double weak_coupling_rate(const GeneralizedKernel& kernel, std::size_t n,
                          double omega) {
  return 2.0 * M_PI * kernel.spectral_density(n, n, omega).real();
}

}  // namespace etempo
