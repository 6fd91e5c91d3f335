#ifndef ETEMPO_BATH_KERNEL_HPP
#define ETEMPO_BATH_KERNEL_HPP

#include <functional>
#include <memory>
#include <vector>

#include "etempo/bath/green.hpp"
#include "etempo/liouville/system.hpp"
#include "etempo/tensor/labeled_tensor.hpp"

namespace etempo {

/// Emitter-local transition |row><col| (0-based levels).
struct Transition {
  std::size_t row, col;
};

/// Generalized bath correlation evaluator.  eval() returns the
/// operator-ordered pair correlator <B_{n,a}(tau) B_{m,b}(0)> / hbar^2,
/// demodulated by the rotating frame; the first argument is the operator at
/// the later absolute time when tau > 0.
class PairKernel {
 public:
  virtual ~PairKernel() = default;

  virtual std::size_t n_emitters() const = 0;
  virtual double frame() const = 0;
  /// Dipole-free correlation integral for the emitter pair (n, m).
  virtual cplx base(std::size_t n, std::size_t m, double tau) const = 0;
  /// Coupling amplitude of transition a on emitter n (0 when uncoupled).
  virtual cplx amplitude(std::size_t n, Transition a) const = 0;
  /// Retains only co-rotating pairings when true: first operator raising,
  /// second lowering.
  virtual bool secular() const = 0;
  /// True when transition a increases emitter n's lab-frame energy.
  virtual bool raising(std::size_t n, Transition a) const = 0;
  /// Conservative bound on the kernel support; |base| is negligible beyond.
  virtual double memory_extent() const = 0;

  cplx eval(std::size_t n, Transition a, std::size_t m, Transition b,
            double tau) const;
};

/// Sampled kernel over the two-cavity waveguide bath.  The primary evaluator
/// integrates Im G over a fixed Gauss-Legendre node set (machine-accurate at
/// any tau); a uniform tau-grid filled by FFT is kept for export and
/// spectrum round-trip diagnostics.
class GeneralizedKernel : public PairKernel {
 public:
  std::size_t n_emitters() const override { return energies_.size(); }
  double frame() const override { return frame_; }
  cplx base(std::size_t n, std::size_t m, double tau) const override;
  cplx amplitude(std::size_t n, Transition a) const override;
  bool secular() const override { return secular_; }
  bool raising(std::size_t n, Transition a) const override;
  double memory_extent() const override { return memory_extent_; }

  /// Spectral density J_nm(omega) = d_n d_m Im G_nm / (hbar pi eps0),
  /// apodized by the band window (1/s^2 per rad/s).
  cplx spectral_density(std::size_t n, std::size_t m, double omega) const;
  const std::vector<double>& band_nodes() const { return nodes_; }
  double band_lo() const { return band_lo_; }
  double band_hi() const { return band_hi_; }
  /// Cosine-squared roll-off over the outer fifth of the band; the windowed
  /// density is the model consumed by every evaluation path.
  double band_window(double omega) const;

  struct Grid {
    double step = 0;                 // s
    std::vector<double> tau;         // uniform, tau >= 0
    std::vector<std::vector<std::vector<cplx>>> base;  // [n][m][k]
  };
  /// Uniform-grid samples of base() computed by FFT over the band.
  const Grid& sample_grid() const { return grid_; }

  friend GeneralizedKernel correlation_kernel(
      const TwoCavityParams& p, const std::vector<EmitterSpec>& emitters,
      const std::vector<double>& dipole_scalars, double frame, bool secular,
      double tau_extent, double band_halfwidth, std::size_t n_nodes);
  friend GeneralizedKernel lorentzian_kernel(double omega0, double kappa,
                                             double g,
                                             const std::vector<EmitterSpec>&,
                                             double frame, bool secular,
                                             double tau_extent);

 private:
  double frame_ = 0;
  bool secular_ = true;
  bool windowed_ = false;
  double memory_extent_ = 0;
  double band_lo_ = 0, band_hi_ = 0;
  std::vector<std::vector<double>> energies_;  // lab level ladders
  std::vector<std::vector<cplx>> dipoles_;     // adjacent-transition scalars
  std::vector<double> nodes_, weights_;
  std::vector<std::vector<std::vector<double>>> j_nodes_;  // [n][m][node]
  // dipole-free spectral density at arbitrary omega
  std::function<double(std::size_t, std::size_t, double)> j_uniform_;
  // optional closed-form base (single Lorentzian bath)
  std::function<cplx(std::size_t, std::size_t, double)> analytic_;
  Grid grid_;

  void fill_grid(double tau_extent);
  void check_tail() const;
};

/// Builds the two-cavity kernel: Im G integrated over
/// [omega_c - W, omega_c + W], demodulated at `frame`.  Errors when the
/// kernel has not decayed below 1e-6 of its peak at tau_extent.
GeneralizedKernel correlation_kernel(
    const TwoCavityParams& p, const std::vector<EmitterSpec>& emitters,
    const std::vector<double>& dipole_scalars, double frame, bool secular,
    double tau_extent, double band_halfwidth = -1.0,
    std::size_t n_nodes = 3000);

/// Single-mode Lorentzian bath with closed-form kernel
/// C(tau) = g^2 exp(-i(omega0-frame) tau - kappa |tau| / 2).
GeneralizedKernel lorentzian_kernel(double omega0, double kappa, double g,
                                    const std::vector<EmitterSpec>& emitters,
                                    double frame, bool secular,
                                    double tau_extent);

/// Test/bench kernel defined by an arbitrary base function.
class AnalyticPairKernel : public PairKernel {
 public:
  AnalyticPairKernel(std::size_t n_emitters,
                     std::function<cplx(std::size_t, std::size_t, double)> f,
                     std::vector<std::vector<double>> energies,
                     std::vector<std::vector<cplx>> dipoles, double frame,
                     bool secular, double extent)
      : n_(n_emitters), f_(std::move(f)), energies_(std::move(energies)),
        dipoles_(std::move(dipoles)), frame_(frame), secular_(secular),
        extent_(extent) {}

  std::size_t n_emitters() const override { return n_; }
  double frame() const override { return frame_; }
  cplx base(std::size_t n, std::size_t m, double tau) const override {
    return f_(n, m, tau);
  }
  cplx amplitude(std::size_t n, Transition a) const override;
  bool secular() const override { return secular_; }
  bool raising(std::size_t n, Transition a) const override {
    return energies_[n][a.row] > energies_[n][a.col];
  }
  double memory_extent() const override { return extent_; }

 private:
  std::size_t n_;
  std::function<cplx(std::size_t, std::size_t, double)> f_;
  std::vector<std::vector<double>> energies_;
  std::vector<std::vector<cplx>> dipoles_;
  double frame_;
  bool secular_;
  double extent_;
};

}  // namespace etempo

#endif
