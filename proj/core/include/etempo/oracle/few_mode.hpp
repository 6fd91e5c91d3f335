#ifndef ETEMPO_ORACLE_FEW_MODE_HPP
#define ETEMPO_ORACLE_FEW_MODE_HPP

#include <vector>

#include "etempo/bath/kernel.hpp"
#include "etempo/engine/request.hpp"

namespace etempo {

/// Discrete surrogate bath: each mode carries an angular frequency and one
/// coupling amplitude per emitter (excitation-conserving coupling).
struct FewModeBath {
  struct Mode {
    double omega;                 // rad/s, lab frame
    std::vector<cplx> coupling;   // per emitter, rad/s
    double kappa = 0.0;           // photon loss rate; 0 keeps the mode unitary
  };
  std::vector<Mode> modes;
  std::size_t excitation_cap = 2;
};

/// Single lossy pseudo-mode reproducing the Lorentzian kernel
/// g^2 exp(-i omega0 tau - kappa |tau| / 2) exactly.
FewModeBath lorentzian_pseudo_mode(double omega0, double kappa, double g,
                                   std::size_t n_emitters,
                                   std::size_t coupled_emitter = 0);

/// Exact evolution of system (x) truncated modes from a product initial
/// state; returns the reduced system density matrix on the time grid.
/// psi0_system: amplitudes over composite system states (modes in vacuum).
std::vector<Mat> few_mode_exact(const SystemSpec& sys, const FewModeBath& bath,
                                const Vec& psi0_system,
                                const std::vector<double>& t_grid);

/// Two-time correlator tr(A e^{-iHt} B |psi0><psi0| e^{iHt}) for pure
/// initial states, with A and B system Hilbert operators.
std::vector<cplx> few_mode_two_time(const SystemSpec& sys,
                                    const FewModeBath& bath,
                                    const Vec& psi0_system, const Mat& a,
                                    const Mat& b,
                                    const std::vector<double>& t_grid);

struct DiscretizedBath {
  FewModeBath bath;
  double reconstruction_error = 0;  // max relative kernel mismatch
};

/// Quadrature discretization of the kernel's spectral density into n_nodes
/// frequencies; the reconstruction residual over [0, t_window] is checked
/// against the kernel and reported.
DiscretizedBath discretize_bath(const GeneralizedKernel& kernel,
                                std::size_t n_nodes, double t_window);

/// Golden-rule decay rate 2 pi J(omega) of emitter n's 0<->1 transition.
double weak_coupling_rate(const GeneralizedKernel& kernel, std::size_t n,
                          double omega);

}  // namespace etempo

#endif
