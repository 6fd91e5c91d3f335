#ifndef ETEMPO_BATH_GREEN_HPP
#define ETEMPO_BATH_GREEN_HPP

#include <Eigen/Dense>
#include <complex>

namespace etempo {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double eps0 = 8.8541878128e-12;    // F / m
inline constexpr double c_light = 299792458.0;      // m / s
}  // namespace constants

/// Side-coupled two-cavity waveguide section.  L is the cavity separation in
/// units of the cavity wavelength; V_eff in m^3; omega_c in rad/s.
struct TwoCavityParams {
  double eps_r = 12.0;
  double L = 2.0;
  double n_g = 10.0;
  double omega_c = 2.0 * M_PI * 200e12;
  double Q_c = 2000.0;
  double V_eff = 5e7 * 1e-27;
  double varphi = 0.8 * M_PI;
  double gamma0_frac = 0.01;

  // gamma_c adopted as omega_c / Q_c (decay-rate reading of the Q factor)
  double gamma_c() const { return omega_c / Q_c; }
  double gamma0() const { return gamma0_frac * gamma_c(); }
  double lambda_c() const { return 2.0 * M_PI * constants::c_light / omega_c; }

  void validate() const;
};

/// Projected photonic Green matrix of the coupled cavity pair at frequency
/// omega (rad/s): closed-form mode-expansion entries, dipoles not included.
Eigen::Matrix2cd green_matrix(const TwoCavityParams& p, double omega);

}  // namespace etempo

#endif
