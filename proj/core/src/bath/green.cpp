#include "etempo/bath/green.hpp"

#include <stdexcept>

namespace etempo {

void TwoCavityParams::validate() const {
  if (eps_r <= 0 || L <= 0 || n_g <= 0 || omega_c <= 0 || Q_c <= 0 ||
      V_eff <= 0 || gamma0_frac < 0)
    throw std::invalid_argument("two-cavity parameters must be positive");
}

Eigen::Matrix2cd green_matrix(const TwoCavityParams& p, double omega) {
  if (omega <= 0) throw std::invalid_argument("green_matrix: omega must be > 0");
  using std::complex;
  const complex<double> I(0.0, 1.0);
  const double wc2 = p.omega_c * p.omega_c;
  const double w2 = omega * omega;
  const double gc = p.gamma_c();
  const double g0 = p.gamma0();
  const double E = 1.0 / (p.eps_r * p.V_eff);

  // round trip phase: 2*phi = 2 k_B L + varphi, k_B = omega n_g / c
  const double kB = omega * p.n_g / constants::c_light;
  const double L_m = p.L * p.lambda_c();
  const double two_phi = 2.0 * kB * L_m + p.varphi;
  const complex<double> e2ip = std::exp(I * two_phi);
  const complex<double> eip = std::exp(I * 0.5 * two_phi);

  // single-cavity reflection response, identical cavities
  const complex<double> R =
      I * omega * gc / (wc2 - w2 - I * omega * (gc + g0));

  const complex<double> denom = wc2 - w2 - I * omega * gc * (1.0 + e2ip * R) -
                                I * omega * g0;

  Eigen::Matrix2cd G;
  G(0, 0) = w2 * E * E / denom;
  G(1, 1) = w2 * E * E / denom;
  G(0, 1) = w2 * R * eip * E * E / denom;
  G(1, 0) = w2 * R * eip * E * E / denom;
  return G;
}

}  // namespace etempo
