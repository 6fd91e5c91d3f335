#include "etempo/liouville/superop.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace etempo {

Vec vectorize(const Mat& rho) {
  const std::size_t d = rho.rows();
  Vec v(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) v(i * d + j) = rho(i, j);
  return v;
}

Mat unvectorize(const Vec& v, std::size_t d) {
  Mat rho(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) rho(i, j) = v(i * d + j);
  return rho;
}

Mat left_mult(const Mat& a) {
  const std::size_t d = a.rows();
  Mat out = Mat::Zero(d * d, d * d);
  for (std::size_t pl = 0; pl < d; ++pl)
    for (std::size_t sl = 0; sl < d; ++sl)
      for (std::size_t c = 0; c < d; ++c)
        out(pl * d + c, sl * d + c) = a(pl, sl);
  return out;
}

Mat right_mult(const Mat& a) {
  const std::size_t d = a.rows();
  Mat out = Mat::Zero(d * d, d * d);
  for (std::size_t pr = 0; pr < d; ++pr)
    for (std::size_t sr = 0; sr < d; ++sr)
      for (std::size_t c = 0; c < d; ++c)
        out(c * d + pr, c * d + sr) = a(sr, pr);
  return out;
}

Mat commutator_minus(const Mat& a) { return left_mult(a) - right_mult(a); }

Vec trace_vector(std::size_t d) {
  Vec v = Vec::Zero(d * d);
  for (std::size_t i = 0; i < d; ++i) v(i * d + i) = 1.0;
  return v;
}

Mat frame_hamiltonian(const SystemSpec& spec, double t) {
  CompositeBasis basis(spec.emitters);
  const std::size_t d = basis.dim();
  Mat h = Mat::Zero(d, d);
  for (std::size_t s = 0; s < d; ++s)
    h(s, s) = basis.frame_energy(s, spec.rotating_frame);
  if (spec.drive) {
    const PulseSpec& p = *spec.drive;
    const double envelope =
        p.area / (p.sigma * std::sqrt(2.0 * M_PI)) *
        std::exp(-0.5 * std::pow((t - p.center) / p.sigma, 2.0));
    const double detune = p.carrier - spec.rotating_frame;
    const cplx amp = 0.5 * envelope *
                     std::exp(cplx(0, -1) * (detune * t + p.phase));
    for (std::size_t n = 0; n < spec.emitters.size(); ++n) {
      Mat raise = basis.transition(n, 1, 0);
      h += amp * raise + std::conj(amp) * raise.adjoint();
    }
  }
  return h;
}

Mat liouvillian(const SystemSpec& spec, double t) {
  Mat h = frame_hamiltonian(spec, t);
  Mat L = cplx(0, -1) * commutator_minus(h);
  for (const auto& term : spec.lindblad) {
    const Mat& c = term.op;
    Mat cdc = c.adjoint() * c;
    L += term.rate * (left_mult(c) * right_mult(c.adjoint()) -
                      0.5 * left_mult(cdc) - 0.5 * right_mult(cdc));
  }
  return L;
}

namespace {

Mat propagate_substeps(const SystemSpec& spec, double t0, double dt, int n) {
  const std::size_t d2 = spec.dim() * spec.dim();
  Mat u = Mat::Identity(d2, d2);
  const double h = dt / n;
  for (int k = 0; k < n; ++k) {
    Mat L = liouvillian(spec, t0 + (k + 0.5) * h);
    u = (L * h).exp() * u;
  }
  return u;
}

bool drive_active(const SystemSpec& spec, double t0, double dt) {
  if (!spec.drive || spec.drive->area == 0.0) return false;
  const PulseSpec& p = *spec.drive;
  // a pulse further than 8 sigma from the interval contributes nothing
  return t0 < p.center + 8 * p.sigma && t0 + dt > p.center - 8 * p.sigma;
}

}  // namespace

Mat free_propagator(const SystemSpec& spec, double t0, double dt, double tol) {
  if (dt <= 0) throw std::invalid_argument("free_propagator: dt must be > 0");
  if (!drive_active(spec, t0, dt)) {
    SystemSpec quiet = spec;
    quiet.drive.reset();
    Mat L = liouvillian(quiet, t0 + 0.5 * dt);
    return (L * dt).exp();
  }
  int n = 4;
  Mat u = propagate_substeps(spec, t0, dt, n);
  for (int iter = 0; iter < 16; ++iter) {
    n *= 2;
    Mat u2 = propagate_substeps(spec, t0, dt, n);
    double err = (u2 - u).cwiseAbs().maxCoeff();
    u = u2;
    if (err < tol) return u;
  }
  throw std::runtime_error("free_propagator: substep refinement stalled");
}

LabeledTensor row_operator(const Mat& op, const Mat& half_a, const Mat& half_b,
                           const std::string& s_label,
                           const std::string& p_label) {
  Mat m = half_b * op * half_a;
  const std::size_t n = m.rows();
  LabeledTensor t({s_label, p_label}, {n, static_cast<std::size_t>(m.cols())});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < static_cast<std::size_t>(m.cols()); ++j)
      t.at({i, j}) = m(i, j);
  return t;
}

}  // namespace etempo
