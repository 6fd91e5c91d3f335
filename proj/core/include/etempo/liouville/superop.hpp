#ifndef ETEMPO_LIOUVILLE_SUPEROP_HPP
#define ETEMPO_LIOUVILLE_SUPEROP_HPP

#include <string>

#include "etempo/liouville/system.hpp"
#include "etempo/tensor/labeled_tensor.hpp"

namespace etempo {

// Liouville flattening convention: s = s_L * d + s_R, vec(rho)[s] = rho(sL,sR).

Vec vectorize(const Mat& rho);
Mat unvectorize(const Vec& v, std::size_t d);

/// A_L: vec(rho) -> vec(A rho)
Mat left_mult(const Mat& a);
/// A_R: vec(rho) -> vec(rho A)
Mat right_mult(const Mat& a);
/// A_- = A_L - A_R
Mat commutator_minus(const Mat& a);

/// Trace functional as a row vector over the Liouville index.
Vec trace_vector(std::size_t d);

/// Free system propagator over [t0, t0+dt] in the rotating frame:
/// generated by -i H_frame(t)_- plus any Lindblad dissipators.  The
/// time-dependent drive is handled by midpoint exponentiation, doubling the
/// substep count until converged to `tol` (max-abs entrywise).
Mat free_propagator(const SystemSpec& spec, double t0, double dt,
                    double tol = 1e-10);

/// Frame Hamiltonian at time t (diagonal part plus drive if active).
Mat frame_hamiltonian(const SystemSpec& spec, double t);

/// Liouvillian superoperator at time t (commutator plus dissipators).
Mat liouvillian(const SystemSpec& spec, double t);

/// Matrix elements of Ub * O * Ua as a labeled tensor with indices
/// (s_label = outgoing row, p_label = incoming column).  Passing identities
/// recovers O or U alone.
LabeledTensor row_operator(const Mat& op, const Mat& half_a, const Mat& half_b,
                           const std::string& s_label = "s",
                           const std::string& p_label = "p");

}  // namespace etempo

#endif
