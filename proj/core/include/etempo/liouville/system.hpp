#ifndef ETEMPO_LIOUVILLE_SYSTEM_HPP
#define ETEMPO_LIOUVILLE_SYSTEM_HPP

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <vector>

namespace etempo {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Vec3 = std::array<std::complex<double>, 3>;

/// Gaussian drive pulse; area is the resonant rotation angle accumulated by
/// the full envelope, sigma the Gaussian width in seconds.
struct PulseSpec {
  double center = 0.0;      // s
  double sigma = 1e-15;     // s
  double area = 0.0;        // rad
  double carrier = 0.0;     // rad/s (lab frame)
  double phase = 0.0;       // rad
};

/// One emitter: ladder of level energies (rad/s, lab frame) and the dipole
/// vectors of its transitions.  dipoles[k] couples levels (k, k+1); the
/// Hermitian partner is implied.
struct EmitterSpec {
  std::vector<double> energies;
  std::vector<Vec3> dipoles;
  std::size_t levels() const { return energies.size(); }
};

struct LindbladTerm {
  Mat op;       // collapse operator in the composite basis
  double rate;  // >= 0
};

struct SystemSpec {
  std::vector<EmitterSpec> emitters;
  std::optional<PulseSpec> drive;
  std::vector<LindbladTerm> lindblad;
  double rotating_frame = 0.0;  // rad/s; kernel phases share this convention

  std::size_t dim() const;  // composite Hilbert dimension
  void validate() const;
};

/// Index bookkeeping for the composite emitter basis (row-major over
/// emitters, emitter 0 slowest).
class CompositeBasis {
 public:
  explicit CompositeBasis(const std::vector<EmitterSpec>& emitters);

  std::size_t dim() const { return dim_; }
  std::size_t n_emitters() const { return levels_.size(); }
  std::size_t level_of(std::size_t state, std::size_t emitter) const;
  std::size_t state_from(const std::vector<std::size_t>& levels) const;
  /// Lab-frame energy of a composite state (sum of level energies).
  double energy(std::size_t state) const;
  /// Energy in the rotating frame: each level k contributes k*frame less.
  double frame_energy(std::size_t state, double frame) const;
  /// Total excitation quanta (level index summed over emitters).
  std::size_t excitation(std::size_t state) const;

  /// Embeds an emitter-local operator into the composite space.
  Mat embed(std::size_t emitter, const Mat& local) const;
  /// |i><j| on one emitter, identity elsewhere.
  Mat transition(std::size_t emitter, std::size_t i, std::size_t j) const;

 private:
  std::vector<std::size_t> levels_;
  std::vector<std::vector<double>> energies_;
  std::size_t dim_ = 1;
};

}  // namespace etempo

#endif
