#include "etempo/liouville/system.hpp"

#include <cmath>
#include <stdexcept>

namespace etempo {

std::size_t SystemSpec::dim() const {
  std::size_t d = 1;
  for (const auto& e : emitters) d *= e.levels();
  return d;
}

void SystemSpec::validate() const {
  if (emitters.empty()) throw std::invalid_argument("no emitters");
  for (const auto& e : emitters) {
    if (e.levels() < 2) throw std::invalid_argument("emitter needs >=2 levels");
    if (e.dipoles.size() + 1 != e.levels())
      throw std::invalid_argument("dipoles must cover adjacent transitions");
  }
  for (const auto& l : lindblad)
    if (l.rate < 0) throw std::invalid_argument("negative Lindblad rate");
  if (drive && (drive->sigma <= 0 || drive->area < 0))
    throw std::invalid_argument("invalid pulse");
}

CompositeBasis::CompositeBasis(const std::vector<EmitterSpec>& emitters) {
  for (const auto& e : emitters) {
    levels_.push_back(e.levels());
    energies_.push_back(e.energies);
    dim_ *= e.levels();
  }
}

std::size_t CompositeBasis::level_of(std::size_t state,
                                     std::size_t emitter) const {
  std::size_t rem = state;
  for (std::size_t k = levels_.size(); k-- > 0;) {
    std::size_t lev = rem % levels_[k];
    if (k == emitter) return lev;
    rem /= levels_[k];
  }
  throw std::out_of_range("emitter index");
}

std::size_t CompositeBasis::state_from(
    const std::vector<std::size_t>& levels) const {
  std::size_t s = 0;
  for (std::size_t k = 0; k < levels_.size(); ++k) s = s * levels_[k] +
                                                       levels[k];
  return s;
}

double CompositeBasis::energy(std::size_t state) const {
  double e = 0;
  for (std::size_t k = 0; k < levels_.size(); ++k)
    e += energies_[k][level_of(state, k)];
  return e;
}

double CompositeBasis::frame_energy(std::size_t state, double frame) const {
  double e = energy(state);
  return e - frame * static_cast<double>(excitation(state));
}

std::size_t CompositeBasis::excitation(std::size_t state) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < levels_.size(); ++k) n += level_of(state, k);
  return n;
}

Mat CompositeBasis::embed(std::size_t emitter, const Mat& local) const {
  Mat out = Mat::Zero(dim_, dim_);
  for (std::size_t a = 0; a < dim_; ++a)
    for (std::size_t b = 0; b < dim_; ++b) {
      bool others_match = true;
      for (std::size_t k = 0; k < levels_.size() && others_match; ++k)
        if (k != emitter && level_of(a, k) != level_of(b, k))
          others_match = false;
      if (!others_match) continue;
      out(a, b) = local(level_of(a, emitter), level_of(b, emitter));
    }
  return out;
}

Mat CompositeBasis::transition(std::size_t emitter, std::size_t i,
                               std::size_t j) const {
  Mat local = Mat::Zero(levels_[emitter], levels_[emitter]);
  local(i, j) = 1.0;
  return embed(emitter, local);
}

}  // namespace etempo
