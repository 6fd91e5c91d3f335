#ifndef ETEMPO_INFLUENCE_SCHEME_HPP
#define ETEMPO_INFLUENCE_SCHEME_HPP

#include <cstddef>

namespace etempo {

// interaction-order index values; k = -1 links an interval to a later pairing
enum KIndex : std::size_t {
  kLink = 0,   // k = -1
  kNone = 1,   // k = 0
  kSingle = 2, // k = 1
  kDouble = 3, // k = 2
};
inline constexpr std::size_t kKDim = 4;

/// Index dimensions of the influence tensors for a given composite system
/// dimension d.  alpha indices run over 0 (no pending interaction) plus the
/// d Hilbert states shifted by one; l picks the Liouville side (0 = left).
struct IndexScheme {
  std::size_t d = 2;

  std::size_t liou() const { return d * d; }
  std::size_t alpha() const { return d + 1; }
  static constexpr std::size_t l_dim = 2;
  static constexpr std::size_t mt_dim = 3;  // 2 = pass-through
};

}  // namespace etempo

#endif
