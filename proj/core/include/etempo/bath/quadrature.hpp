#ifndef ETEMPO_BATH_QUADRATURE_HPP
#define ETEMPO_BATH_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace etempo {

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(std::size_t n, double a, double b,
                    std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace etempo

#endif
