#include "etempo/bath/integrated.hpp"

#include <cmath>
#include <stdexcept>

#include "etempo/bath/quadrature.hpp"

namespace etempo {

namespace {

// frame-relative transition phase exponent for emitter-local levels
double frame_gap(const EmitterSpec& e, std::size_t i, std::size_t j,
                 double frame) {
  double lab = e.energies[i] - e.energies[j];
  return lab - frame * (static_cast<double>(i) - static_cast<double>(j));
}

}  // namespace

KernelTensors integrated_kernels(const PairKernel& kernel,
                                 const std::vector<EmitterSpec>& emitters,
                                 double dt, std::size_t n_max,
                                 std::size_t gl_points) {
  if (dt <= 0) throw std::invalid_argument("integrated_kernels: dt <= 0");
  if (static_cast<double>(n_max) * dt >
      kernel.memory_extent() + 1e-12 * dt)
    throw std::invalid_argument(
        "integrated_kernels: n_max * dt exceeds kernel memory extent");

  const std::size_t n_em = emitters.size();
  KernelTensors out;
  out.dt = dt;
  out.frame = kernel.frame();
  out.n_max = n_max;
  for (const auto& e : emitters) out.levels.push_back(e.levels());

  std::vector<double> x, w;
  gauss_legendre(gl_points, 0.0, dt, x, w);
  // nodes for the inner ordered integral on [0, t2], mapped per outer node
  std::vector<double> xu, wu;
  gauss_legendre(gl_points, 0.0, 1.0, xu, wu);

  out.blocks.resize(n_max + 1);
  for (std::size_t lag = 0; lag <= n_max; ++lag) {
    out.blocks[lag].resize(n_em);
    for (std::size_t n = 0; n < n_em; ++n) {
      out.blocks[lag][n].resize(n_em);
      for (std::size_t m = 0; m < n_em; ++m) {
        const std::size_t ln = emitters[n].levels();
        const std::size_t lm = emitters[m].levels();
        LabeledTensor fwd({"i", "j", "k", "l"}, {ln, ln, lm, lm});
        LabeledTensor rev({"i", "j", "k", "l"}, {ln, ln, lm, lm});
        for (std::size_t i = 0; i < ln; ++i)
          for (std::size_t j = 0; j < ln; ++j)
            for (std::size_t k = 0; k < lm; ++k)
              for (std::size_t l = 0; l < lm; ++l) {
                Transition late{i, j}, early{k, l};
                const double ph2 = frame_gap(emitters[n], i, j, out.frame);
                const double ph1 = frame_gap(emitters[m], k, l, out.frame);
                cplx acc_f = 0, acc_r = 0;
                if (lag == 0) {
                  // time-ordered: t2 in [0,dt], t1 in [0,t2]
                  for (std::size_t a = 0; a < gl_points; ++a) {
                    const double t2 = x[a];
                    for (std::size_t b = 0; b < gl_points; ++b) {
                      const double t1 = xu[b] * t2;
                      const double ww = w[a] * wu[b] * t2;
                      const cplx phase =
                          std::exp(cplx(0.0, ph2 * (t2 - 0.5 * dt) +
                                                 ph1 * (t1 - 0.5 * dt)));
                      acc_f += ww * phase *
                               kernel.eval(n, late, m, early, t2 - t1);
                      acc_r += ww * phase *
                               kernel.eval(m, early, n, late, t1 - t2);
                    }
                  }
                } else {
                  // disjoint intervals: t2 in the later window, t1 earlier
                  const double off = static_cast<double>(lag) * dt;
                  for (std::size_t a = 0; a < gl_points; ++a)
                    for (std::size_t b = 0; b < gl_points; ++b) {
                      const double t2 = x[a], t1 = x[b];
                      const double ww = w[a] * w[b];
                      const cplx phase =
                          std::exp(cplx(0.0, ph2 * (t2 - 0.5 * dt) +
                                                 ph1 * (t1 - 0.5 * dt)));
                      acc_f += ww * phase *
                               kernel.eval(n, late, m, early, off + t2 - t1);
                      acc_r += ww * phase *
                               kernel.eval(m, early, n, late, t1 - t2 - off);
                    }
                }
                // leading minus of the double-integrated tensors
                fwd.at({i, j, k, l}) = -acc_f;
                rev.at({i, j, k, l}) = -acc_r;
              }
        out.blocks[lag][n][m].fwd = std::move(fwd);
        out.blocks[lag][n][m].rev = std::move(rev);
      }
    }
  }
  return out;
}

}  // namespace etempo
