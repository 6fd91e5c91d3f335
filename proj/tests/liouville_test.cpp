#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "etempo/liouville/superop.hpp"
#include "etempo/liouville/system.hpp"
#include "test_util.hpp"

using namespace etempo;

namespace {
Mat random_mat(std::size_t d, std::mt19937& gen) {
  Mat m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(i, j) = testutil::random_cplx(gen);
  return m;
}

SystemSpec single_tls(double omega0, double frame) {
  SystemSpec s;
  s.emitters.push_back({{0.0, omega0}, {{Vec3{1.0, 0.0, 0.0}}}});
  s.rotating_frame = frame;
  return s;
}
}  // namespace

TEST_CASE("left/right/commutator: identity operator") {
  Mat id = Mat::Identity(3, 3);
  CHECK((left_mult(id) - Mat::Identity(9, 9)).norm() < 1e-14);
  CHECK((right_mult(id) - Mat::Identity(9, 9)).norm() < 1e-14);
  CHECK(commutator_minus(id).norm() < 1e-14);
}

TEST_CASE("left_mult: basis action of |2><1|") {
  Mat a = Mat::Zero(2, 2);
  a(1, 0) = 1.0;  // |2><1| with 0-based levels
  Mat rho = Mat::Zero(2, 2);
  rho(0, 0) = 1.0;  // |1><1|
  Vec v = left_mult(a) * vectorize(rho);
  Mat out = unvectorize(v, 2);
  CHECK(std::abs(out(1, 0) - cplx(1.0)) < 1e-14);
  CHECK(out.cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("left/right_mult: dense oracle on random operators") {
  auto& gen = testutil::rng();
  for (int rep = 0; rep < 5; ++rep) {
    Mat a = random_mat(3, gen), rho = random_mat(3, gen);
    CHECK((left_mult(a) * vectorize(rho) - vectorize(a * rho)).norm() <
          1e-13);
    CHECK((right_mult(a) * vectorize(rho) - vectorize(rho * a)).norm() <
          1e-13);
    CHECK((commutator_minus(a) * vectorize(rho) -
           vectorize(a * rho - rho * a))
              .norm() < 1e-13);
  }
}

TEST_CASE("commutator image is traceless for Hermitian generators") {
  auto& gen = testutil::rng();
  for (std::size_t d = 2; d <= 4; ++d) {
    Mat h = random_mat(d, gen);
    h = (h + h.adjoint()).eval();
    Mat rho = random_mat(d, gen);
    Vec img = commutator_minus(h) * vectorize(rho);
    cplx tr = trace_vector(d).dot(img.conjugate());  // plain sum of diagonal
    tr = 0;
    for (std::size_t i = 0; i < d; ++i) tr += img(i * d + i);
    CHECK(std::abs(tr) < 1e-12);
  }
}

TEST_CASE("free_propagator: rotating frame removes the free phase") {
  const double w0 = 2e15;
  SystemSpec s = single_tls(w0, w0);
  Mat u = free_propagator(s, 0.0, 1e-12);
  CHECK((u - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("free_propagator: pure dephasing decays coherence analytically") {
  const double gamma = 3e11;
  SystemSpec s = single_tls(1e15, 1e15);
  Mat sz = Mat::Zero(2, 2);
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  s.lindblad.push_back({sz, gamma / 2.0});
  const double dt = 2.7e-12;
  Mat u = free_propagator(s, 0.0, dt);
  Mat rho(2, 2);
  rho << 0.5, 0.4, 0.4, 0.5;
  Mat out = unvectorize(u * vectorize(rho), 2);
  CHECK(std::abs(out(0, 1) - 0.4 * std::exp(-gamma * dt)) < 1e-10);
  CHECK(std::abs(out(0, 0) - 0.5) < 1e-10);
}

TEST_CASE("free_propagator: resonant pi pulse swaps populations") {
  const double w0 = 1.5e15;
  SystemSpec s = single_tls(w0, w0);
  PulseSpec p;
  p.center = 0.5e-12;
  p.sigma = 30e-15;
  p.area = M_PI;
  p.carrier = w0;
  s.drive = p;
  Mat u = free_propagator(s, 0.0, 1e-12, 1e-11);
  Mat rho = Mat::Zero(2, 2);
  rho(0, 0) = 1.0;
  Mat out = unvectorize(u * vectorize(rho), 2);
  CHECK(std::abs(out(1, 1) - 1.0) < 1e-6);
  CHECK(std::abs(out(0, 0)) < 1e-6);
}

TEST_CASE("free_propagator: trace preservation and Liouville unitarity") {
  auto& gen = testutil::rng();
  SystemSpec s = single_tls(1e15, 0.9e15);  // detuned frame keeps a phase
  Mat u = free_propagator(s, 0.0, 3e-13);
  // unitary Liouville map preserves the Frobenius norm of vec(rho)
  Mat rho = random_mat(2, gen);
  CHECK(std::abs((u * vectorize(rho)).norm() - vectorize(rho).norm()) <
        1e-10);
  // trace of the image equals trace of the input
  Vec img = u * vectorize(rho);
  cplx tr0 = rho.trace(), tr1 = 0;
  for (int i = 0; i < 2; ++i) tr1 += img(i * 2 + i);
  CHECK(std::abs(tr0 - tr1) < 1e-10);
}

TEST_CASE("free_propagator with Lindblad: trace-preserving and positive") {
  SystemSpec s = single_tls(1e15, 1e15);
  Mat sm = Mat::Zero(2, 2);
  sm(0, 1) = 1.0;  // lowering operator
  s.lindblad.push_back({sm, 2e11});
  Mat u = free_propagator(s, 0.0, 4e-12);
  // act on a basis of density matrices and check physicality
  std::vector<Mat> basis;
  Mat r(2, 2);
  r << 1, 0, 0, 0;
  basis.push_back(r);
  r << 0, 0, 0, 1;
  basis.push_back(r);
  r << 0.5, 0.5, 0.5, 0.5;
  basis.push_back(r);
  r << 0.5, cplx(0, -0.5), cplx(0, 0.5), 0.5;
  basis.push_back(r);
  for (const auto& rho : basis) {
    Mat out = unvectorize(u * vectorize(rho), 2);
    CHECK(std::abs(out.trace() - rho.trace()) < 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat> es(out);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("row_operator: identity limits and dense product oracle") {
  auto& gen = testutil::rng();
  const std::size_t d2 = 4;
  Mat id = Mat::Identity(d2, d2);
  Mat o = random_mat(d2, gen), ua = random_mat(d2, gen),
      ub = random_mat(d2, gen);

  LabeledTensor t1 = row_operator(id, ua, id);
  for (std::size_t i = 0; i < d2; ++i)
    for (std::size_t j = 0; j < d2; ++j)
      CHECK(std::abs(t1.at({i, j}) - ua(i, j)) < 1e-14);

  LabeledTensor t2 = row_operator(o, id, id);
  for (std::size_t i = 0; i < d2; ++i)
    for (std::size_t j = 0; j < d2; ++j)
      CHECK(std::abs(t2.at({i, j}) - o(i, j)) < 1e-14);

  LabeledTensor t3 = row_operator(o, ua, ub);
  Mat expect = ub * o * ua;
  for (std::size_t i = 0; i < d2; ++i)
    for (std::size_t j = 0; j < d2; ++j)
      CHECK(std::abs(t3.at({i, j}) - expect(i, j)) < 1e-12);
}

TEST_CASE("composite basis bookkeeping") {
  std::vector<EmitterSpec> ems = {{{0.0, 1.0}, {Vec3{1, 0, 0}}},
                                  {{0.0, 2.0}, {Vec3{1, 0, 0}}}};
  CompositeBasis b(ems);
  CHECK(b.dim() == 4);
  CHECK(b.level_of(2, 0) == 1);
  CHECK(b.level_of(2, 1) == 0);
  CHECK(b.state_from({1, 1}) == 3);
  CHECK(b.energy(3) == doctest::Approx(3.0));
  CHECK(b.excitation(3) == 2);
  Mat t = b.transition(1, 1, 0);
  CHECK(std::abs(t(1, 0) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(t(3, 2) - cplx(1.0)) < 1e-15);
  CHECK(t.cwiseAbs().sum() == doctest::Approx(2.0));
}
