#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "helpers.hpp"
#include "sigvol/polyproc.hpp"

using namespace sigvol;

TEST_CASE("dual operator on the OU example") {
  ModelConfig m = testutil::ou2();
  auto c = build_coefficients(m, m.alphabet_x());
  const double k1 = 0.1, t1 = 0.1, x1 = 1, k2 = 25, t2 = 4, x2 = 0.08;

  CoeffTensor e1(3, 1);
  e1.add(Word{}, k1 * (t1 - x1));
  e1.add(Word{1}, -k1);
  CHECK(apply_dual(Word{1}, c) == e1);

  CHECK(apply_dual(Word{2, 1, 0}, c) == CoeffTensor::basis(3, 3, Word{2, 1}).with_level(3));

  CoeffTensor e012 = CoeffTensor::basis(3, 3, Word{0, 1}, k2 * (t2 - x2));
  e012 -= k2 * shuffle(CoeffTensor::basis(3, 2, Word{0, 1}), CoeffTensor::basis(3, 1, Word{2}));
  e012 += CoeffTensor::basis(3, 3, Word{0}, 0.5 * 0.7 * 10 * -0.577);
  CHECK(apply_dual(Word{0, 1, 2}, c) == e012);
  CHECK(apply_dual(Word{}, c).support_size() == 0);
}

TEST_CASE("G columns and orientation") {
  ModelConfig m = testutil::ou2();
  auto c = build_coefficients(m, 3);
  DualMatrix g = build_G(c, 3);
  CHECK(g.size() == 40);
  // ∅ column is zero
  CHECK(Eigen::MatrixXd(g.G).col(0).norm() == 0.0);
  const Index k = g.labeling.index_of(Word{1});
  CHECK(g.G.coeff(0, k) == doctest::Approx(0.1 * (0.1 - 1)));
  CHECK(g.G.coeff(k, k) == doctest::Approx(-0.1));
}

TEST_CASE("BM dual matrix is nilpotent") {
  ModelConfig m = testutil::bm2();
  auto c = build_coefficients(m, m.alphabet_x());
  for (int n = 1; n <= 3; ++n) {
    DualMatrix g = build_G(c, n);
    Eigen::MatrixXd G(g.G), P = Eigen::MatrixXd::Identity(G.rows(), G.cols());
    for (int k = 0; k <= n; ++k) P = P * G;
    CHECK(P.cwiseAbs().maxCoeff() == 0.0);
    int used = 0;
    Eigen::MatrixXd taylor = integrated_exponential(g, 0.3, IntegrationMethod::Taylor, 64, &used);
    CHECK(used <= n + 1);
    Eigen::MatrixXd aug = integrated_exponential(g, 0.3, IntegrationMethod::Augmented);
    CHECK((taylor - aug).norm() < 1e-12 * (1 + aug.norm()));
  }
}

TEST_CASE("Pade exponential matches Eigen's") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (double scale : {0.01, 1.0, 8.0, 60.0}) {
    Eigen::MatrixXd a(12, 12);
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = scale * nd(rng) / 12;
    Eigen::MatrixXd ref = a.exp();
    CHECK((matrix_exponential(a) - ref).norm() <= 1e-11 * ref.norm());
  }
}

TEST_CASE("exp action agrees with the dense exponential") {
  ModelConfig m = testutil::ou2();
  DualMatrix g = build_G(build_coefficients(m, 3), 3);
  Eigen::MatrixXd v = Eigen::MatrixXd::Random(g.size(), 2);
  Eigen::MatrixXd dense = matrix_exponential(0.2 * Eigen::MatrixXd(g.G)) * v;
  Eigen::MatrixXd act = exp_action(g.G, 0.2, v);
  CHECK((dense - act).norm() < 1e-10 * dense.norm());
  Eigen::VectorXd s0 = Eigen::VectorXd::Unit(g.size(), 0);
  CHECK((expected_signature(g, 0.2, s0, ExpMethod::Dense) - expected_signature(g, 0.2, s0, ExpMethod::Action))
            .norm() < 1e-10);
}

TEST_CASE("expected signature of time is exact") {
  ModelConfig m = testutil::ou2();
  DualMatrix g = build_G(build_coefficients(m, 3), 3);
  Eigen::VectorXd s = expected_signature(g, 0.5, Eigen::VectorXd::Unit(g.size(), 0));
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[g.labeling.index_of(Word{0})] == doctest::Approx(0.5));
  CHECK(s[g.labeling.index_of(Word{0, 0})] == doctest::Approx(0.125));
  // E[X_t - X_0] for OU
  const double k = 25, th = 4, x0 = 0.08;
  CHECK(s[g.labeling.index_of(Word{2})] == doctest::Approx((th - x0) * (1 - std::exp(-k * 0.5))).epsilon(1e-3));
}

TEST_CASE("integrated exponential methods agree") {
  ModelConfig m = testutil::ou1(2);
  DualMatrix g = build_G(build_coefficients(m, 2), 3);
  const double d = 1.0 / 12;
  Eigen::MatrixXd aug = integrated_exponential(g, d, IntegrationMethod::Augmented);
  Eigen::MatrixXd trap = integrated_exponential(g, d, IntegrationMethod::Trapezoid);
  CHECK((aug - trap).norm() < 1e-3 * aug.norm());
  // κΔ > 1: Taylor diverges and is refused
  CHECK(spectral_radius(d * Eigen::MatrixXd(g.G)) > 1.0);
  CHECK_THROWS_AS(integrated_exponential(g, d, IntegrationMethod::Taylor), MethodError);
}

TEST_CASE("B-free restriction") {
  ModelConfig m = testutil::ou2();
  auto full = build_coefficients(m, m.alphabet_z());
  std::vector<int> e{0, 1, 2};
  auto r = restrict_alphabet(full, e);
  auto direct = build_coefficients(m, m.alphabet_x());
  for (int j = 0; j < 3; ++j) CHECK(r.drift(j) == direct.drift(j));
  DualMatrix gf = build_G(full, 2);
  DualMatrix gr = restrict_alphabet(gf, e);
  DualMatrix gd = build_G(direct, 2);
  CHECK((Eigen::MatrixXd(gr.G) - Eigen::MatrixXd(gd.G)).norm() == 0.0);
  std::vector<int> bad{0, 5};
  CHECK_THROWS_AS(restrict_alphabet(full, bad), AlphabetMismatch);
  CHECK_THROWS_AS(build_coefficients(m, 7), AlphabetMismatch);
}
