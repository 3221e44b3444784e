#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "sigvol/pathsim.hpp"
#include "sigvol/vixcore.hpp"

using namespace sigvol;

TEST_CASE("packing") {
  Eigen::Matrix3d m;
  m << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  Eigen::VectorXd p = pack_upper(m);
  CHECK(p.size() == 6);
  CHECK(p[pair_index(1, 2, 3)] == 5);
  CHECK(unpack_symmetric(p, 3) == Eigen::MatrixXd(m));
  Eigen::Vector3d l(0.3, -1, 2);
  CHECK(quadratic_weights(l).dot(p) == doctest::Approx(l.dot(m * l)));
  CHECK(unpack_upper(p, 3)(2, 1) == 0.0);
}

TEST_CASE("PSD Cholesky") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd b(6, 3);
  for (Index i = 0; i < b.size(); ++i) b.data()[i] = nd(rng);
  Eigen::MatrixXd q = b * b.transpose();  // rank 3
  CholFactor f = cholesky_psd(q);
  CHECK((f.upper * f.upper.transpose() - q).norm() < 1e-10 * q.norm());
  CHECK(f.upper.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() == 0.0);
  Eigen::VectorXd l = Eigen::VectorXd::Random(6);
  CHECK(vix_value(l, f.upper, 0.5) == doctest::Approx(std::sqrt(l.dot(q * l) / 0.5)));
  CHECK(vix_value_packed(l, pack_upper(f.upper).data(), 0.5) == doctest::Approx(vix_value(l, f.upper, 0.5)));
  // indefinite input is clipped
  Eigen::MatrixXd bad = q;
  bad(0, 0) -= 1e-9;
  CholFactor g = cholesky_psd(bad);
  CHECK((g.upper * g.upper.transpose() - q).norm() < 1e-6 * q.norm());
}

TEST_CASE("Q of a single path matches the direct quadratic form") {
  ModelConfig m = testutil::ou1(1);
  QAssembler qa(m);
  CHECK(qa.param_dim() == 3);
  CHECK(qa.sig_labeling().level() == 3);
  PathGenerator gen(m, PathGrid{0.1, 252});
  Eigen::MatrixXd tr = gen.trajectory(3, 0);
  Eigen::VectorXd sig = path_signature_dense(tr.leftCols(2), 3);
  QMatrix q = q_matrix(sig, qa, 0.1, m.delta);
  CHECK((q.values - q.values.transpose()).norm() < 1e-12 * q.values.norm());
  // ℓ_∅ only: ℓᵀQℓ = ℓ_∅²Δ
  Eigen::VectorXd l = Eigen::VectorXd::Zero(3);
  l[0] = 0.2;
  CHECK(l.dot(q.values * l) == doctest::Approx(0.04 * m.delta));
}

TEST_CASE("control variate") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> y(4000), pay(4000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = nd(rng);
    pay[i] = 2.0 * y[i] + 0.1 * nd(rng) + 1.0;
  }
  VariateResult r = apply_control_variate(pay, y, 0.0);
  CHECK(r.applied);
  CHECK(r.coefficient == doctest::Approx(2.0).epsilon(0.02));
  CHECK(r.reduced.std_error < 0.1 * r.raw.std_error);
  std::vector<double> c(4000, 3.0);
  CHECK_FALSE(apply_control_variate(pay, c, 3.0).applied);
}

TEST_CASE("parameter slices") {
  ParamSlices s;
  s.starts = {0, 0.1, 0.3};
  s.params = {Eigen::VectorXd::Ones(2), 2 * Eigen::VectorXd::Ones(2), 3 * Eigen::VectorXd::Ones(2)};
  CHECK(s.slice_at(0.05) == 0);
  CHECK(s.slice_at(0.1) == 1);
  CHECK(s.slice_at(5) == 2);
  CHECK(std::isinf(s.end_of(2)));
  auto w = vix_window_pieces(s, 0.05, 0.1);
  REQUIRE(w.size() == 2);
  CHECK(w[0].tau_hi == doctest::Approx(0.05));
  CHECK(w[1].tau_lo == doctest::Approx(0.05));
  CHECK(w[1].tau_hi == doctest::Approx(0.1));
  ParamSlices bad = s;
  bad.starts = {0.1, 0.2, 0.3};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("time-varying VIX with one slice reduces to the constant case") {
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(2, 2);
  Eigen::Vector2d l(0.3, 0.4);
  ParamSlices s = constant_slices(l);
  auto q_at = [&](double tau) -> Eigen::MatrixXd { return tau * q; };
  CHECK(vix_tv(s, 0.2, 0.1, q_at) == doctest::Approx(std::sqrt(l.dot(q_at(0.1) * l) / 0.1)));
}
