#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "sigvol/pathsim.hpp"
#include "sigvol/spxcore.hpp"

using namespace sigvol;

TEST_CASE("ito coefficients for OU") {
  ModelConfig m = testutil::ou2(2);
  ItoCoeffFamily f = e_tilde_coeffs(m);
  CHECK(f.full_alphabet == 4);
  CHECK(f.words.size() == 13);
  const Index k = f.words.index_of(Word{0, 2});
  const CoeffTensor& e = f.e_tilde[k];
  CHECK(e[Word{0, 2, 3}] == 1.0);
  CHECK(e[Word{0, 0}] == doctest::Approx(-0.5 * 10 * -0.6));
  CHECK(e.support_size() == 2);
  // I ending in 0 has no correction term
  CHECK(f.e_tilde[f.words.index_of(Word{1, 0})].support_size() == 1);
  CHECK(f.e_tilde[0] == CoeffTensor::basis(4, 1, Word{3}).with_level(e.level()));
  CHECK(f.matrix().rows() == 13);
}

TEST_CASE("log price with constant volatility") {
  ModelConfig m = testutil::ou1(1);
  QAssembler qa(m);
  ItoCoeffFamily f = e_tilde_coeffs(m);
  PathGenerator gen(m, PathGrid{0.2, 252});
  Eigen::MatrixXd tr = gen.trajectory(5, 1);
  Eigen::VectorXd sx = path_signature_dense(tr.leftCols(2), 3);
  Eigen::VectorXd sz = path_signature_dense(tr, 2);
  QZero q0 = q0_matrix(sx, qa, 0.2);
  Eigen::VectorXd c = ito_contractions(sz, f.matrix());
  Eigen::VectorXd l = Eigen::VectorXd::Zero(3);
  l[0] = 0.25;
  const double b = tr(tr.rows() - 1, 2);
  const double t = tr(tr.rows() - 1, 0);
  CHECK(log_price(l, q0.values, c) == doctest::Approx(-0.5 * 0.0625 * t + 0.25 * b));
}

TEST_CASE("payoffs") {
  auto u = undiscount(100.0, 0.02, 0.01, 0.5);
  CHECK(u.forward_value == doctest::Approx(100 * std::exp(0.005)));
  CHECK(call_payoff(110, 100, 0.0, 1) == 10);
  CHECK(call_payoff(90, 100, 0.0, 1) == 0);
  CHECK(call_payoff(110, 100, 0.05, 1) == doctest::Approx(10 * std::exp(-0.05)));
}

TEST_CASE("time-varying log price telescopes for equal slices") {
  ModelConfig m = testutil::ou1(1);
  QAssembler qa(m);
  ItoCoeffFamily f = e_tilde_coeffs(m);
  PathGenerator gen(m, PathGrid{0.3, 252});
  Eigen::MatrixXd tr = gen.trajectory(6, 2);
  RunningValues rv;
  PathGrid g{0.3, 252};
  for (double t : {0.1, 0.3}) {
    const Index k = g.snap(t);
    rv.q0[t] = q0_matrix(path_signature_dense(tr.topRows(k + 1).leftCols(2), 3), qa, t).values;
    rv.contractions[t] = ito_contractions(path_signature_dense(tr.topRows(k + 1), 2), f.matrix());
  }
  Eigen::Vector3d l(0.2, 0.1, -0.05);
  ParamSlices s;
  s.starts = {0, 0.1};
  s.params = {l, l};
  const double direct = log_price(l, rv.q0[0.3], rv.contractions[0.3]);
  CHECK(log_price_tv(s, 0.3, rv) == doctest::Approx(direct).epsilon(1e-10));
}
