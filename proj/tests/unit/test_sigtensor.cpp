#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "sigvol/pathsim.hpp"
#include "sigvol/sigtensor.hpp"

using namespace sigvol;

TEST_CASE("tensor dimensions") {
  CHECK(tensor_dimension(3, 3) == 40);
  CHECK(tensor_dimension(4, 3) == 85);
  CHECK(tensor_dimension(2, 0) == 1);
  CHECK_THROWS_AS(tensor_dimension(50, 40), ConfigError);
}

TEST_CASE("graded lex labeling") {
  Labeling lab(3, 3);
  CHECK(lab.size() == 40);
  CHECK(lab.index_of(Word{}) == 0);
  CHECK(lab.index_of(Word{0}) == 1);
  CHECK(lab.index_of(Word{2}) == 3);
  CHECK(lab.index_of(Word{0, 0}) == 4);
  CHECK(lab.index_of(Word{2, 2, 2}) == 39);
  for (Index k = 0; k < lab.size(); ++k) {
    CHECK(lab.index_of(lab.word_at(k)) == k);
    if (k > 0) CHECK(lab.word_at(k - 1) < lab.word_at(k));
  }
  CHECK(lab.child(lab.index_of(Word{1}), 2) == lab.index_of(Word{1, 2}));
  CHECK(lab.child(lab.index_of(Word{1, 1, 1}), 0) == -1);
  // level-n words are a prefix of the level-(2n+1) labeling
  Labeling big(3, 7);
  for (Index k = 0; k < lab.size(); ++k) CHECK(big.word_at(k) == lab.word_at(k));
  CHECK(Word{1, 2}.str() == "(1,2)");
}

TEST_CASE("shuffle of words") {
  auto c = shuffle_counts(Word{1}, Word{2});
  CHECK(c.size() == 2);
  CHECK(c[Word{1, 2}] == 1);
  CHECK(c[Word{2, 1}] == 1);
  auto d = shuffle_counts(Word{1}, Word{1});
  CHECK(d[Word{1, 1}] == 2);
  auto e = shuffle_counts(Word{1, 2}, Word{3});
  CHECK(e.size() == 3);
  CHECK(e[Word{3, 1, 2}] == 1);
  CHECK(e[Word{1, 3, 2}] == 1);
  CHECK(e[Word{1, 2, 3}] == 1);
  // binomial count: |a|=|b|=3 over one letter gives C(6,3)
  auto f = shuffle_counts(Word{1, 1, 1}, Word{1, 1, 1});
  CHECK(f[Word{1, 1, 1, 1, 1, 1}] == 20);
  CHECK(shuffle_counts(Word{}, Word{1, 2})[Word{1, 2}] == 1);
}

TEST_CASE("truncation is explicit") {
  CHECK_THROWS_AS(shuffle_words(Word{1, 2}, Word{1}, 3, 2), TruncationError);
  CoeffTensor u = CoeffTensor::basis(3, 2, Word{1, 2});
  CHECK_THROWS_AS(u.with_level(1), TruncationError);
  CHECK(u.truncated(1).support_size() == 0);
  CHECK_THROWS(u.add(Word{5}, 1.0));
}

TEST_CASE("shuffle identity on a path signature") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd p = testutil::random_path(6, 3, rng);
  Labeling lab(3, 4);
  Eigen::VectorXd s = path_signature_dense(p, 4);
  for (const Word& a : {Word{1}, Word{0, 2}, Word{1, 2}})
    for (const Word& b : {Word{2}, Word{1, 1}}) {
      const double lhs = s[lab.index_of(a)] * s[lab.index_of(b)];
      const double rhs = pair(shuffle_words(a, b, 3), s, lab);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("Chen identity and concatenation") {
  std::mt19937_64 rng(5);
  Eigen::MatrixXd p = testutil::random_path(9, 3, rng);
  Labeling lab(3, 4);
  Eigen::VectorXd full = path_signature_dense(p, 4);
  Eigen::VectorXd a = path_signature_dense(p.topRows(5), 4);
  Eigen::VectorXd b = path_signature_dense(p.bottomRows(5), 4);
  CHECK((chen_product(a, b, lab) - full).norm() < 1e-12 * full.norm());
  CoeffTensor t = concat_tensor(CoeffTensor::basis(3, 1, Word{1}), Word{0, 2});
  CHECK(t[Word{1, 0, 2}] == 1.0);
  CHECK(t.level() == 3);
}

TEST_CASE("vec and unvec") {
  Labeling lab(2, 2);
  CoeffTensor u(2, 2);
  u.add(Word{}, 1.5);
  u.add(Word{1, 0}, -2.0);
  Eigen::VectorXd v = vec(u, lab);
  CHECK(v[0] == 1.5);
  CHECK(v[lab.index_of(Word{1, 0})] == -2.0);
  CHECK(unvec(v, lab) == u);
}
