#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigvol/errors.hpp"

namespace sigvol {

using Index = Eigen::Index;

// Multi-index over {0,...,A-1}. Letter 0 is time.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<int> letters) : letters_(letters) {}
  explicit Word(std::vector<int> letters) : letters_(std::move(letters)) {}

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  int operator[](std::size_t i) const { return letters_[i]; }
  int back() const { return letters_.back(); }
  const std::vector<int>& letters() const { return letters_; }

  // word without its last k letters
  Word drop_last(std::size_t k = 1) const;
  Word append(int letter) const;

  // graded lexicographic: shorter first, then lexicographic
  std::strong_ordering operator<=>(const Word& other) const;
  bool operator==(const Word& other) const = default;

  std::string str() const;

 private:
  std::vector<int> letters_;
};

Word concat(const Word& a, const Word& b);

// Number of words of length <= level over an alphabet of size A.
// Throws ConfigError if the count does not fit.
Index tensor_dimension(int alphabet, int level);

// Graded-lexicographic labeling of all words with |I| <= level.
class Labeling {
 public:
  Labeling() = default;
  Labeling(int alphabet, int level);

  int alphabet() const { return alphabet_; }
  int level() const { return level_; }
  Index size() const { return size_; }

  Index level_offset(int k) const { return offsets_[k]; }
  Index level_size(int k) const { return offsets_[k + 1] - offsets_[k]; }

  Index index_of(const Word& w) const;
  Word word_at(Index k) const;
  int length_at(Index k) const;

  // label of (word at k) followed by letter a; -1 if that exceeds the level
  Index child(Index k, int a) const;

 private:
  int alphabet_ = 1;
  int level_ = 0;
  Index size_ = 1;
  std::vector<Index> offsets_;
};

Labeling enumerate_words(int alphabet, int level);

// Sparse truncated tensor. Never drops terms silently.
class CoeffTensor {
 public:
  using Terms = std::map<Word, double>;

  CoeffTensor() = default;
  CoeffTensor(int alphabet, int level);

  static CoeffTensor unit(int alphabet, int level);
  static CoeffTensor basis(int alphabet, int level, const Word& w, double c = 1.0);

  int alphabet() const { return alphabet_; }
  int level() const { return level_; }
  const Terms& terms() const { return terms_; }
  std::size_t support_size() const { return terms_.size(); }

  double operator[](const Word& w) const;
  // adds c to the coefficient of w; zero results are erased
  void add(const Word& w, double c);

  // same terms, different level; throws if a term would not fit
  CoeffTensor with_level(int level) const;
  // explicit truncation
  CoeffTensor truncated(int level) const;

  CoeffTensor& operator+=(const CoeffTensor& o);
  CoeffTensor& operator-=(const CoeffTensor& o);
  CoeffTensor& operator*=(double c);

  bool operator==(const CoeffTensor& o) const;

  std::string str() const;

 private:
  void check_word(const Word& w) const;

  int alphabet_ = 1;
  int level_ = 0;
  Terms terms_;
};

CoeffTensor operator+(CoeffTensor a, const CoeffTensor& b);
CoeffTensor operator-(CoeffTensor a, const CoeffTensor& b);
CoeffTensor operator*(double c, CoeffTensor a);

// Integer interleaving counts of a ⧢ b.
std::map<Word, std::int64_t> shuffle_counts(const Word& a, const Word& b);

// e_a ⧢ e_b at level |a|+|b|.
CoeffTensor shuffle_words(const Word& a, const Word& b, int alphabet);
// Same, into a tensor of the given level. Throws TruncationError if |a|+|b| > level.
CoeffTensor shuffle_words(const Word& a, const Word& b, int alphabet, int level);

// Full product, level u.level + v.level.
CoeffTensor shuffle(const CoeffTensor& u, const CoeffTensor& v);
// Product truncated at an explicit level.
CoeffTensor shuffle(const CoeffTensor& u, const CoeffTensor& v, int level);

// u ⊗ e_J. Result level defaults to u.level + |J|.
CoeffTensor concat_tensor(const CoeffTensor& u, const Word& j);
CoeffTensor concat_tensor(const CoeffTensor& u, const Word& j, int level);

Eigen::VectorXd vec(const CoeffTensor& u, const Labeling& lab);
CoeffTensor unvec(const Eigen::VectorXd& v, const Labeling& lab);

// ⟨u, x⟩ with x given as a dense labeled vector
double pair(const CoeffTensor& u, const Eigen::VectorXd& x, const Labeling& lab);

}  // namespace sigvol
