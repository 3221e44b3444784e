#include "sigvol/sigtensor.hpp"

#include <limits>
#include <sstream>

namespace sigvol {

Word Word::drop_last(std::size_t k) const {
  if (k > letters_.size()) throw std::out_of_range("Word::drop_last");
  return Word(std::vector<int>(letters_.begin(), letters_.end() - static_cast<long>(k)));
}

Word Word::append(int letter) const {
  std::vector<int> l = letters_;
  l.push_back(letter);
  return Word(std::move(l));
}

std::strong_ordering Word::operator<=>(const Word& other) const {
  if (auto c = letters_.size() <=> other.letters_.size(); c != 0) return c;
  return letters_ <=> other.letters_;
}

std::string Word::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (i) os << ',';
    os << letters_[i];
  }
  os << ')';
  return os.str();
}

Word concat(const Word& a, const Word& b) {
  std::vector<int> l = a.letters();
  l.insert(l.end(), b.letters().begin(), b.letters().end());
  return Word(std::move(l));
}

Index tensor_dimension(int alphabet, int level) {
  if (alphabet < 1 || level < 0) throw ConfigError("tensor_dimension: need alphabet >= 1, level >= 0");
  const Index cap = std::numeric_limits<Index>::max() / 4;
  Index total = 0, pw = 1;
  for (int k = 0; k <= level; ++k) {
    total += pw;
    if (total > cap) throw ConfigError("tensor_dimension: word count overflows");
    if (k < level) {
      if (pw > cap / alphabet) throw ConfigError("tensor_dimension: word count overflows");
      pw *= alphabet;
    }
  }
  return total;
}

Labeling::Labeling(int alphabet, int level) : alphabet_(alphabet), level_(level) {
  size_ = tensor_dimension(alphabet, level);
  offsets_.resize(level + 2);
  offsets_[0] = 0;
  Index pw = 1;
  for (int k = 0; k <= level; ++k) {
    offsets_[k + 1] = offsets_[k] + pw;
    pw *= alphabet;
  }
}

Index Labeling::index_of(const Word& w) const {
  if (static_cast<int>(w.size()) > level_)
    throw TruncationError("index_of: word " + w.str() + " exceeds level " + std::to_string(level_));
  Index r = 0;
  for (int l : w.letters()) {
    if (l < 0 || l >= alphabet_) throw AlphabetMismatch("index_of: letter out of alphabet in " + w.str());
    r = r * alphabet_ + l;
  }
  return offsets_[w.size()] + r;
}

int Labeling::length_at(Index k) const {
  if (k < 0 || k >= size_) throw std::out_of_range("Labeling: label out of range");
  int len = 0;
  while (offsets_[len + 1] <= k) ++len;
  return len;
}

Word Labeling::word_at(Index k) const {
  int len = length_at(k);
  Index r = k - offsets_[len];
  std::vector<int> l(len);
  for (int p = len - 1; p >= 0; --p) {
    l[p] = static_cast<int>(r % alphabet_);
    r /= alphabet_;
  }
  return Word(std::move(l));
}

Index Labeling::child(Index k, int a) const {
  int len = length_at(k);
  if (len >= level_) return -1;
  return offsets_[len + 1] + (k - offsets_[len]) * alphabet_ + a;
}

Labeling enumerate_words(int alphabet, int level) { return Labeling(alphabet, level); }

CoeffTensor::CoeffTensor(int alphabet, int level) : alphabet_(alphabet), level_(level) {
  if (alphabet < 1 || level < 0) throw ConfigError("CoeffTensor: need alphabet >= 1, level >= 0");
}

CoeffTensor CoeffTensor::unit(int alphabet, int level) { return basis(alphabet, level, Word{}); }

CoeffTensor CoeffTensor::basis(int alphabet, int level, const Word& w, double c) {
  CoeffTensor t(alphabet, level);
  t.add(w, c);
  return t;
}

void CoeffTensor::check_word(const Word& w) const {
  if (static_cast<int>(w.size()) > level_)
    throw TruncationError("word " + w.str() + " exceeds tensor level " + std::to_string(level_));
  for (int l : w.letters())
    if (l < 0 || l >= alphabet_) throw AlphabetMismatch("letter outside alphabet in " + w.str());
}

double CoeffTensor::operator[](const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? 0.0 : it->second;
}

void CoeffTensor::add(const Word& w, double c) {
  check_word(w);
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(w, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

CoeffTensor CoeffTensor::with_level(int level) const {
  CoeffTensor r(alphabet_, level);
  for (const auto& [w, c] : terms_) r.add(w, c);
  return r;
}

CoeffTensor CoeffTensor::truncated(int level) const {
  CoeffTensor r(alphabet_, level);
  for (const auto& [w, c] : terms_)
    if (static_cast<int>(w.size()) <= level) r.add(w, c);
  return r;
}

CoeffTensor& CoeffTensor::operator+=(const CoeffTensor& o) {
  if (o.alphabet_ != alphabet_) throw AlphabetMismatch("CoeffTensor +: alphabet mismatch");
  for (const auto& [w, c] : o.terms_) add(w, c);
  return *this;
}

CoeffTensor& CoeffTensor::operator-=(const CoeffTensor& o) {
  if (o.alphabet_ != alphabet_) throw AlphabetMismatch("CoeffTensor -: alphabet mismatch");
  for (const auto& [w, c] : o.terms_) add(w, -c);
  return *this;
}

CoeffTensor& CoeffTensor::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, v] : terms_) v *= c;
  return *this;
}

bool CoeffTensor::operator==(const CoeffTensor& o) const {
  return alphabet_ == o.alphabet_ && terms_ == o.terms_;
}

std::string CoeffTensor::str() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, c] : terms_) {
    if (!first) os << " + ";
    os << c << "*e" << w.str();
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

CoeffTensor operator+(CoeffTensor a, const CoeffTensor& b) { return a += b; }
CoeffTensor operator-(CoeffTensor a, const CoeffTensor& b) { return a -= b; }
CoeffTensor operator*(double c, CoeffTensor a) { return a *= c; }

std::map<Word, std::int64_t> shuffle_counts(const Word& a, const Word& b) {
  // S[i][j] = prefix(a,i) ⧢ prefix(b,j)
  const std::size_t na = a.size(), nb = b.size();
  std::vector<std::vector<std::map<Word, std::int64_t>>> S(na + 1, std::vector<std::map<Word, std::int64_t>>(nb + 1));
  S[0][0][Word{}] = 1;
  for (std::size_t i = 0; i <= na; ++i) {
    for (std::size_t j = 0; j <= nb; ++j) {
      if (i == 0 && j == 0) continue;
      auto& cell = S[i][j];
      if (i > 0)
        for (const auto& [w, c] : S[i - 1][j]) cell[w.append(a[i - 1])] += c;
      if (j > 0)
        for (const auto& [w, c] : S[i][j - 1]) cell[w.append(b[j - 1])] += c;
    }
  }
  return std::move(S[na][nb]);
}

CoeffTensor shuffle_words(const Word& a, const Word& b, int alphabet) {
  return shuffle_words(a, b, alphabet, static_cast<int>(a.size() + b.size()));
}

CoeffTensor shuffle_words(const Word& a, const Word& b, int alphabet, int level) {
  if (static_cast<int>(a.size() + b.size()) > level)
    throw TruncationError("shuffle_words: |a|+|b| = " + std::to_string(a.size() + b.size()) +
                          " exceeds level " + std::to_string(level));
  CoeffTensor r(alphabet, level);
  for (const auto& [w, c] : shuffle_counts(a, b)) r.add(w, static_cast<double>(c));
  return r;
}

namespace {

CoeffTensor shuffle_impl(const CoeffTensor& u, const CoeffTensor& v, int level, bool truncate) {
  if (u.alphabet() != v.alphabet()) throw AlphabetMismatch("shuffle: alphabet mismatch");
  CoeffTensor r(u.alphabet(), level);
  for (const auto& [wu, cu] : u.terms()) {
    for (const auto& [wv, cv] : v.terms()) {
      if (static_cast<int>(wu.size() + wv.size()) > level) {
        if (truncate) continue;
        throw TruncationError("shuffle: product exceeds level");
      }
      for (const auto& [w, c] : shuffle_counts(wu, wv)) r.add(w, cu * cv * static_cast<double>(c));
    }
  }
  return r;
}

}  // namespace

CoeffTensor shuffle(const CoeffTensor& u, const CoeffTensor& v) {
  return shuffle_impl(u, v, u.level() + v.level(), false);
}

CoeffTensor shuffle(const CoeffTensor& u, const CoeffTensor& v, int level) {
  return shuffle_impl(u, v, level, true);
}

CoeffTensor concat_tensor(const CoeffTensor& u, const Word& j) {
  return concat_tensor(u, j, u.level() + static_cast<int>(j.size()));
}

CoeffTensor concat_tensor(const CoeffTensor& u, const Word& j, int level) {
  CoeffTensor r(u.alphabet(), level);
  for (const auto& [w, c] : u.terms()) r.add(concat(w, j), c);  // add() throws on overflow
  return r;
}

Eigen::VectorXd vec(const CoeffTensor& u, const Labeling& lab) {
  if (u.alphabet() != lab.alphabet()) throw AlphabetMismatch("vec: alphabet mismatch");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(lab.size());
  for (const auto& [w, c] : u.terms()) v[lab.index_of(w)] = c;
  return v;
}

CoeffTensor unvec(const Eigen::VectorXd& v, const Labeling& lab) {
  if (v.size() != lab.size()) throw std::invalid_argument("unvec: dimension mismatch");
  CoeffTensor u(lab.alphabet(), lab.level());
  for (Index k = 0; k < v.size(); ++k)
    if (v[k] != 0.0) u.add(lab.word_at(k), v[k]);
  return u;
}

double pair(const CoeffTensor& u, const Eigen::VectorXd& x, const Labeling& lab) {
  if (u.alphabet() != lab.alphabet()) throw AlphabetMismatch("pair: alphabet mismatch");
  double s = 0.0;
  for (const auto& [w, c] : u.terms()) s += c * x[lab.index_of(w)];
  return s;
}

}  // namespace sigvol
