#include "sigvol/polyproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sigvol {

void PolyCoefficients::validate() const {
  if (static_cast<int>(b.size()) != alphabet || static_cast<int>(a.size()) != alphabet * alphabet)
    throw ConfigError("PolyCoefficients: wrong number of tensors");
  for (const auto& t : b)
    for (const auto& [w, c] : t.terms())
      if (w.size() > 1) throw ConfigError("PolyCoefficients: drift of degree > 1");
  for (int i = 0; i < alphabet; ++i)
    for (int j = 0; j < alphabet; ++j) {
      for (const auto& [w, c] : diffusion(i, j).terms())
        if (w.size() > 2) throw ConfigError("PolyCoefficients: diffusion of degree > 2");
      if (!(diffusion(i, j) == diffusion(j, i))) throw ConfigError("PolyCoefficients: a_ij != a_ji");
    }
}

PolyCoefficients build_coefficients(const ModelConfig& cfg, int alphabet) {
  if (alphabet != cfg.d + 1 && alphabet != cfg.d + 2)
    throw AlphabetMismatch("build_coefficients: alphabet must be d+1 or d+2");
  PolyCoefficients pc;
  pc.alphabet = alphabet;
  pc.b.assign(alphabet, CoeffTensor(alphabet, 1));
  pc.a.assign(alphabet * alphabet, CoeffTensor(alphabet, 2));
  pc.b[0].add(Word{}, 1.0);
  for (int j = 1; j < alphabet; ++j) {
    double k = cfg.kappa_of(j);
    pc.b[j].add(Word{}, k * (cfg.theta_of(j) - cfg.x0_of(j)));
    pc.b[j].add(Word{j}, -k);
  }
  for (int i = 1; i < alphabet; ++i)
    for (int j = 1; j < alphabet; ++j)
      pc.a[i * alphabet + j].add(Word{}, cfg.sigma_of(i) * cfg.sigma_of(j) * cfg.rho_of(i, j));
  return pc;
}

CoeffTensor apply_dual(const Word& word, const PolyCoefficients& coeffs) {
  const int len = static_cast<int>(word.size());
  CoeffTensor r(coeffs.alphabet, len);
  if (len == 0) return r;
  const int last = word.back();
  CoeffTensor head = CoeffTensor::basis(coeffs.alphabet, len - 1, word.drop_last(1));
  r += shuffle(head, coeffs.drift(last)).with_level(len);
  if (len >= 2) {
    CoeffTensor head2 = CoeffTensor::basis(coeffs.alphabet, len - 2, word.drop_last(2));
    CoeffTensor t = shuffle(head2, coeffs.diffusion(word[len - 2], last)).with_level(len);
    r += 0.5 * t;
  }
  return r;
}

DualMatrix build_G(const PolyCoefficients& coeffs, int level) {
  DualMatrix dm;
  dm.labeling = Labeling(coeffs.alphabet, level);
  const Index D = dm.labeling.size();
  std::vector<Eigen::Triplet<double>> trip;
  for (Index k = 1; k < D; ++k) {
    CoeffTensor le = apply_dual(dm.labeling.word_at(k), coeffs);
    for (const auto& [w, c] : le.terms()) trip.emplace_back(dm.labeling.index_of(w), k, c);
  }
  dm.G.resize(D, D);
  dm.G.setFromTriplets(trip.begin(), trip.end());
  dm.G.makeCompressed();
  return dm;
}

namespace {

Word remap_word(const Word& w, const std::vector<int>& to_restricted) {
  std::vector<int> l;
  l.reserve(w.size());
  for (int x : w.letters()) {
    if (x >= static_cast<int>(to_restricted.size()) || to_restricted[x] < 0)
      throw ConfigError("restrict_alphabet: letter set is not invariant under L");
    l.push_back(to_restricted[x]);
  }
  return Word(std::move(l));
}

std::vector<int> inverse_letters(std::span<const int> letters, int alphabet) {
  std::vector<int> inv(alphabet, -1);
  for (std::size_t p = 0; p < letters.size(); ++p) {
    if (letters[p] < 0 || letters[p] >= alphabet) throw AlphabetMismatch("restrict_alphabet: letter outside alphabet");
    if (inv[letters[p]] >= 0) throw ConfigError("restrict_alphabet: repeated letter");
    inv[letters[p]] = static_cast<int>(p);
  }
  return inv;
}

}  // namespace

PolyCoefficients restrict_alphabet(const PolyCoefficients& coeffs, std::span<const int> letters) {
  auto inv = inverse_letters(letters, coeffs.alphabet);
  const int m = static_cast<int>(letters.size());
  PolyCoefficients r;
  r.alphabet = m;
  auto remap = [&](const CoeffTensor& t) {
    CoeffTensor o(m, t.level());
    for (const auto& [w, c] : t.terms()) o.add(remap_word(w, inv), c);
    return o;
  };
  for (int p = 0; p < m; ++p) r.b.push_back(remap(coeffs.drift(letters[p])));
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) r.a.push_back(remap(coeffs.diffusion(letters[p], letters[q])));
  return r;
}

std::vector<Index> alphabet_embedding(const Labeling& full, std::span<const int> letters, int level) {
  inverse_letters(letters, full.alphabet());
  Labeling sub(static_cast<int>(letters.size()), level);
  std::vector<Index> emb(sub.size());
  for (Index k = 0; k < sub.size(); ++k) {
    Word w = sub.word_at(k);
    std::vector<int> l;
    for (int x : w.letters()) l.push_back(letters[x]);
    emb[k] = full.index_of(Word(std::move(l)));
  }
  return emb;
}

DualMatrix restrict_alphabet(const DualMatrix& dual, std::span<const int> letters) {
  const int level = dual.level();
  auto emb = alphabet_embedding(dual.labeling, letters, level);
  std::vector<Index> pos(dual.size(), -1);
  for (std::size_t k = 0; k < emb.size(); ++k) pos[emb[k]] = static_cast<Index>(k);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t c = 0; c < emb.size(); ++c) {
    for (SparseMatrix::InnerIterator it(dual.G, emb[c]); it; ++it) {
      if (pos[it.row()] < 0) throw ConfigError("restrict_alphabet: letter set is not invariant under L");
      trip.emplace_back(pos[it.row()], static_cast<Index>(c), it.value());
    }
  }
  DualMatrix r;
  r.labeling = Labeling(static_cast<int>(letters.size()), level);
  r.G.resize(r.labeling.size(), r.labeling.size());
  r.G.setFromTriplets(trip.begin(), trip.end());
  r.G.makeCompressed();
  return r;
}

Eigen::VectorXd project_to_alphabet(const Eigen::VectorXd& v, const Labeling& full, std::span<const int> letters,
                                    int level) {
  auto emb = alphabet_embedding(full, letters, level);
  Eigen::VectorXd r(emb.size());
  for (std::size_t k = 0; k < emb.size(); ++k) r[k] = v[emb[k]];
  return r;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exponential: matrix not square");
  if (!m.allFinite()) throw NumericalRangeError("matrix_exponential: non-finite entries");
  const Index n = m.rows();
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const double theta13 = 5.371920351148152;
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
  Eigen::MatrixXd A = m / std::ldexp(1.0, s);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd A2 = A * A;
  Eigen::MatrixXd A4 = A2 * A2;
  Eigen::MatrixXd A6 = A4 * A2;
  Eigen::MatrixXd U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  Eigen::MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  Eigen::MatrixXd R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) R = R * R;
  if (!R.allFinite()) throw NumericalRangeError("matrix_exponential: result overflowed");
  return R;
}

Eigen::MatrixXd exp_action(const SparseMatrix& m, double t, const Eigen::MatrixXd& v) {
  if (m.rows() != m.cols() || m.cols() != v.rows()) throw std::invalid_argument("exp_action: dimension mismatch");
  double norm = 0.0;
  for (Index c = 0; c < m.outerSize(); ++c) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) s += std::abs(it.value());
    norm = std::max(norm, s);
  }
  norm *= std::abs(t);
  const int stages = std::max(1, static_cast<int>(std::ceil(norm)));
  const double h = t / stages;
  Eigen::MatrixXd x = v;
  Eigen::MatrixXd term, sum;
  for (int st = 0; st < stages; ++st) {
    sum = x;
    term = x;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 80; ++k) {
      term = (h / k) * (m * term);
      sum += term;
      double tn = term.cwiseAbs().maxCoeff();
      double sn = sum.cwiseAbs().maxCoeff();
      if (tn == 0.0) break;
      if (tn + prev <= 1e-17 * sn) break;
      prev = tn;
    }
    x.swap(sum);
    if (!x.allFinite()) throw NumericalRangeError("exp_action: result overflowed");
  }
  return x;
}

namespace {

constexpr Index kDenseLimit = 600;

bool use_dense(ExpMethod method, Index n) {
  if (method == ExpMethod::Dense) return true;
  if (method == ExpMethod::Action) return false;
  return n <= kDenseLimit;
}

}  // namespace

Eigen::VectorXd expected_signature(const DualMatrix& dual, double t, const Eigen::VectorXd& state, ExpMethod method) {
  if (state.size() != dual.size()) throw std::invalid_argument("expected_signature: state dimension mismatch");
  if (t < 0) throw std::invalid_argument("expected_signature: t must be >= 0");
  Eigen::VectorXd r;
  if (t == 0.0) return state;
  if (use_dense(method, dual.size())) {
    Eigen::MatrixXd gt = Eigen::MatrixXd(dual.G.transpose()) * t;
    r = matrix_exponential(gt) * state;
  } else {
    SparseMatrix gt = dual.G.transpose();
    r = exp_action(gt, t, state);
  }
  if (!r.allFinite()) throw NumericalRangeError("expected_signature: non-finite result");
  return r;
}

Eigen::MatrixXd dual_exp_apply(const DualMatrix& dual, double t, const Eigen::MatrixXd& v, ExpMethod method) {
  if (v.rows() != dual.size()) throw std::invalid_argument("dual_exp_apply: dimension mismatch");
  if (use_dense(method, dual.size())) return matrix_exponential(Eigen::MatrixXd(dual.G) * t) * v;
  return exp_action(dual.G, t, v);
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd integrated_exponential(const DualMatrix& dual, double delta, IntegrationMethod method, int terms,
                                       int* terms_used) {
  const Index n = dual.size();
  const Eigen::MatrixXd gt = Eigen::MatrixXd(dual.G.transpose());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  switch (method) {
    case IntegrationMethod::Trapezoid: {
      if (terms < 1) throw MethodError("trapezoid: need at least one interval");
      const double h = delta / terms;
      const Eigen::MatrixXd E = matrix_exponential(gt * h);
      Eigen::MatrixXd P = I;
      Eigen::MatrixXd S = 0.5 * I;
      for (int k = 1; k < terms; ++k) {
        P = E * P;
        S += P;
      }
      P = E * P;
      S += 0.5 * P;
      return h * S;
    }
    case IntegrationMethod::Taylor: {
      const double rad = spectral_radius(gt * delta);
      if (rad >= 1.0) {
        std::ostringstream os;
        os << "taylor: spectral radius of G^T*delta is " << rad << " (must be < 1)";
        throw MethodError(os.str());
      }
      // sum_k delta^{k+1} (G^T)^k / (k+1)!
      Eigen::MatrixXd P = I * delta;
      Eigen::MatrixXd S = P;
      int used = 1;
      for (int k = 1; k < terms; ++k) {
        P = gt * P * (delta / (k + 1));
        if (P.isZero(0.0)) break;
        S += P;
        ++used;
      }
      if (terms_used) *terms_used = used;
      return S;
    }
    case IntegrationMethod::Augmented: {
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
      M.topLeftCorner(n, n) = gt * delta;
      M.topRightCorner(n, n) = I * delta;
      return matrix_exponential(M).topRightCorner(n, n);
    }
  }
  throw MethodError("integrated_exponential: unknown method");
}

}  // namespace sigvol
