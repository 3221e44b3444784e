#include "sigvol/vixcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sigvol {

Eigen::VectorXd pack_upper(const Eigen::MatrixXd& m) {
  const Index n = m.rows();
  Eigen::VectorXd v(pair_count(n));
  Index k = 0;
  for (Index p = 0; p < n; ++p)
    for (Index q = p; q < n; ++q) v[k++] = m(p, q);
  return v;
}

Eigen::MatrixXd unpack_upper(const Eigen::VectorXd& packed, Index n) {
  if (packed.size() != pair_count(n)) throw std::invalid_argument("unpack_upper: size mismatch");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Index k = 0;
  for (Index p = 0; p < n; ++p)
    for (Index q = p; q < n; ++q) m(p, q) = packed[k++];
  return m;
}

Eigen::MatrixXd unpack_symmetric(const Eigen::VectorXd& packed, Index n) {
  Eigen::MatrixXd m = unpack_upper(packed, n);
  m.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
  return m;
}

Eigen::VectorXd quadratic_weights(const Eigen::VectorXd& ell) {
  const Index n = ell.size();
  Eigen::VectorXd w(pair_count(n));
  Index k = 0;
  for (Index p = 0; p < n; ++p) {
    w[k++] = ell[p] * ell[p];
    for (Index q = p + 1; q < n; ++q) w[k++] = 2.0 * ell[p] * ell[q];
  }
  return w;
}

QAssembler::QAssembler(const ModelConfig& cfg, ExpMethod method)
    : QAssembler(build_coefficients(cfg, cfg.alphabet_x()), cfg.n, method) {}

QAssembler::QAssembler(const PolyCoefficients& bfree, int n, ExpMethod method)
    : n_(n), method_(method), param_lab_(bfree.alphabet, n), dual_(build_G(bfree, 2 * n + 1)) {
  build_u();
}

void QAssembler::build_u() {
  const Index na = param_lab_.size();
  const int A = param_lab_.alphabet();
  const Labeling& big = dual_.labeling;
  std::vector<Eigen::Triplet<double>> trip;
  Index col = 0;
  for (Index p = 0; p < na; ++p) {
    Word wi = param_lab_.word_at(p);
    for (Index q = p; q < na; ++q, ++col) {
      Word wj = param_lab_.word_at(q);
      for (const auto& [w, c] : shuffle_counts(wi, wj)) {
        Index idx = big.index_of(w.append(0));
        trip.emplace_back(idx, col, static_cast<double>(c));
      }
    }
  }
  (void)A;
  u_.resize(big.size(), pair_count(na));
  u_.setFromTriplets(trip.begin(), trip.end());
  u_.makeCompressed();
}

Eigen::MatrixXd QAssembler::window_weights(double tau) const {
  Eigen::MatrixXd ud = Eigen::MatrixXd(u_);
  Eigen::MatrixXd e = dual_exp_apply(dual_, tau, ud, method_);
  e -= ud;
  return e.transpose();
}

Eigen::VectorXd QAssembler::origin_moments(double t) const {
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(dual_.size());
  e0[0] = 1.0;
  return expected_signature(dual_, t, e0, method_);
}

QMatrix q_matrix(const Eigen::VectorXd& sig, const QAssembler& qa, const Eigen::MatrixXd& weights, double maturity,
                 double delta) {
  if (sig.size() != qa.sig_labeling().size())
    throw TruncationError("q_matrix: signature must be the B-free signature at level 2n+1");
  QMatrix q;
  q.maturity = maturity;
  q.window = delta;
  q.values = unpack_symmetric(weights * sig, qa.param_dim());
  return q;
}

QMatrix q_matrix(const Eigen::VectorXd& sig, const QAssembler& qa, double maturity, double delta) {
  return q_matrix(sig, qa, qa.window_weights(delta), maturity, delta);
}

Eigen::MatrixXd q_cv(const QAssembler& qa, double maturity, double delta) {
  Eigen::VectorXd x = qa.origin_moments(maturity + delta) - qa.origin_moments(maturity);
  Eigen::VectorXd packed = qa.u_map().transpose() * x;
  return unpack_symmetric(packed, qa.param_dim());
}

CholFactor cholesky_psd(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols()) throw std::invalid_argument("cholesky_psd: matrix not square");
  const double scale = 1.0 + q.cwiseAbs().maxCoeff();
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NumericalRangeError("cholesky_psd: matrix is not symmetric");
  const Index n = q.rows();
  Eigen::MatrixXd s = 0.5 * (q + q.transpose());
  // Cholesky of the index-reversed matrix gives an upper factor of the original.
  Eigen::MatrixXd r = s.reverse();
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  CholFactor out;
  if (llt.info() == Eigen::Success) {
    Eigen::MatrixXd l = llt.matrixL();
    if (l.allFinite() && l.diagonal().minCoeff() > 1e-7 * std::sqrt(scale)) {
      out.upper = l.reverse();
      return out;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  Eigen::MatrixXd m = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  // (J m)ᵀ = Q_r R  =>  J m mᵀ J = Rᵀ R  =>  U = J Rᵀ J
  Eigen::MatrixXd x = m.colwise().reverse().transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::MatrixXd rt = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  out.upper = rt.transpose().reverse();
  return out;
}

double vix_value(const Eigen::VectorXd& ell, const Eigen::MatrixXd& upper, double delta) {
  return (upper.transpose() * ell).norm() / std::sqrt(delta);
}

double vix_value_packed(const Eigen::VectorXd& ell, const double* packed, double delta) {
  const Index n = ell.size();
  double total = 0.0;
  // (Uᵀℓ)_q = Σ_{p<=q} U_pq ℓ_p; walk column q through the row-packed layout
  for (Index q = 0; q < n; ++q) {
    double acc = 0.0;
    for (Index p = 0; p <= q; ++p) acc += packed[pair_index(p, q, n)] * ell[p];
    total += acc * acc;
  }
  return std::sqrt(total / delta);
}

McEstimate mc_mean(std::span<const double> x) {
  McEstimate e;
  e.samples = x.size();
  if (x.empty()) return e;
  double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  e.mean = m;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) {
    e.mean = *lo;
    return e;
  }
  if (x.size() > 1) e.std_error = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return e;
}

McEstimate vix_future(const Eigen::VectorXd& ell, const Eigen::MatrixXd& factors, double delta) {
  if (factors.cols() == 0) throw std::invalid_argument("vix_future: empty sample set");
  std::vector<double> v(factors.cols());
  for (Index i = 0; i < factors.cols(); ++i) v[i] = vix_value_packed(ell, factors.col(i).data(), delta);
  return mc_mean(v);
}

VariateResult apply_control_variate(std::span<const double> payoffs, std::span<const double> variate,
                                    double variate_mean) {
  if (payoffs.size() != variate.size()) throw std::invalid_argument("control variate: size mismatch");
  VariateResult r;
  r.raw = mc_mean(payoffs);
  r.reduced = r.raw;
  r.adjusted.assign(payoffs.begin(), payoffs.end());
  const std::size_t n = payoffs.size();
  if (n < 2) return r;
  double my = std::accumulate(variate.begin(), variate.end(), 0.0) / static_cast<double>(n);
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (payoffs[i] - r.raw.mean) * (variate[i] - my);
    var += (variate[i] - my) * (variate[i] - my);
  }
  cov /= static_cast<double>(n - 1);
  var /= static_cast<double>(n - 1);
  if (var < 1e-16) return r;
  const double c = cov / var;
  std::vector<double> adj(n);
  for (std::size_t i = 0; i < n; ++i) adj[i] = payoffs[i] - c * (variate[i] - variate_mean);
  McEstimate red = mc_mean(adj);
  if (red.std_error * red.std_error > 1.01 * r.raw.std_error * r.raw.std_error) return r;
  r.reduced = red;
  r.coefficient = c;
  r.applied = true;
  r.adjusted = std::move(adj);
  return r;
}

VariateResult vix_control_variate(const Eigen::VectorXd& ell, std::span<const double> vix,
                                  std::span<const double> payoffs, const Eigen::MatrixXd& qcv, double delta, int m,
                                  const Eigen::MatrixXd* moment) {
  if (m != 1 && m != 2) throw std::invalid_argument("vix_control_variate: m must be 1 or 2");
  const std::size_t n = vix.size();
  const double ev2 = ell.dot(qcv * ell) / delta;
  std::vector<double> y(n);
  if (m == 1) {
    for (std::size_t i = 0; i < n; ++i) y[i] = vix[i] * vix[i];
    return apply_control_variate(payoffs, y, ev2);
  }
  if (!moment) throw std::invalid_argument("vix_control_variate: m = 2 needs a moment source");
  Eigen::VectorXd w = quadratic_weights(ell);
  const double ev4 = w.dot(*moment * w) / (delta * delta);
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd p(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v2 = vix[i] * vix[i];
    X(i, 0) = 1.0;
    X(i, 1) = v2;
    X(i, 2) = v2 * v2;
    p[i] = payoffs[i];
  }
  Eigen::Vector3d alpha = X.colPivHouseholderQr().solve(p);
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha[1] * X(i, 1) + alpha[2] * X(i, 2);
  return apply_control_variate(payoffs, y, alpha[1] * ev2 + alpha[2] * ev4);
}

void ParamSlices::validate() const {
  if (starts.empty()) throw ConfigError("slices: empty");
  if (starts[0] != 0.0) throw ConfigError("slices: first slice must start at 0");
  if (params.size() != starts.size()) throw ConfigError("slices: one parameter vector per slice required");
  for (std::size_t i = 1; i < starts.size(); ++i)
    if (!(starts[i] > starts[i - 1])) throw ConfigError("slices: starts must be strictly increasing");
  for (const auto& p : params)
    if (p.size() != params[0].size()) throw ConfigError("slices: parameter dimensions differ");
}

Index ParamSlices::slice_at(double t) const {
  Index i = 0;
  while (i + 1 < static_cast<Index>(starts.size()) && starts[i + 1] <= t) ++i;
  return i;
}

double ParamSlices::end_of(std::size_t i) const {
  return i + 1 < starts.size() ? starts[i + 1] : std::numeric_limits<double>::infinity();
}

ParamSlices constant_slices(const Eigen::VectorXd& ell) {
  ParamSlices s;
  s.starts = {0.0};
  s.params = {ell};
  return s;
}

std::vector<WindowPiece> vix_window_pieces(const ParamSlices& slices, double maturity, double delta) {
  slices.validate();
  std::vector<WindowPiece> out;
  const double end = maturity + delta;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const double lo = slices.starts[i], hi = slices.end_of(i);
    if (hi <= maturity || lo >= end) continue;
    WindowPiece w;
    w.slice = i;
    w.tau_lo = lo <= maturity ? 0.0 : lo - maturity;
    w.tau_hi = hi >= end ? delta : hi - maturity;
    if (w.tau_hi > w.tau_lo) out.push_back(w);
  }
  return out;
}

double vix_tv(const ParamSlices& slices, double maturity, double delta,
              const std::function<Eigen::MatrixXd(double)>& q_at) {
  double total = 0.0;
  for (const auto& w : vix_window_pieces(slices, maturity, delta)) {
    const Eigen::VectorXd& l = slices.params[w.slice];
    double v = l.dot(q_at(w.tau_hi) * l);
    if (w.tau_lo > 0) v -= l.dot(q_at(w.tau_lo) * l);
    total += v;
  }
  return std::sqrt(std::max(0.0, total / delta));
}

}  // namespace sigvol
