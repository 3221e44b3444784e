#include "sigvol/spxcore.hpp"

#include <cmath>

namespace sigvol {

ItoCoeffFamily e_tilde_coeffs(const ModelConfig& cfg) {
  ItoCoeffFamily f;
  f.words = Labeling(cfg.alphabet_x(), cfg.n);
  f.full_alphabet = cfg.alphabet_z();
  const int B = cfg.price_letter();
  for (Index k = 0; k < f.words.size(); ++k) {
    Word w = f.words.word_at(k);
    const int len = static_cast<int>(w.size());
    CoeffTensor t(f.full_alphabet, len + 1);
    t.add(w.append(B), 1.0);
    if (len > 0 && w.back() != 0) {
      double c = cfg.sigma_of(w.back()) * cfg.rho_of(w.back(), B);
      t.add(w.drop_last(1).append(0), -0.5 * c);
    }
    f.e_tilde.push_back(std::move(t));
  }
  return f;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> ItoCoeffFamily::matrix() const {
  Labeling full(full_alphabet, words.level() + 1);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < e_tilde.size(); ++k)
    for (const auto& [w, c] : e_tilde[k].terms()) trip.emplace_back(static_cast<Index>(k), full.index_of(w), c);
  Eigen::SparseMatrix<double, Eigen::RowMajor> m(words.size(), full.size());
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

QZero q0_matrix(const Eigen::VectorXd& sig, const QAssembler& qa, double time) {
  if (sig.size() != qa.sig_labeling().size())
    throw TruncationError("q0_matrix: signature must be the B-free signature at level 2n+1");
  QZero z;
  z.time = time;
  Eigen::VectorXd packed = qa.u_map().transpose() * sig;
  z.values = unpack_symmetric(packed, qa.param_dim());
  return z;
}

Eigen::MatrixXd q0_cv(const QAssembler& qa, double maturity) {
  Eigen::VectorXd packed = qa.u_map().transpose() * qa.origin_moments(maturity);
  return unpack_symmetric(packed, qa.param_dim());
}

double log_price(const Eigen::VectorXd& ell, const Eigen::MatrixXd& q0, const Eigen::VectorXd& contractions) {
  return -0.5 * ell.dot(q0 * ell) + ell.dot(contractions);
}

namespace {

template <typename M>
const typename M::mapped_type& at_time(const M& m, double t, const char* what) {
  auto it = m.lower_bound(t - 1e-12);
  if (it == m.end() || std::abs(it->first - t) > 1e-12)
    throw std::out_of_range(std::string("log_price_tv: missing running ") + what + " at t=" + std::to_string(t));
  return it->second;
}

}  // namespace

double log_price_tv(const ParamSlices& slices, double t, const RunningValues& running) {
  slices.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const double a = std::min(t, slices.starts[i]);
    const double b = std::min(t, slices.end_of(i));
    if (!(b > a)) continue;
    const Eigen::MatrixXd& qb = at_time(running.q0, b, "Q0");
    const Eigen::VectorXd& cb = at_time(running.contractions, b, "contractions");
    Eigen::MatrixXd dq = qb;
    Eigen::VectorXd dc = cb;
    if (a > 0) {
      dq -= at_time(running.q0, a, "Q0");
      dc -= at_time(running.contractions, a, "contractions");
    }
    total += log_price(slices.params[i], dq, dc);
  }
  return total;
}

Undiscounted undiscount(double s, double r, double q, double maturity) {
  if (!std::isfinite(r) || !std::isfinite(q)) throw std::invalid_argument("undiscount: non-finite rate");
  return {std::exp((r - q) * maturity) * s};
}

double call_payoff(double s_tilde, double strike, double r, double maturity) {
  return std::exp(-r * maturity) * std::max(s_tilde - strike, 0.0);
}

VariateResult spx_control_variate(const Eigen::VectorXd& ell, std::span<const double> log_s,
                                  std::span<const double> payoffs, const Eigen::MatrixXd& q0cv) {
  const double shift = 0.5 * ell.dot(q0cv * ell);
  std::vector<double> y(log_s.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = log_s[i] + shift;
  return apply_control_variate(payoffs, y, 0.0);
}

double novikov_statistic(const Eigen::VectorXd& ell, const Eigen::MatrixXd& q0_packed) {
  Eigen::VectorXd w = quadratic_weights(ell);
  Eigen::VectorXd v = q0_packed.transpose() * w;
  return (0.5 * v.array()).exp().mean();
}

}  // namespace sigvol
