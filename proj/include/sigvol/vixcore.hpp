#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sigvol/model.hpp"
#include "sigvol/polyproc.hpp"
#include "sigvol/sigtensor.hpp"

namespace sigvol {

// Packed storage of the upper triangle (p <= q), row by row.
inline Index pair_count(Index n) { return n * (n + 1) / 2; }
inline Index pair_index(Index p, Index q, Index n) { return p * n - p * (p - 1) / 2 + (q - p); }
Eigen::VectorXd pack_upper(const Eigen::MatrixXd& m);
Eigen::MatrixXd unpack_upper(const Eigen::VectorXd& packed, Index n);
Eigen::MatrixXd unpack_symmetric(const Eigen::VectorXd& packed, Index n);
// weights w with w·pack_upper(Q) = ℓᵀQℓ for symmetric Q
Eigen::VectorXd quadratic_weights(const Eigen::VectorXd& ell);

struct QMatrix {
  double maturity = 0.0;
  double window = 0.0;
  Eigen::MatrixXd values;
};

struct CholFactor {
  Eigen::MatrixXd upper;  // Q = U Uᵀ
};

// Shared structures for Q-type matrices of a model at truncation n:
// the B-free dual matrix at level 2n+1 and the columns vec((e_I⧢e_J)⊗e_0).
class QAssembler {
 public:
  explicit QAssembler(const ModelConfig& cfg, ExpMethod method = ExpMethod::Auto);
  QAssembler(const PolyCoefficients& bfree, int n, ExpMethod method = ExpMethod::Auto);

  int n() const { return n_; }
  const Labeling& param_labeling() const { return param_lab_; }
  const Labeling& sig_labeling() const { return dual_.labeling; }
  const DualMatrix& dual() const { return dual_; }
  const SparseMatrix& u_map() const { return u_; }  // D x P
  Index param_dim() const { return param_lab_.size(); }
  Index pairs() const { return u_.cols(); }

  // P x D rows vec(u_IJ)ᵀ(e^{τGᵀ} − Id); Q(T,τ) packed = W·sig_T
  Eigen::MatrixXd window_weights(double tau) const;
  // e^{tGᵀ}e_∅
  Eigen::VectorXd origin_moments(double t) const;

 private:
  void build_u();

  int n_ = 0;
  ExpMethod method_;
  Labeling param_lab_;
  DualMatrix dual_;
  SparseMatrix u_;
};

QMatrix q_matrix(const Eigen::VectorXd& sig, const QAssembler& qa, double maturity, double delta);
QMatrix q_matrix(const Eigen::VectorXd& sig, const QAssembler& qa, const Eigen::MatrixXd& weights,
                 double maturity, double delta);
// Q^cv(T,Δ) with ℓᵀQ^cvℓ = E[ℓᵀQ(T,Δ)ℓ]
Eigen::MatrixXd q_cv(const QAssembler& qa, double maturity, double delta);

CholFactor cholesky_psd(const Eigen::MatrixXd& q);

double vix_value(const Eigen::VectorXd& ell, const Eigen::MatrixXd& upper, double delta);
// same with U packed by pack_upper
double vix_value_packed(const Eigen::VectorXd& ell, const double* packed, double delta);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};
McEstimate mc_mean(std::span<const double> x);

// factors: P x N packed upper factors
McEstimate vix_future(const Eigen::VectorXd& ell, const Eigen::MatrixXd& factors, double delta);

struct VariateResult {
  McEstimate raw;
  McEstimate reduced;
  double coefficient = 0.0;
  bool applied = false;
  std::vector<double> adjusted;
};

// payoff − c*(Y − E[Y]) with empirical c*; raw payoffs returned if Var(Y) < 1e-16 or the
// adjusted variance exceeds the raw one by more than 1%.
VariateResult apply_control_variate(std::span<const double> payoffs, std::span<const double> variate,
                                    double variate_mean);

// m = 1: Y = VIX². m = 2: Y = α1·VIX² + α2·VIX⁴ with α by least squares, E[VIX⁴] from the
// second-moment matrix of packed Q (moment, P x P), required for m = 2.
VariateResult vix_control_variate(const Eigen::VectorXd& ell, std::span<const double> vix,
                                  std::span<const double> payoffs, const Eigen::MatrixXd& qcv, double delta, int m,
                                  const Eigen::MatrixXd* moment = nullptr);

// Piecewise-constant parameters: slice i is active on [starts[i], starts[i+1]).
struct ParamSlices {
  std::vector<double> starts;  // starts[0] = 0
  std::vector<Eigen::VectorXd> params;

  void validate() const;
  Index slice_at(double t) const;
  std::size_t size() const { return starts.size(); }
  double end_of(std::size_t i) const;
};

ParamSlices constant_slices(const Eigen::VectorXd& ell);

struct WindowPiece {
  std::size_t slice;
  double tau_lo;
  double tau_hi;
};

// slices overlapping [T, T+Δ), with τ offsets relative to T
std::vector<WindowPiece> vix_window_pieces(const ParamSlices& slices, double maturity, double delta);

// VIX_T per sample. q_at(τ) returns Q(T,τ) for this sample (τ > 0); it should throw if τ is unavailable.
double vix_tv(const ParamSlices& slices, double maturity, double delta,
              const std::function<Eigen::MatrixXd(double)>& q_at);

}  // namespace sigvol
