#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sigvol/model.hpp"
#include "sigvol/sigtensor.hpp"
#include "sigvol/vixcore.hpp"

namespace sigvol {

// ẽ_I^B for every B-free word |I| <= n, over the full alphabet {0..d+1}.
struct ItoCoeffFamily {
  Labeling words;                    // B-free labeling, level n
  int full_alphabet = 0;             // d+2
  std::vector<CoeffTensor> e_tilde;  // indexed like `words`

  // rows = words, columns = full-alphabet labeling at level n+1
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix() const;
};

ItoCoeffFamily e_tilde_coeffs(const ModelConfig& cfg);

struct QZero {
  double time = 0.0;
  Eigen::MatrixXd values;
};

QZero q0_matrix(const Eigen::VectorXd& sig, const QAssembler& qa, double time = 0.0);
// Q^{0,cv}(T): ℓᵀQ^{0,cv}ℓ = E[ℓᵀQ⁰(T)ℓ]
Eigen::MatrixXd q0_cv(const QAssembler& qa, double maturity);

// log S_t with S_0 = 1
double log_price(const Eigen::VectorXd& ell, const Eigen::MatrixXd& q0, const Eigen::VectorXd& contractions);

// Running values at slice times keyed by time (time 0 is implicit zero).
struct RunningValues {
  std::map<double, Eigen::MatrixXd> q0;
  std::map<double, Eigen::VectorXd> contractions;
};

double log_price_tv(const ParamSlices& slices, double t, const RunningValues& running);

struct Undiscounted {
  double forward_value;  // S̃_T = e^{(r−q)T} S_T
};
Undiscounted undiscount(double s, double r, double q, double maturity);
double call_payoff(double s_tilde, double strike, double r, double maturity);

// Φ = c*(log S_T + ½ℓᵀQ^{0,cv}ℓ)
VariateResult spx_control_variate(const Eigen::VectorXd& ell, std::span<const double> log_s,
                                  std::span<const double> payoffs, const Eigen::MatrixXd& q0cv);

// mean of exp(½ℓᵀQ⁰ℓ) across samples; a diagnostic, large values hint at a strict local martingale
double novikov_statistic(const Eigen::VectorXd& ell, const Eigen::MatrixXd& q0_packed);

}  // namespace sigvol
