#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigvol/config.hpp"
#include "sigvol/store.hpp"
#include "sigvol/vixcore.hpp"

namespace sigvol {

double norm_cdf(double x);
double norm_pdf(double x);

// Black–Scholes call on a spot (or discounted forward e^{-rT}F).
double bs_call(double spot, double strike, double sigma, double maturity, double r);
double bs_vega(double spot, double strike, double sigma, double maturity, double r);
double bs_delta(double spot, double strike, double sigma, double maturity, double r);
// Bracket [1e-4, 5], bisection then Newton. Throws ArbitrageViolation outside (intrinsic, spot).
double implied_vol(double price, double spot, double strike, double maturity, double r);

enum class Instrument { SPX, VIX };
std::string to_string(Instrument i);

struct Quote {
  Instrument instrument = Instrument::SPX;
  double maturity = 0.0;
  double strike = 0.0;
  double bid = 0.0;
  double ask = 0.0;
  double iv_bid = 0.0;
  double iv_ask = 0.0;
  double future = 0.0;  // VIX future or SPX forward
  double rate = 0.0;
  double dividend = 0.0;
  std::size_t line = 0;
};

struct QuoteBook {
  std::vector<Quote> quotes;
  std::vector<std::string> warnings;
  std::vector<double> maturities(Instrument i) const;
};

double smooth_step(double x);  // ½tanh(100x) + ½

struct QuoteLossInput {
  double model_price = 0.0;
  double bid = 0.0, ask = 0.0;
  double iv_bid = 0.0, iv_ask = 0.0;
  double vega = 0.0, delta = 0.0;
  bool with_future = false;
  double future_model = 0.0, future_market = 0.0;
  double rate = 0.0, maturity = 0.0;
};

double loss_quote(const QuoteLossInput& in, double beta);
double loss_joint(double loss_spx, double loss_vix, double lambda);
double futures_error(double future_market, double future_model);

// d_< x A_n with N(0, 1/d_<) entries; rejects d_< >= A_n
Eigen::MatrixXd randomized_projection(int d_small, Index a_n, std::uint64_t seed);

struct QuotePricing {
  double price = 0.0;  // quote units
  double std_error = 0.0;
};

struct EngineOptions {
  double vix_scale = 1.0;
  int vix_control_variate = 0;
  bool spx_control_variate = false;
  const QAssembler* assembler = nullptr;  // needed for control variates
  const Eigen::MatrixXd* vix_moment = nullptr;
};

// Prices a quote book from a sample store as a function of (possibly sliced) ℓ.
class PricingEngine {
 public:
  PricingEngine(const SampleStore& store, const QuoteBook& book, EngineOptions opt = {});

  struct Result {
    std::vector<QuotePricing> quotes;
    std::vector<double> vix_future;     // per VIX maturity (quote units), see vix_maturities()
    std::vector<double> vix_future_se;
    std::vector<double> spx_forward;    // per SPX maturity, in units of S_0 = 1
  };

  // active: optional per-quote mask; maturities without active quotes are skipped
  Result evaluate(const ParamSlices& slices, const std::vector<char>* active = nullptr) const;

  const QuoteBook& book() const { return book_; }
  const std::vector<double>& vix_maturities() const { return vix_mats_; }
  const std::vector<double>& spx_maturities() const { return spx_mats_; }
  std::size_t maturity_slot(std::size_t quote) const { return slot_[quote]; }
  double delta() const { return store_.config.delta; }
  const SampleStore& store() const { return store_; }

 private:
  const SampleStore& store_;
  QuoteBook book_;
  EngineOptions opt_;
  std::vector<double> vix_mats_, spx_mats_;
  std::vector<std::size_t> slot_;
};

struct LossWeights {
  std::vector<double> vega, delta;  // market Greeks per quote at the mid vol
  std::vector<char> usable;
};
LossWeights loss_weights(const QuoteBook& book, std::vector<std::string>* warnings = nullptr);

// per-quote residuals with squaredNorm() == total_loss
Eigen::VectorXd loss_residuals(const PricingEngine& engine, const PricingEngine::Result& r, const LossWeights& w,
                               const LossSettings& s, const std::vector<char>* active = nullptr);
double total_loss(const PricingEngine& engine, const PricingEngine::Result& r, const LossWeights& w,
                  const LossSettings& s, const std::vector<char>* active = nullptr);

struct TraceRow {
  int iteration = 0;
  int evaluations = 0;
  double loss = 0.0;
  double best_loss = 0.0;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  int iterations = 0;
  std::vector<TraceRow> trace;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

OptimResult optimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, int budget);
OptimResult optimize_es(const Objective& f, const Eigen::VectorXd& x0, int budget, std::uint64_t seed);
// median SPX mid vol, or the median VIX future level without SPX quotes; 0 if neither
double flat_vol_level(const QuoteBook& book, double vix_quote_scale);
using Residuals = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// Levenberg–Marquardt on a residual vector with forward-difference Jacobians.
// Leftover budget goes to random restarts around the best point.
OptimResult optimize_lm(const Residuals& r, const Eigen::VectorXd& x0, int budget, std::uint64_t seed);
OptimResult optimize(const Objective& f, const Eigen::VectorXd& x0, const OptimizerSettings& s);

struct InitialGuess {
  Eigen::VectorXd x;
  double f = 0.0;
  int box = 0;  // 1-based scale index i of J_i = [-10^-i, 10^-i]
  int evaluations = 0;
};

InitialGuess initial_guess(const Objective& f, Index dim, int n_ell, int boxes, std::uint64_t seed);

struct QuoteFit {
  Quote quote;
  double model_price = 0.0;
  double std_error = 0.0;
  double model_iv = 0.0;  // NaN if the price cannot be inverted
  bool inside = false;
};

struct FutureFit {
  double maturity = 0.0;
  double market = 0.0;
  double model = 0.0;
  double rel_error = 0.0;
};

struct CalibReport {
  ParamSlices slices;
  Eigen::MatrixXd projection;  // empty unless a random projection was used
  std::vector<QuoteFit> quotes;
  std::vector<FutureFit> futures;
  double loss = 0.0;
  int evaluations = 0;
  std::vector<TraceRow> trace;
};

// Per-quote model prices, IVs (from model futures/forwards) and futures errors.
void fill_fit(const PricingEngine& engine, const ParamSlices& slices, CalibReport& report);

// Constant or rolling time-varying calibration depending on cfg.
CalibReport calibrate(const RunConfig& cfg, const PricingEngine& engine);

}  // namespace sigvol
