#include "sigvol/calib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sigvol/spxcore.hpp"

namespace sigvol {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

namespace {

void check_finite(std::initializer_list<double> xs, const char* who) {
  for (double x : xs)
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace

double bs_call(double spot, double strike, double sigma, double maturity, double r) {
  check_finite({spot, strike, sigma, maturity, r}, "bs_call");
  const double df = std::exp(-r * maturity);
  const double sd = sigma * std::sqrt(maturity);
  if (sd < 1e-14) return std::max(spot - strike * df, 0.0);
  const double d1 = (std::log(spot / strike) + (r + 0.5 * sigma * sigma) * maturity) / sd;
  const double d2 = d1 - sd;
  return spot * norm_cdf(d1) - strike * df * norm_cdf(d2);
}

double bs_vega(double spot, double strike, double sigma, double maturity, double r) {
  check_finite({spot, strike, sigma, maturity, r}, "bs_vega");
  const double sd = sigma * std::sqrt(maturity);
  if (sd < 1e-14) return 0.0;
  const double d1 = (std::log(spot / strike) + (r + 0.5 * sigma * sigma) * maturity) / sd;
  return spot * norm_pdf(d1) * std::sqrt(maturity);
}

double bs_delta(double spot, double strike, double sigma, double maturity, double r) {
  check_finite({spot, strike, sigma, maturity, r}, "bs_delta");
  const double sd = sigma * std::sqrt(maturity);
  if (sd < 1e-14) return spot > strike * std::exp(-r * maturity) ? 1.0 : 0.0;
  const double d1 = (std::log(spot / strike) + (r + 0.5 * sigma * sigma) * maturity) / sd;
  return norm_cdf(d1);
}

double implied_vol(double price, double spot, double strike, double maturity, double r) {
  check_finite({price, spot, strike, maturity, r}, "implied_vol");
  const double lower = std::max(spot - strike * std::exp(-r * maturity), 0.0);
  auto fail = [&](const char* why) {
    std::ostringstream os;
    os << "implied_vol: price " << price << " " << why << " (intrinsic " << lower << ", spot " << spot
       << ", strike " << strike << ", T " << maturity << ")";
    throw ArbitrageViolation(os.str());
  };
  if (price <= lower) fail("not above intrinsic value");
  if (price >= spot) fail("not below spot");
  double lo = 1e-4, hi = 5.0;
  if (price < bs_call(spot, strike, lo, maturity, r)) fail("below the vol bracket");
  if (price > bs_call(spot, strike, hi, maturity, r)) fail("above the vol bracket");
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    double mid = 0.5 * (lo + hi);
    if (bs_call(spot, strike, mid, maturity, r) < price)
      lo = mid;
    else
      hi = mid;
  }
  double s = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    double diff = bs_call(spot, strike, s, maturity, r) - price;
    if (std::abs(diff) <= 1e-14) break;
    double v = bs_vega(spot, strike, s, maturity, r);
    if (v <= 0) break;
    double ns = s - diff / v;
    if (!(ns > lo - 1e-12 && ns < hi + 1e-12)) break;
    s = ns;
  }
  return s;
}

std::string to_string(Instrument i) { return i == Instrument::SPX ? "SPX" : "VIX"; }

std::vector<double> QuoteBook::maturities(Instrument ins) const {
  std::vector<double> m;
  for (const auto& q : quotes)
    if (q.instrument == ins) m.push_back(q.maturity);
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), m.end());
  return m;
}

double smooth_step(double x) { return 0.5 * std::tanh(100.0 * x) + 0.5; }

double loss_quote(const QuoteLossInput& in, double beta) {
  if (!(in.iv_ask > in.iv_bid)) throw std::invalid_argument("loss_quote: need iv_ask > iv_bid");
  if (!(in.vega > 0)) throw std::invalid_argument("loss_quote: need vega > 0");
  const double mid = 0.5 * (in.bid + in.ask);
  const double outside = smooth_step(in.bid - in.model_price) + smooth_step(in.model_price - in.ask);
  double num = (beta * outside + (1.0 - beta)) * std::abs(in.model_price - mid);
  if (in.with_future)
    num += std::abs(in.delta * std::exp(-in.rate * in.maturity) * (in.future_model - in.future_market));
  const double r = num / (in.vega * (in.iv_ask - in.iv_bid));
  return r * r;
}

double loss_joint(double loss_spx, double loss_vix, double lambda) {
  if (!(lambda > 0 && lambda < 1)) throw std::invalid_argument("loss_joint: lambda must lie in (0,1)");
  return lambda * loss_spx + (1.0 - lambda) * loss_vix;
}

double futures_error(double future_market, double future_model) {
  if (!(future_market > 0)) throw std::invalid_argument("futures_error: market future must be > 0");
  return std::abs(future_market - future_model) / future_market;
}

Eigen::MatrixXd randomized_projection(int d_small, Index a_n, std::uint64_t seed) {
  if (d_small < 1 || d_small >= a_n) throw ConfigError("randomized_projection: need 1 <= d_< < A_n");
  std::mt19937_64 eng(splitmix64(seed));
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(d_small)));
  Eigen::MatrixXd a(d_small, a_n);
  for (Index j = 0; j < a_n; ++j)
    for (Index i = 0; i < d_small; ++i) a(i, j) = nd(eng);
  return a;
}

// ---------------------------------------------------------------- engine

namespace {

std::size_t find_slot(const std::vector<double>& mats, double t) {
  for (std::size_t i = 0; i < mats.size(); ++i)
    if (std::abs(mats[i] - t) < 1e-12) return i;
  throw std::logic_error("maturity slot not found");
}

}  // namespace

PricingEngine::PricingEngine(const SampleStore& store, const QuoteBook& book, EngineOptions opt)
    : store_(store), book_(book), opt_(opt) {
  vix_mats_ = book_.maturities(Instrument::VIX);
  spx_mats_ = book_.maturities(Instrument::SPX);
  for (double t : vix_mats_) store_.at(t);
  for (double t : spx_mats_) store_.at(t);
  slot_.resize(book_.quotes.size());
  for (std::size_t i = 0; i < book_.quotes.size(); ++i) {
    const auto& q = book_.quotes[i];
    slot_[i] = find_slot(q.instrument == Instrument::VIX ? vix_mats_ : spx_mats_, q.maturity);
  }
  if ((opt_.vix_control_variate > 0 || opt_.spx_control_variate) && !opt_.assembler)
    throw ConfigError("engine: control variates need a QAssembler");
  if (opt_.vix_control_variate == 2 && !opt_.vix_moment) throw ConfigError("engine: m = 2 needs a moment matrix");
}

PricingEngine::Result PricingEngine::evaluate(const ParamSlices& slices, const std::vector<char>* active) const {
  slices.validate();
  const double delta = store_.config.delta;
  const bool constant = slices.size() == 1;
  const ParamSlices snapped = snap_slices(slices, store_);
  const Index dim = store_.blocks.front().ito.rows();
  for (const auto& p : slices.params)
    if (p.size() != dim)
      throw ConfigError("engine: parameter vector has " + std::to_string(p.size()) + " entries, expected " +
                        std::to_string(dim));
  Result res;
  res.quotes.assign(book_.quotes.size(), {});
  res.vix_future.assign(vix_mats_.size(), 0.0);
  res.vix_future_se.assign(vix_mats_.size(), 0.0);
  res.spx_forward.assign(spx_mats_.size(), 0.0);
  std::vector<char> vix_on(vix_mats_.size(), 0), spx_on(spx_mats_.size(), 0);
  for (std::size_t i = 0; i < book_.quotes.size(); ++i) {
    if (active && !(*active)[i]) continue;
    (book_.quotes[i].instrument == Instrument::VIX ? vix_on : spx_on)[slot_[i]] = 1;
  }
  const Index N = static_cast<Index>(store_.n_paths);
  std::vector<double> x(N), pay(N);

  for (std::size_t m = 0; m < vix_mats_.size(); ++m) {
    if (!vix_on[m]) continue;
    const MaturityBlock& blk = store_.at(vix_mats_[m]);
    std::vector<std::pair<const WindowFactors*, std::size_t>> pieces;
    for (const auto& w : vix_window_pieces(snapped, blk.time, delta)) {
      const auto fs = blk.cover(w.tau_lo, w.tau_hi);
      if (fs.empty()) {
        std::ostringstream os;
        os << "store lacks VIX factors for T=" << vix_mats_[m] << " window [" << w.tau_lo << "," << w.tau_hi << "]";
        throw StoreError(os.str());
      }
      for (const auto* f : fs) pieces.emplace_back(f, w.slice);
    }
    for (Index i = 0; i < N; ++i) {
      double s2 = 0.0;
      for (const auto& [f, j] : pieces) {
        double v = vix_value_packed(slices.params[j], f->packed.col(i).data(), 1.0);
        s2 += v * v;
      }
      x[i] = std::sqrt(s2 / delta);
    }
    std::vector<double> scaled(N);
    for (Index i = 0; i < N; ++i) scaled[i] = opt_.vix_scale * x[i];
    McEstimate fut = mc_mean(scaled);
    res.vix_future[m] = fut.mean;
    res.vix_future_se[m] = fut.std_error;
    Eigen::MatrixXd qcv;
    if (constant && opt_.vix_control_variate > 0) qcv = q_cv(*opt_.assembler, blk.time, delta);
    for (std::size_t qi = 0; qi < book_.quotes.size(); ++qi) {
      const Quote& q = book_.quotes[qi];
      if (q.instrument != Instrument::VIX || slot_[qi] != m || (active && !(*active)[qi])) continue;
      const double df = std::exp(-q.rate * q.maturity);
      for (Index i = 0; i < N; ++i) pay[i] = df * std::max(scaled[i] - q.strike, 0.0);
      McEstimate e = mc_mean(pay);
      if (constant && opt_.vix_control_variate > 0) {
        e = vix_control_variate(slices.params[0], x, pay, qcv, delta, opt_.vix_control_variate, opt_.vix_moment)
                .reduced;
      }
      res.quotes[qi] = {e.mean, e.std_error};
    }
  }

  for (std::size_t m = 0; m < spx_mats_.size(); ++m) {
    if (!spx_on[m]) continue;
    const double T = spx_mats_[m];
    Eigen::VectorXd ls = Eigen::VectorXd::Zero(N);
    for (std::size_t j = 0; j < slices.size(); ++j) {
      const double a = std::min(T, slices.starts[j]);
      const double b = std::min(T, slices.end_of(j));
      if (!(b > a)) continue;
      const Eigen::VectorXd& l = slices.params[j];
      const Eigen::VectorXd w = quadratic_weights(l);
      const MaturityBlock& bb = store_.at(b);
      ls.noalias() += -0.5 * (bb.q0.transpose() * w) + bb.ito.transpose() * l;
      if (a > 0) {
        const MaturityBlock& ba = store_.at(a);
        ls.noalias() -= -0.5 * (ba.q0.transpose() * w) + ba.ito.transpose() * l;
      }
    }
    Eigen::VectorXd s = ls.array().exp();
    res.spx_forward[m] = s.mean();
    Eigen::MatrixXd q0cv;
    if (constant && opt_.spx_control_variate) q0cv = sigvol::q0_cv(*opt_.assembler, store_.at(T).time);
    std::vector<double> lsv(ls.data(), ls.data() + N);
    for (std::size_t qi = 0; qi < book_.quotes.size(); ++qi) {
      const Quote& q = book_.quotes[qi];
      if (q.instrument != Instrument::SPX || slot_[qi] != m || (active && !(*active)[qi])) continue;
      const double growth = std::exp((q.rate - q.dividend) * q.maturity);
      const double s0 = q.future / growth;
      const double k = q.strike / s0;
      const double df = std::exp(-q.rate * q.maturity);
      for (Index i = 0; i < N; ++i) pay[i] = s0 * df * std::max(growth * s[i] - k, 0.0);
      McEstimate e = mc_mean(pay);
      if (constant && opt_.spx_control_variate) e = spx_control_variate(slices.params[0], lsv, pay, q0cv).reduced;
      res.quotes[qi] = {e.mean, e.std_error};
    }
  }
  return res;
}

LossWeights loss_weights(const QuoteBook& book, std::vector<std::string>* warnings) {
  LossWeights w;
  const std::size_t n = book.quotes.size();
  w.vega.assign(n, 0.0);
  w.delta.assign(n, 0.0);
  w.usable.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Quote& q = book.quotes[i];
    const double xi = std::exp(-q.rate * q.maturity) * q.future;
    const double sm = 0.5 * (q.iv_bid + q.iv_ask);
    double v = 0.0, d = 0.0;
    if (xi > 0 && sm > 0) {
      v = bs_vega(xi, q.strike, sm, q.maturity, q.rate);
      d = bs_delta(xi, q.strike, sm, q.maturity, q.rate);
    }
    w.vega[i] = v;
    w.delta[i] = d;
    if (v < 1e-8 || !(q.iv_ask > q.iv_bid)) {
      if (warnings) {
        std::ostringstream os;
        os << "quote excluded from loss (" << to_string(q.instrument) << " T=" << q.maturity << " K=" << q.strike
           << "): " << (v < 1e-8 ? "vega below 1e-8" : "empty vol spread");
        warnings->push_back(os.str());
      }
      continue;
    }
    w.usable[i] = 1;
  }
  return w;
}

Eigen::VectorXd loss_residuals(const PricingEngine& engine, const PricingEngine::Result& r, const LossWeights& w,
                               const LossSettings& s, const std::vector<char>* active) {
  const auto& quotes = engine.book().quotes;
  double ws = 1.0, wv = 1.0;
  switch (s.mode) {
    case LossMode::Vix: ws = 0.0; break;
    case LossMode::Spx: wv = 0.0; break;
    case LossMode::Joint:
      loss_joint(0.0, 0.0, s.lambda);  // validates lambda
      ws = s.lambda;
      wv = 1.0 - s.lambda;
      break;
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Index>(quotes.size()));
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    if (!w.usable[i] || (active && !(*active)[i])) continue;
    const Quote& q = quotes[i];
    QuoteLossInput in;
    in.model_price = r.quotes[i].price;
    in.bid = q.bid;
    in.ask = q.ask;
    in.iv_bid = q.iv_bid;
    in.iv_ask = q.iv_ask;
    in.vega = w.vega[i];
    in.delta = w.delta[i];
    in.rate = q.rate;
    in.maturity = q.maturity;
    double wt = ws;
    if (q.instrument == Instrument::VIX) {
      in.with_future = true;
      in.future_model = r.vix_future[engine.maturity_slot(i)];
      in.future_market = q.future;
      wt = wv;
    }
    if (wt > 0) out[static_cast<Index>(i)] = std::sqrt(wt * loss_quote(in, s.beta));
  }
  return out;
}

double total_loss(const PricingEngine& engine, const PricingEngine::Result& r, const LossWeights& w,
                  const LossSettings& s, const std::vector<char>* active) {
  return loss_residuals(engine, r, w, s, active).squaredNorm();
}

// ---------------------------------------------------------------- optimizers

namespace {

// Counts evaluations and remembers the best point seen.
class Tracker {
 public:
  Tracker(const Objective& f, int budget) : f_(f), budget_(budget) {}

  double operator()(const Eigen::VectorXd& x) {
    ++evals_;
    double v = f_(x);
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    if (v < best_f_) {
      best_f_ = v;
      best_x_ = x;
    }
    return v;
  }
  int evals() const { return evals_; }
  int left() const { return budget_ - evals_; }
  double best_f() const { return best_f_; }
  const Eigen::VectorXd& best_x() const { return best_x_; }

 private:
  const Objective& f_;
  int budget_;
  int evals_ = 0;
  double best_f_ = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x_;
};

Eigen::VectorXd fd_gradient(Tracker& t, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd y = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x[i]));
    y[i] = x[i] + h;
    const double fp = t(y);
    y[i] = x[i] - h;
    const double fm = t(y);
    y[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
    if (!std::isfinite(g[i])) g[i] = 0.0;
  }
  return g;
}

}  // namespace

OptimResult optimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, int budget) {
  Tracker t(f, budget);
  const Index n = x0.size();
  OptimResult out;
  Eigen::VectorXd x = x0;
  double fx = t(x);
  if (!std::isfinite(fx)) throw NumericalRangeError("optimize: loss is not finite at the starting point");
  out.trace.push_back({0, t.evals(), fx, t.best_f()});
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  int stalls = 0;
  if (t.left() <= 2 * n + 1) {
    out.x = x;
    out.f = fx;
    out.evaluations = t.evals();
    return out;
  }
  Eigen::VectorXd g = fd_gradient(t, x);
  while (t.left() > 0) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
    Eigen::VectorXd p = -H * g;
    double slope = g.dot(p);
    if (!(slope < 0)) {
      H.setIdentity();
      fresh = true;
      p = -g;
      slope = g.dot(p);
    }
    if (fresh) {
      // bounded first trial step after a reset
      const double m = p.lpNorm<Eigen::Infinity>();
      if (m > 0.1) {
        p *= 0.1 / m;
        slope = g.dot(p);
      }
    }
    double step = 1.0, fn = fx;
    Eigen::VectorXd xn = x;
    bool ok = false;
    while (t.left() > 0) {
      xn = x + step * p;
      fn = t(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        ok = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-12) break;
    }
    ++out.iterations;
    if (!ok) {
      out.trace.push_back({out.iterations, t.evals(), fx, t.best_f()});
      if (fresh) break;
      H.setIdentity();
      fresh = true;
      continue;
    }
    const double rel = (fx - fn) / std::max(std::abs(fx), 1e-300);
    stalls = rel < 1e-12 ? stalls + 1 : 0;
    if (t.left() <= 2 * n) {
      x = xn;
      fx = fn;
      out.trace.push_back({out.iterations, t.evals(), fx, t.best_f()});
      break;
    }
    Eigen::VectorXd gn = fd_gradient(t, xn);
    Eigen::VectorXd s = xn - x, y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      if (fresh) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      Eigen::VectorXd Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
      fresh = false;
    }
    x = xn;
    fx = fn;
    g = gn;
    out.trace.push_back({out.iterations, t.evals(), fx, t.best_f()});
    if (stalls >= 5 || fx == 0.0) break;
  }
  out.x = t.best_x();
  out.f = t.best_f();
  out.evaluations = t.evals();
  return out;
}

OptimResult optimize_es(const Objective& f, const Eigen::VectorXd& x0, int budget, std::uint64_t seed) {
  Tracker t(f, budget);
  std::mt19937_64 eng(splitmix64(seed));
  std::normal_distribution<double> nd;
  OptimResult out;
  Eigen::VectorXd x = x0;
  double fx = t(x);
  if (!std::isfinite(fx)) throw NumericalRangeError("optimize: loss is not finite at the starting point");
  out.trace.push_back({0, t.evals(), fx, t.best_f()});
  double sigma = 0.1 * std::max(1e-3, x.lpNorm<Eigen::Infinity>());
  Eigen::VectorXd y(x.size());
  while (t.left() > 0 && sigma > 1e-12) {
    for (Index i = 0; i < y.size(); ++i) y[i] = x[i] + sigma * nd(eng);
    double fy = t(y);
    if (fy <= fx) {
      x = y;
      fx = fy;
      sigma *= std::exp(1.0 / 3.0);
    } else {
      sigma *= std::exp(-1.0 / 12.0);
    }
    ++out.iterations;
    out.trace.push_back({out.iterations, t.evals(), fx, t.best_f()});
  }
  out.x = t.best_x();
  out.f = t.best_f();
  out.evaluations = t.evals();
  return out;
}

namespace {

struct LmRun {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd col_norm;  // Jacobian column norms at the last linearization
};

// Damped Gauss-Newton from x until the budget or the damping runs out.
// evals and best are shared with the caller; rows go to trace.
LmRun lm_local(const Residuals& res, const Eigen::VectorXd& x0, int budget, int& evals, double& best,
               std::vector<TraceRow>& trace) {
  const int stop = evals + budget;
  auto call = [&](const Eigen::VectorXd& x) {
    ++evals;
    Eigen::VectorXd r = res(x);
    if (!r.allFinite()) r.setConstant(std::numeric_limits<double>::infinity());
    return r;
  };
  const Index n = x0.size();
  LmRun out;
  out.x = x0;
  out.col_norm = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd r = call(out.x);
  out.f = r.squaredNorm();
  if (!std::isfinite(out.f)) return out;
  best = std::min(best, out.f);
  double mu = 1e-3;
  Eigen::MatrixXd J(r.size(), n);
  while (evals + n + 1 <= stop && out.f > 0) {
    Eigen::VectorXd y = out.x;
    for (Index i = 0; i < n; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(out.x[i]));
      y[i] = out.x[i] + h;
      J.col(i) = (call(y) - r) / h;
      y[i] = out.x[i];
      if (!J.col(i).allFinite()) J.col(i).setZero();
    }
    out.col_norm = J.colwise().norm().transpose();
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-14) break;
    const Eigen::VectorXd dA = A.diagonal().cwiseMax(1e-12);
    bool moved = false;
    while (evals < stop && mu <= 1e12) {
      Eigen::MatrixXd M = A;
      M.diagonal() += mu * dA;
      const Eigen::VectorXd xn = out.x + M.ldlt().solve(-g);
      const Eigen::VectorXd rn = call(xn);
      const double fn = rn.squaredNorm();
      if (std::isfinite(fn) && fn < out.f) {
        out.x = xn;
        r = rn;
        out.f = fn;
        mu = std::max(mu / 3.0, 1e-12);
        moved = true;
        break;
      }
      mu *= 4.0;
    }
    best = std::min(best, out.f);
    trace.push_back({static_cast<int>(trace.size()), evals, out.f, best});
    if (!moved) break;
  }
  return out;
}

}  // namespace

OptimResult optimize_lm(const Residuals& res, const Eigen::VectorXd& x0, int budget, std::uint64_t seed) {
  OptimResult out;
  int evals = 0;
  double best = std::numeric_limits<double>::infinity();
  const Index n = x0.size();
  {
    const double f0 = res(x0).squaredNorm();
    ++evals;
    if (!std::isfinite(f0)) throw NumericalRangeError("optimize: loss is not finite at the starting point");
    best = f0;
    out.trace.push_back({0, evals, f0, best});
  }
  // first descent gets a larger share, then perturbed restarts from the best point
  const int first = std::max(budget / 6, static_cast<int>(20 * (n + 1)));
  LmRun cur = lm_local(res, x0, std::min(first, budget - evals), evals, best, out.trace);
  std::mt19937_64 eng(splitmix64(seed ^ 0x1a3ULL));
  std::normal_distribution<double> nd(0.0, 1.0);
  const double kick[3] = {1.0, 0.3, 3.0};
  const int hop_budget = static_cast<int>(18 * (n + 1));
  for (int hop = 0; budget - evals > 2 * (n + 1) && cur.f > 0; ++hop) {
    // kick sized so each coordinate moves the residual norm by about sqrt(f)
    const double c = std::sqrt(cur.f) * kick[hop % 3] / std::sqrt(static_cast<double>(n));
    Eigen::VectorXd y = cur.x;
    for (Index i = 0; i < n; ++i) y[i] += c * nd(eng) / std::max(cur.col_norm[i], 1e-12);
    LmRun trial = lm_local(res, y, std::min(hop_budget, budget - evals), evals, best, out.trace);
    if (trial.f < cur.f) cur = trial;
  }
  out.x = cur.x;
  out.f = cur.f;
  out.evaluations = evals;
  out.iterations = static_cast<int>(out.trace.size()) - 1;
  return out;
}

// "lm" needs residuals (see calibrate); with a bare objective it runs BFGS
OptimResult optimize(const Objective& f, const Eigen::VectorXd& x0, const OptimizerSettings& s) {
  if (s.method == "es") return optimize_es(f, x0, s.budget, s.seed);
  return optimize_bfgs(f, x0, s.budget);
}

InitialGuess initial_guess(const Objective& f, Index dim, int n_ell, int boxes, std::uint64_t seed) {
  if (n_ell < 1 || boxes < 1) throw std::invalid_argument("initial_guess: need N_l >= 1 and m >= 1");
  std::mt19937_64 eng(splitmix64(seed ^ 0x5eedULL));
  InitialGuess best;
  best.f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(dim);
  for (int b = 1; b <= boxes; ++b) {
    const double r = std::pow(10.0, -b);
    std::uniform_real_distribution<double> ud(-r, r);
    for (int k = 0; k < n_ell; ++k) {
      for (Index i = 0; i < dim; ++i) x[i] = ud(eng);
      double v = f(x);
      ++best.evaluations;
      if (std::isfinite(v) && v < best.f) {
        best.f = v;
        best.x = x;
        best.box = b;
      }
    }
  }
  if (best.box == 0) throw NumericalRangeError("initial_guess: no finite loss value in any box");
  return best;
}

// ---------------------------------------------------------------- reports

void fill_fit(const PricingEngine& engine, const ParamSlices& slices, CalibReport& report) {
  auto r = engine.evaluate(slices);
  const auto& quotes = engine.book().quotes;
  report.quotes.clear();
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    const Quote& q = quotes[i];
    QuoteFit f;
    f.quote = q;
    f.model_price = r.quotes[i].price;
    f.std_error = r.quotes[i].std_error;
    f.inside = f.model_price >= q.bid && f.model_price <= q.ask;
    const std::size_t m = engine.maturity_slot(i);
    const double fwd = q.instrument == Instrument::VIX ? r.vix_future[m] : q.future * r.spx_forward[m];
    f.model_iv = std::numeric_limits<double>::quiet_NaN();
    try {
      f.model_iv = implied_vol(f.model_price, std::exp(-q.rate * q.maturity) * fwd, q.strike, q.maturity, q.rate);
    } catch (const std::exception&) {
    }
    report.quotes.push_back(f);
  }
  report.futures.clear();
  for (std::size_t m = 0; m < engine.vix_maturities().size(); ++m) {
    FutureFit ff;
    ff.maturity = engine.vix_maturities()[m];
    for (std::size_t i = 0; i < quotes.size(); ++i)
      if (quotes[i].instrument == Instrument::VIX && engine.maturity_slot(i) == m) {
        ff.market = quotes[i].future;
        break;
      }
    ff.model = r.vix_future[m];
    ff.rel_error = ff.market > 0 ? futures_error(ff.market, ff.model) : std::numeric_limits<double>::quiet_NaN();
    report.futures.push_back(ff);
  }
}

namespace {

void append_trace(CalibReport& rep, const std::vector<TraceRow>& rows, int offset) {
  double best = rep.trace.empty() ? std::numeric_limits<double>::infinity() : rep.trace.back().best_loss;
  int it0 = rep.trace.empty() ? 0 : rep.trace.back().iteration + 1;
  for (const auto& r : rows) {
    TraceRow t = r;
    t.iteration += it0;
    t.evaluations += offset;
    best = std::min(best, t.loss);
    t.best_loss = std::min(best, r.best_loss);
    best = t.best_loss;
    rep.trace.push_back(t);
  }
}

}  // namespace

double flat_vol_level(const QuoteBook& book, double vix_quote_scale) {
  std::vector<double> v;
  for (const Quote& q : book.quotes)
    if (q.instrument == Instrument::SPX) v.push_back(0.5 * (q.iv_bid + q.iv_ask));
  if (v.empty())
    for (const Quote& q : book.quotes)
      if (q.future > 0) v.push_back(q.future / vix_quote_scale);
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

CalibReport calibrate(const RunConfig& cfg, const PricingEngine& engine) {
  const QuoteBook& book = engine.book();
  if (book.quotes.empty()) throw QuoteError("calibrate: empty quote book");
  std::vector<std::string> warnings;
  const LossWeights w = loss_weights(book, &warnings);
  const Index an = tensor_dimension(cfg.model.alphabet_x(), cfg.model.n);
  CalibReport rep;
  Index dim = an;
  if (cfg.optimizer.projection_dim > 0) {
    rep.projection = randomized_projection(cfg.optimizer.projection_dim, an, cfg.optimizer.seed);
    dim = cfg.optimizer.projection_dim;
  }
  auto to_ell = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    if (rep.projection.size() == 0) return x;
    return rep.projection.transpose() * x;
  };
  const std::vector<double> starts = cfg.effective_slice_starts();
  int evals = 0;

  // flat-vol candidate: only the empty word, at a market vol level
  const double flat = flat_vol_level(book, cfg.loss.vix_quote_scale);
  auto start_point = [&](const Objective& f, Index n) -> Eigen::VectorXd {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    double f0 = std::numeric_limits<double>::infinity();
    if (cfg.optimizer.initial_guess) {
      InitialGuess ig = initial_guess(f, n, cfg.optimizer.n_ell, cfg.optimizer.boxes, cfg.optimizer.seed);
      x0 = ig.x;
      f0 = ig.f;
      evals += ig.evaluations;
    }
    if (rep.projection.size() == 0 && flat > 0) {
      Eigen::VectorXd xf = Eigen::VectorXd::Zero(n);
      for (Index i = 0; i < n; i += an) xf[i] = flat;
      if (cfg.optimizer.initial_guess) {
        // same boxes, centred on the flat point
        Objective g = [&](const Eigen::VectorXd& x) { return f(xf + x); };
        InitialGuess ig = initial_guess(g, n, cfg.optimizer.n_ell, cfg.optimizer.boxes, cfg.optimizer.seed + 1);
        evals += ig.evaluations;
        if (ig.f < f0) x0 = xf + ig.x;
      } else {
        const double ff = f(xf);
        ++evals;
        if (std::isfinite(ff) && ff < f0) x0 = xf;
      }
    }
    return x0;
  };
  auto run = [&](const Objective& f, const Residuals& r, const Eigen::VectorXd& x0) {
    if (cfg.optimizer.method == "lm") return optimize_lm(r, x0, cfg.optimizer.budget, cfg.optimizer.seed);
    return optimize(f, x0, cfg.optimizer);
  };

  if (starts.size() == 1) {
    Residuals rf = [&](const Eigen::VectorXd& x) {
      return loss_residuals(engine, engine.evaluate(constant_slices(to_ell(x))), w, cfg.loss);
    };
    Objective f = [&](const Eigen::VectorXd& x) { return rf(x).squaredNorm(); };
    Eigen::VectorXd x0 = start_point(f, dim);
    OptimResult res = run(f, rf, x0);
    append_trace(rep, res.trace, evals);
    evals += res.evaluations;
    rep.slices = constant_slices(to_ell(res.x));
  } else {
    // quote groups: the last slice that affects the quote
    const double delta = cfg.model.delta;
    const std::size_t K = starts.size();
    std::vector<std::size_t> group(book.quotes.size());
    for (std::size_t i = 0; i < book.quotes.size(); ++i) {
      const Quote& q = book.quotes[i];
      const double end = q.instrument == Instrument::VIX ? q.maturity + delta : q.maturity;
      std::size_t g = 0;
      for (std::size_t j = 0; j < K; ++j)
        if (starts[j] < end - 1e-12) g = j;
      group[i] = g;
    }
    std::vector<Eigen::VectorXd> xs(K, Eigen::VectorXd::Zero(dim));
    auto make_slices = [&](const std::vector<Eigen::VectorXd>& v) {
      ParamSlices s;
      s.starts = starts;
      for (const auto& x : v) s.params.push_back(to_ell(x));
      return s;
    };
    // step 1: slices 0 and 1 jointly
    {
      std::vector<char> active(book.quotes.size());
      for (std::size_t i = 0; i < active.size(); ++i) active[i] = group[i] <= 1;
      Residuals r2 = [&](const Eigen::VectorXd& x) {
        std::vector<Eigen::VectorXd> v = xs;
        v[0] = x.head(dim);
        v[1] = x.tail(dim);
        ParamSlices s = make_slices(v);
        return loss_residuals(engine, engine.evaluate(s, &active), w, cfg.loss, &active);
      };
      Objective f2 = [&](const Eigen::VectorXd& x) { return r2(x).squaredNorm(); };
      Objective f1 = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd y(2 * dim);
        y << x, x;
        return f2(y);
      };
      const Eigen::VectorXd x1 = start_point(f1, dim);
      Eigen::VectorXd x0(2 * dim);
      x0 << x1, x1;
      OptimResult res = run(f2, r2, x0);
      append_trace(rep, res.trace, evals);
      evals += res.evaluations;
      xs[0] = res.x.head(dim);
      xs[1] = res.x.tail(dim);
    }
    for (std::size_t k = 2; k < K; ++k) {
      std::vector<char> active(book.quotes.size());
      bool any = false;
      for (std::size_t i = 0; i < active.size(); ++i) {
        active[i] = group[i] == k;
        any = any || active[i];
      }
      xs[k] = xs[k - 1];
      if (!any) continue;
      Residuals rk = [&](const Eigen::VectorXd& x) {
        std::vector<Eigen::VectorXd> v = xs;
        v[k] = x;
        ParamSlices s = make_slices(v);
        return loss_residuals(engine, engine.evaluate(s, &active), w, cfg.loss, &active);
      };
      Objective fk = [&](const Eigen::VectorXd& x) { return rk(x).squaredNorm(); };
      OptimResult res = run(fk, rk, xs[k - 1]);
      append_trace(rep, res.trace, evals);
      evals += res.evaluations;
      xs[k] = res.x;
    }
    rep.slices = make_slices(xs);
  }
  rep.evaluations = evals;
  rep.loss = total_loss(engine, engine.evaluate(rep.slices), w, cfg.loss);
  fill_fit(engine, rep.slices, rep);
  return rep;
}

}  // namespace sigvol
