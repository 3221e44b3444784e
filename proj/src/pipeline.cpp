#include "sigvol/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>

#include "sigvol/spxcore.hpp"

namespace sigvol {

PathGrid grid_for(const RunConfig& cfg) {
  PathGrid g;
  g.steps_per_year = cfg.steps_per_year;
  auto m = cfg.store_maturities();
  if (m.empty()) throw ConfigError("config: no maturities");
  g.horizon = m.back();
  return g;
}

StoreOptions store_options(const RunConfig& cfg) {
  StoreOptions o;
  o.scheme = cfg.scheme;
  o.keep_signatures = cfg.keep_signatures;
  o.vix_maturities = cfg.vix_maturities;
  o.slice_starts = cfg.effective_slice_starts();
  return o;
}

std::string expected_fingerprint(const RunConfig& cfg) {
  PathGrid g = grid_for(cfg);
  return store_fingerprint(cfg.model, g, cfg.store_maturities(), cfg.paths, cfg.seed, store_options(cfg));
}

SampleStore simulate_store(const RunConfig& cfg) {
  cfg.validate();
  return build_sample_store(cfg.model, grid_for(cfg), cfg.store_maturities(), cfg.paths, cfg.seed,
                            store_options(cfg));
}

namespace {

const StrikeRange* range_for(const std::vector<StrikeRange>& ranges, double t) {
  for (const auto& r : ranges)
    if (std::abs(r.maturity - t) < 1e-9) return &r;
  return nullptr;
}

std::vector<double> moneyness_grid(const StrikeRange* r, Instrument ins) {
  StrikeRange d;
  if (ins == Instrument::VIX) {
    d.lo = 0.9;
    d.hi = 1.6;
  } else {
    d.lo = 0.9;
    d.hi = 1.05;
  }
  d.count = 8;
  const StrikeRange& x = r ? *r : d;
  std::vector<double> m;
  if (x.count <= 1) return {x.lo};
  for (int k = 0; k < x.count; ++k) m.push_back(x.lo + (x.hi - x.lo) * k / (x.count - 1));
  return m;
}

}  // namespace

QuoteBook synthetic_quotes(const RunConfig& cfg, const SampleStore& store, const ParamSlices& slices) {
  const double scale = cfg.loss.vix_quote_scale;
  EngineOptions eo;
  eo.vix_scale = scale;
  // probe the model futures and forwards
  QuoteBook probe;
  for (double t : cfg.vix_maturities) {
    Quote q;
    q.instrument = Instrument::VIX;
    q.maturity = t;
    q.strike = 1e300;
    q.future = 1.0;
    q.rate = cfg.rate;
    probe.quotes.push_back(q);
  }
  for (double t : cfg.spx_maturities) {
    Quote q;
    q.instrument = Instrument::SPX;
    q.maturity = t;
    q.strike = 1e300;
    q.future = cfg.spx_spot * std::exp((cfg.rate - cfg.dividend) * t);
    q.rate = cfg.rate;
    q.dividend = cfg.dividend;
    probe.quotes.push_back(q);
  }
  PricingEngine pe(store, probe, eo);
  auto pr = pe.evaluate(slices);

  QuoteBook book;
  std::vector<double> model_fwd;
  for (std::size_t m = 0; m < cfg.vix_maturities.size(); ++m) {
    const double t = cfg.vix_maturities[m];
    const double f = pr.vix_future[m];
    for (double k : moneyness_grid(range_for(cfg.vix_strikes, t), Instrument::VIX)) {
      Quote q;
      q.instrument = Instrument::VIX;
      q.maturity = t;
      q.strike = k * f;
      q.future = f;
      q.rate = cfg.rate;
      book.quotes.push_back(q);
      model_fwd.push_back(f);
    }
  }
  for (std::size_t m = 0; m < cfg.spx_maturities.size(); ++m) {
    const double t = cfg.spx_maturities[m];
    const double fm = cfg.spx_spot * std::exp((cfg.rate - cfg.dividend) * t);
    for (double k : moneyness_grid(range_for(cfg.spx_strikes, t), Instrument::SPX)) {
      Quote q;
      q.instrument = Instrument::SPX;
      q.maturity = t;
      q.strike = k * fm;
      q.future = fm;
      q.rate = cfg.rate;
      q.dividend = cfg.dividend;
      book.quotes.push_back(q);
      model_fwd.push_back(fm * pr.spx_forward[m]);
    }
  }
  PricingEngine e2(store, book, eo);
  auto r = e2.evaluate(slices);
  QuoteBook out;
  for (std::size_t i = 0; i < book.quotes.size(); ++i) {
    Quote q = book.quotes[i];
    const double xi = std::exp(-q.rate * q.maturity) * model_fwd[i];
    double iv = 0.0;
    try {
      iv = implied_vol(r.quotes[i].price, xi, q.strike, q.maturity, q.rate);
    } catch (const ArbitrageViolation& ex) {
      out.warnings.push_back(std::string("synthetic quote skipped: ") + ex.what());
      continue;
    }
    q.iv_bid = iv - cfg.synthetic_spread;
    q.iv_ask = iv + cfg.synthetic_spread;
    if (q.iv_bid < 1e-4) {
      out.warnings.push_back("synthetic quote skipped: vol too small for the spread");
      continue;
    }
    q.bid = bs_call(xi, q.strike, q.iv_bid, q.maturity, q.rate);
    q.ask = bs_call(xi, q.strike, q.iv_ask, q.maturity, q.rate);
    out.quotes.push_back(q);
  }
  return out;
}

std::vector<PriceRow> price_table(const RunConfig& cfg, const SampleStore& store, const ParamSlices& slices,
                                  const QuoteBook& grid) {
  const QAssembler* qa = nullptr;
  std::unique_ptr<QAssembler> owned;
  EngineOptions eo;
  eo.vix_scale = cfg.loss.vix_quote_scale;
  if (slices.size() == 1 && (cfg.vix_control_variate == 1 || cfg.spx_control_variate)) {
    owned = std::make_unique<QAssembler>(cfg.model);
    qa = owned.get();
    eo.assembler = qa;
    eo.vix_control_variate = cfg.vix_control_variate == 1 ? 1 : 0;
    eo.spx_control_variate = cfg.spx_control_variate;
  }
  PricingEngine pe(store, grid, eo);
  CalibReport rep;
  fill_fit(pe, slices, rep);
  std::vector<PriceRow> rows;
  auto r = pe.evaluate(slices);
  for (std::size_t i = 0; i < rep.quotes.size(); ++i) {
    const auto& f = rep.quotes[i];
    const std::size_t m = pe.maturity_slot(i);
    const double fut = f.quote.instrument == Instrument::VIX ? r.vix_future[m] : f.quote.future * r.spx_forward[m];
    rows.push_back({f.quote.instrument, f.quote.maturity, f.quote.strike, f.model_price, f.std_error, f.model_iv, fut});
  }
  return rows;
}

std::vector<TimeseriesRow> simulate_timeseries(const ModelConfig& model, const Eigen::VectorXd& ell,
                                               double horizon_days, int points_per_day, std::uint64_t seed,
                                               int n_paths) {
  model.validate();
  const QAssembler qa(model);
  if (ell.size() != qa.param_dim()) throw ConfigError("timeseries: parameter dimension mismatch");
  PathGrid g;
  g.steps_per_year = points_per_day * 365;
  g.horizon = horizon_days / 365.0;
  PathGenerator gen(model, g);
  const Labeling lx = qa.sig_labeling();
  const Labeling lz(model.alphabet_z(), model.n + 1);
  const auto ito = e_tilde_coeffs(model).matrix();
  const Eigen::MatrixXd w = qa.window_weights(model.delta);
  const Eigen::VectorXd qw = quadratic_weights(ell);
  const Eigen::VectorXd wq = w.transpose() * qw;                  // ℓᵀQℓ = wq·sig
  const Eigen::VectorXd uq = qa.u_map() * qw;                     // ℓᵀQ⁰ℓ = uq·sig
  const Index an = qa.param_dim();
  std::vector<double> wx(2 * lx.level_size(lx.level())), wz(2 * lz.level_size(lz.level()));
  std::vector<TimeseriesRow> rows;
  Eigen::MatrixXd inc;
  for (int p = 0; p < n_paths; ++p) {
    gen.increments(seed, static_cast<std::uint64_t>(p), inc);
    Eigen::VectorXd sx = Eigen::VectorXd::Zero(lx.size()), sz = Eigen::VectorXd::Zero(lz.size());
    sx[0] = sz[0] = 1.0;
    for (Index k = 0; k <= gen.steps(); ++k) {
      if (k > 0) {
        chen_append(sx.data(), inc.col(k - 1).data(), lx, wx.data());
        chen_append(sz.data(), inc.col(k - 1).data(), lz, wz.data());
      }
      const double vol = ell.dot(sx.head(an));
      const double logs = -0.5 * uq.dot(sx) + ell.dot(ito * sz);
      const double vix2 = std::max(0.0, wq.dot(sx)) / model.delta;
      rows.push_back({p, g.time_at(k), std::exp(logs), std::sqrt(vix2), vol * vol});
    }
  }
  return rows;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

double disp(Instrument i, double v, double vix_display) { return i == Instrument::VIX ? v * vix_display : v; }

}  // namespace

void write_quotes_fit(const std::string& path, const CalibReport& rep, const std::string& fingerprint,
                      double vix_display) {
  auto out = open_out(path);
  out << "instrument,maturity,strike,bid,ask,iv_bid,iv_ask,model_price,model_iv,inside,fingerprint\n";
  for (const auto& f : rep.quotes) {
    const auto& q = f.quote;
    const Instrument i = q.instrument;
    out << to_string(i) << ',' << fmt(q.maturity) << ',' << fmt(disp(i, q.strike, vix_display)) << ','
        << fmt(disp(i, q.bid, vix_display)) << ',' << fmt(disp(i, q.ask, vix_display)) << ',' << fmt(q.iv_bid) << ','
        << fmt(q.iv_ask) << ',' << fmt(disp(i, f.model_price, vix_display)) << ',' << fmt(f.model_iv) << ','
        << (f.inside ? 1 : 0) << ',' << fingerprint << '\n';
  }
}

void write_futures_fit(const std::string& path, const CalibReport& rep, const std::string& fingerprint,
                       double vix_display) {
  auto out = open_out(path);
  out << "maturity,future_market,future_model,rel_error,fingerprint\n";
  for (const auto& f : rep.futures)
    out << fmt(f.maturity) << ',' << fmt(f.market * vix_display) << ',' << fmt(f.model * vix_display) << ','
        << fmt(f.rel_error) << ',' << fingerprint << '\n';
}

void write_trace(const std::string& path, const CalibReport& rep) {
  auto out = open_out(path);
  out << "iteration,evaluations,loss,best_loss\n";
  for (const auto& t : rep.trace)
    out << t.iteration << ',' << t.evaluations << ',' << fmt(t.loss) << ',' << fmt(t.best_loss) << '\n';
}

void write_params(const std::string& path, const ParamSlices& slices, const Labeling& lab,
                  const std::string& fingerprint, double loss) {
  Json j;
  j["fingerprint"] = fingerprint;
  j["loss"] = loss;
  Json words = Json::array();
  for (Index k = 0; k < lab.size(); ++k) words.push_back(lab.word_at(k).str());
  j["words"] = words;
  Json sl = Json::array();
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const auto& p = slices.params[i];
    sl.push_back({{"start", slices.starts[i]}, {"ell", std::vector<double>(p.data(), p.data() + p.size())}});
  }
  j["slices"] = sl;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

ParamSlices read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open params " + path);
  Json j;
  try {
    in >> j;
    ParamSlices s;
    if (j.contains("ell")) {
      auto v = j["ell"].get<std::vector<double>>();
      return constant_slices(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())));
    }
    for (const auto& x : j.at("slices")) {
      s.starts.push_back(x.at("start").get<double>());
      auto v = x.at("ell").get<std::vector<double>>();
      s.params.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())));
    }
    s.validate();
    return s;
  } catch (const Json::exception& e) {
    throw ConfigError("params " + path + ": " + e.what());
  }
}

void write_prices(const std::string& path, const std::vector<PriceRow>& rows, const std::string& fingerprint,
                  double vix_display) {
  auto out = open_out(path);
  out << "instrument,maturity,strike,model_price,std_error,model_iv,future_model,fingerprint\n";
  for (const auto& r : rows) {
    const Instrument i = r.instrument;
    out << to_string(i) << ',' << fmt(r.maturity) << ',' << fmt(disp(i, r.strike, vix_display)) << ','
        << fmt(disp(i, r.price, vix_display)) << ',' << fmt(disp(i, r.std_error, vix_display)) << ',' << fmt(r.iv)
        << ',' << fmt(disp(i, r.future, vix_display)) << ',' << fingerprint << '\n';
  }
}

void write_timeseries(const std::string& path, const std::vector<TimeseriesRow>& rows, double vix_display) {
  auto out = open_out(path);
  bool multi = false;
  for (const auto& r : rows) multi = multi || r.path != 0;
  out << (multi ? "path,t,S,VIX,V\n" : "t,S,VIX,V\n");
  for (const auto& r : rows) {
    if (multi) out << r.path << ',';
    out << fmt(r.t) << ',' << fmt(r.S) << ',' << fmt(r.VIX * vix_display) << ',' << fmt(r.V) << '\n';
  }
}

}  // namespace sigvol
