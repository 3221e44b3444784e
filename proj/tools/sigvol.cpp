// sigvol command line: simulate, calibrate, price, timeseries, ingest-check
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "sigvol/errors.hpp"
#include "sigvol/pipeline.hpp"

#ifndef SIGVOL_PRESET_DIR
#define SIGVOL_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using namespace sigvol;

namespace {

struct Common {
  std::string config, preset, store, quotes, out = "", params;
  bool vix100 = false;
  long paths = -1, steps = -1;
  long long seed = -1;
  std::string maturities;
};

RunConfig resolve_config(const Common& c) {
  std::string path = c.config;
  if (path.empty() && !c.preset.empty()) {
    path = c.preset;
    if (!fs::exists(path)) path = std::string(SIGVOL_PRESET_DIR) + "/" + c.preset + ".json";
  }
  if (path.empty()) throw ConfigError("need --config or --preset");
  RunConfig cfg = load_run_config(path);
  if (c.paths > 0) cfg.paths = static_cast<std::size_t>(c.paths);
  if (c.steps > 0) cfg.steps_per_year = static_cast<int>(c.steps);
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  if (!c.maturities.empty()) {
    // overrides both instrument lists
    std::vector<double> m;
    std::stringstream ss(c.maturities);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        m.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("--maturities: bad value '" + tok + "'");
      }
    }
    if (!cfg.vix_maturities.empty()) cfg.vix_maturities = m;
    if (!cfg.spx_maturities.empty()) cfg.spx_maturities = m;
  }
  cfg.validate();
  return cfg;
}

std::string out_dir(const Common& c, const RunConfig& cfg) {
  std::string d = c.out.empty() ? cfg.output_dir : c.out;
  fs::create_directories(d);
  return d;
}

// VIX columns are shown ×100 when the quotes are in decimal units and --vix-scale-100 is set
double vix_display(const Common& c, const RunConfig& cfg) {
  return c.vix100 && cfg.loss.vix_quote_scale == 1.0 ? 100.0 : 1.0;
}

SampleStore load_store(const Common& c, const RunConfig& cfg) {
  const std::string fp = expected_fingerprint(cfg);
  if (c.store.empty()) {
    std::cerr << "no --store given, simulating " << cfg.paths << " paths\n";
    return simulate_store(cfg);
  }
  return read_store(c.store, fp);
}

struct Engine {
  std::unique_ptr<QAssembler> qa;
  Eigen::MatrixXd moment;
  std::unique_ptr<PricingEngine> engine;
};

Engine make_engine(const RunConfig& cfg, const SampleStore& store, const QuoteBook& book) {
  Engine e;
  EngineOptions eo;
  eo.vix_scale = cfg.loss.vix_quote_scale;
  const bool constant = cfg.effective_slice_starts().size() == 1;
  if (constant && (cfg.vix_control_variate > 0 || cfg.spx_control_variate)) {
    e.qa = std::make_unique<QAssembler>(cfg.model);
    eo.assembler = e.qa.get();
    eo.vix_control_variate = cfg.vix_control_variate;
    eo.spx_control_variate = cfg.spx_control_variate;
    if (cfg.vix_control_variate == 2) {
      if (cfg.vix_maturities.size() != 1) {
        std::cerr << "warning: second-moment control variate needs one VIX maturity, using m = 1\n";
        eo.vix_control_variate = 1;
      } else {
        e.moment = vix_moment_matrix(cfg.model, grid_for(cfg), cfg.vix_maturities[0], cfg.paths,
                                     splitmix64(cfg.seed ^ 0xc0ffee), cfg.scheme);
        eo.vix_moment = &e.moment;
      }
    }
  }
  e.engine = std::make_unique<PricingEngine>(store, book, eo);
  return e;
}

int cmd_simulate(const Common& c) {
  RunConfig cfg = resolve_config(c);
  if (c.store.empty()) throw ConfigError("simulate: --store is required");
  SampleStore s = simulate_store(cfg);
  write_store(s, c.store);
  std::cout << "fingerprint " << s.fingerprint << "\n";
  return 0;
}

int cmd_calibrate(const Common& c) {
  RunConfig cfg = resolve_config(c);
  if (c.quotes.empty()) throw ConfigError("calibrate: --quotes is required");
  QuoteBook book = ingest_quotes(c.quotes);
  for (const auto& w : book.warnings) std::cerr << c.quotes << ": " << w << "\n";
  SampleStore store = load_store(c, cfg);
  Engine e = make_engine(cfg, store, book);
  CalibReport rep = calibrate(cfg, *e.engine);
  const std::string d = out_dir(c, cfg);
  const double vd = vix_display(c, cfg);
  write_quotes_fit(d + "/quotes_fit.csv", rep, store.fingerprint, vd);
  write_futures_fit(d + "/futures_fit.csv", rep, store.fingerprint, vd);
  write_trace(d + "/trace.csv", rep);
  write_params(d + "/params.json", rep.slices, Labeling(cfg.model.alphabet_x(), cfg.model.n), store.fingerprint,
               rep.loss);
  int inside = 0;
  for (const auto& q : rep.quotes) inside += q.inside;
  std::cout << "loss " << fmt(rep.loss) << " evaluations " << rep.evaluations << " inside " << inside << "/"
            << rep.quotes.size() << " fingerprint " << store.fingerprint << "\n";
  return 0;
}

ParamSlices params_or_fail(const Common& c, const RunConfig& cfg) {
  if (c.params.empty()) throw ConfigError("--params is required");
  ParamSlices s = read_params(c.params);
  const Index an = tensor_dimension(cfg.model.alphabet_x(), cfg.model.n);
  for (const auto& p : s.params)
    if (p.size() != an) throw ConfigError("params: expected " + std::to_string(an) + " entries per slice");
  return s;
}

int cmd_price(const Common& c) {
  RunConfig cfg = resolve_config(c);
  ParamSlices slices = params_or_fail(c, cfg);
  SampleStore store = load_store(c, cfg);
  const std::string d = out_dir(c, cfg);
  QuoteBook grid;
  if (c.quotes.empty()) {
    grid = synthetic_quotes(cfg, store, slices);
    for (const auto& w : grid.warnings) std::cerr << w << "\n";
    write_quotes(d + "/quotes.csv", grid);
  } else {
    grid = ingest_quotes(c.quotes);
    for (const auto& w : grid.warnings) std::cerr << c.quotes << ": " << w << "\n";
  }
  auto rows = price_table(cfg, store, slices, grid);
  write_prices(d + "/prices.csv", rows, store.fingerprint, vix_display(c, cfg));
  std::cout << rows.size() << " prices, fingerprint " << store.fingerprint << "\n";
  return 0;
}

int cmd_timeseries(const Common& c, double days, int per_day, int n) {
  RunConfig cfg = resolve_config(c);
  ParamSlices slices = params_or_fail(c, cfg);
  if (slices.size() != 1) std::cerr << "warning: timeseries uses the first parameter slice\n";
  auto rows = simulate_timeseries(cfg.model, slices.params[0], days, per_day, cfg.seed, n);
  const std::string d = out_dir(c, cfg);
  write_timeseries(d + "/timeseries.csv", rows, vix_display(c, cfg));
  std::cout << rows.size() << " rows\n";
  return 0;
}

int cmd_ingest(const Common& c) {
  if (c.quotes.empty()) throw ConfigError("ingest-check: --quotes is required");
  QuoteBook b = ingest_quotes(c.quotes);
  for (const auto& w : b.warnings) std::cerr << c.quotes << ": " << w << "\n";
  std::cout << b.quotes.size() << " quotes accepted, " << b.warnings.size() << " warnings\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signature volatility models: simulate, calibrate, price"};
  app.require_subcommand(1);
  Common c;
  double days = 30;
  int per_day = 12, n_paths = 1;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", c.config, "run config JSON");
    s->add_option("--preset", c.preset, "preset name or file");
    s->add_option("--out", c.out, "output directory");
    s->add_option("--paths", c.paths);
    s->add_option("--steps-per-year", c.steps);
    s->add_option("--seed", c.seed);
    s->add_option("--maturities", c.maturities, "comma list, years");
    s->add_flag("--vix-scale-100", c.vix100, "show VIX columns in index points");
  };
  auto* sim = app.add_subcommand("simulate", "simulate and write a sample store");
  add_common(sim);
  sim->add_option("--store", c.store, "store file")->required();

  auto* cal = app.add_subcommand("calibrate", "calibrate to a quote book");
  add_common(cal);
  cal->add_option("--store", c.store);
  cal->add_option("--quotes", c.quotes)->required();

  auto* pr = app.add_subcommand("price", "price a grid (or a synthetic book) at given parameters");
  add_common(pr);
  pr->add_option("--store", c.store);
  pr->add_option("--quotes", c.quotes);
  pr->add_option("--params", c.params)->required();

  auto* ts = app.add_subcommand("timeseries", "simulate joint S, VIX, V trajectories");
  add_common(ts);
  ts->add_option("--params", c.params)->required();
  ts->add_option("--days", days);
  ts->add_option("--points-per-day", per_day);
  ts->add_option("--n", n_paths, "number of trajectories");

  auto* ing = app.add_subcommand("ingest-check", "validate a quote CSV");
  ing->add_option("--quotes", c.quotes)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(c);
    if (*cal) return cmd_calibrate(c);
    if (*pr) return cmd_price(c);
    if (*ts) return cmd_timeseries(c, days, per_day, n_paths);
    if (*ing) return cmd_ingest(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
