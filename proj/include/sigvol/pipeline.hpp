#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sigvol/calib.hpp"
#include "sigvol/config.hpp"
#include "sigvol/quotes.hpp"
#include "sigvol/store.hpp"

namespace sigvol {

PathGrid grid_for(const RunConfig& cfg);
StoreOptions store_options(const RunConfig& cfg);
std::string expected_fingerprint(const RunConfig& cfg);

SampleStore simulate_store(const RunConfig& cfg);

// Synthetic book from known parameters: strikes from the moneyness ranges (VIX against the
// model future, SPX against the forward), bid/ask from the model IV ± cfg.synthetic_spread.
QuoteBook synthetic_quotes(const RunConfig& cfg, const SampleStore& store, const ParamSlices& slices);

struct PriceRow {
  Instrument instrument;
  double maturity, strike, price, std_error, iv, future;
};
std::vector<PriceRow> price_table(const RunConfig& cfg, const SampleStore& store, const ParamSlices& slices,
                                  const QuoteBook& grid);

struct TimeseriesRow {
  int path;
  double t, S, VIX, V;
};
// Joint trajectories of (S_t, VIX_t, V_t) sampled points_per_day times per (365-day) day.
std::vector<TimeseriesRow> simulate_timeseries(const ModelConfig& model, const Eigen::VectorXd& ell,
                                               double horizon_days, int points_per_day, std::uint64_t seed,
                                               int n_paths = 1);

// outputs; every table carries the store fingerprint
void write_quotes_fit(const std::string& path, const CalibReport& rep, const std::string& fingerprint,
                      double vix_display = 1.0);
void write_futures_fit(const std::string& path, const CalibReport& rep, const std::string& fingerprint,
                       double vix_display = 1.0);
void write_trace(const std::string& path, const CalibReport& rep);
void write_params(const std::string& path, const ParamSlices& slices, const Labeling& lab,
                  const std::string& fingerprint, double loss = 0.0);
ParamSlices read_params(const std::string& path);
void write_prices(const std::string& path, const std::vector<PriceRow>& rows, const std::string& fingerprint,
                  double vix_display = 1.0);
void write_timeseries(const std::string& path, const std::vector<TimeseriesRow>& rows, double vix_display = 1.0);

}  // namespace sigvol
