#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigvol/model.hpp"
#include "sigvol/pathsim.hpp"

namespace sigvol {

using Json = nlohmann::json;

// Strike grid for one maturity, as moneyness K/F.
struct StrikeRange {
  double maturity = 0.0;
  double lo = 0.9;
  double hi = 1.1;
  int count = 11;
};

enum class LossMode { Vix, Spx, Joint };

struct LossSettings {
  LossMode mode = LossMode::Joint;
  double beta = 1.0;
  double lambda = 0.5;
  double vix_quote_scale = 1.0;  // 100 for index-point VIX quotes
};

struct OptimizerSettings {
  std::string method = "bfgs";  // bfgs | lm | es
  int budget = 2000;
  bool initial_guess = true;
  int n_ell = 200;
  int boxes = 4;
  std::uint64_t seed = 7;
  int projection_dim = 0;  // 0 = off
};

struct RunConfig {
  std::string name;
  ModelConfig model;
  int steps_per_year = 2520;
  std::size_t paths = 80000;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::Exact;
  bool keep_signatures = true;

  std::vector<double> spx_maturities;
  std::vector<double> vix_maturities;
  bool time_varying = false;
  std::vector<double> slice_starts;  // first is 0

  std::vector<StrikeRange> spx_strikes;
  std::vector<StrikeRange> vix_strikes;
  double spx_spot = 100.0;
  double rate = 0.0;
  double dividend = 0.0;
  double synthetic_spread = 0.01;  // implied-vol half width of generated quotes

  LossSettings loss;
  OptimizerSettings optimizer;
  int vix_control_variate = 0;  // 0 off, 1 or 2
  bool spx_control_variate = false;

  std::string output_dir = "out";

  void validate() const;
  // sorted union of SPX, VIX and slice-start times (t > 0)
  std::vector<double> store_maturities() const;
  // slice starts used for the parameter slices; {0} unless time-varying
  std::vector<double> effective_slice_starts() const;
};

Json to_json(const ModelConfig& m);
ModelConfig model_from_json(const Json& j);
Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::string& path);

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);
std::string to_string(LossMode m);
LossMode loss_mode_from_string(const std::string& s);

// 64-bit FNV-1a as 16 hex digits
std::string fnv1a_hex(const std::string& data);

}  // namespace sigvol
