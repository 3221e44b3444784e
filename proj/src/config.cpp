#include "sigvol/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace sigvol {

namespace {

Json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const Json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

Json range_json(const StrikeRange& r) {
  return Json{{"maturity", r.maturity}, {"lo", r.lo}, {"hi", r.hi}, {"count", r.count}};
}

StrikeRange json_range(const Json& j) {
  StrikeRange r;
  r.maturity = j.at("maturity").get<double>();
  r.lo = j.at("lo").get<double>();
  r.hi = j.at("hi").get<double>();
  r.count = j.value("count", 11);
  return r;
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::Exact ? "exact" : "euler"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "exact") return Scheme::Exact;
  if (s == "euler") return Scheme::Euler;
  throw ConfigError("unknown scheme '" + s + "'");
}

std::string to_string(LossMode m) {
  switch (m) {
    case LossMode::Vix: return "vix";
    case LossMode::Spx: return "spx";
    case LossMode::Joint: return "joint";
  }
  return "joint";
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "vix") return LossMode::Vix;
  if (s == "spx") return LossMode::Spx;
  if (s == "joint") return LossMode::Joint;
  throw ConfigError("unknown loss mode '" + s + "'");
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json to_json(const ModelConfig& m) {
  Json j;
  j["kind"] = to_string(m.kind);
  j["d"] = m.d;
  j["n"] = m.n;
  j["kappa"] = vec_json(m.kappa);
  j["theta"] = vec_json(m.theta);
  j["sigma"] = vec_json(m.sigma);
  j["x0"] = vec_json(m.x0);
  Json rho = Json::array();
  for (Index i = 0; i < m.rho.rows(); ++i) rho.push_back(vec_json(m.rho.row(i).transpose()));
  j["rho"] = rho;
  j["delta"] = m.delta;
  return j;
}

ModelConfig model_from_json(const Json& j) {
  try {
    ModelConfig m;
    m.kind = process_kind_from_string(j.value("kind", std::string("ou")));
    m.d = j.at("d").get<int>();
    m.n = j.at("n").get<int>();
    if (m.kind == ProcessKind::BrownianMotion) {
      m.kappa = j.contains("kappa") ? json_vec(j["kappa"]) : Eigen::VectorXd::Zero(m.d);
      m.theta = j.contains("theta") ? json_vec(j["theta"]) : Eigen::VectorXd::Zero(m.d);
      m.x0 = j.contains("x0") ? json_vec(j["x0"]) : Eigen::VectorXd::Zero(m.d);
    } else {
      m.kappa = json_vec(j.at("kappa"));
      m.theta = json_vec(j.at("theta"));
      m.x0 = json_vec(j.at("x0"));
    }
    m.sigma = j.contains("sigma") ? json_vec(j["sigma"]) : Eigen::VectorXd::Ones(m.d);
    const auto& rho = j.at("rho");
    m.rho.resize(static_cast<Index>(rho.size()), static_cast<Index>(rho.size()));
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i].size() != rho.size()) throw ConfigError("model: rho must be square");
      for (std::size_t k = 0; k < rho.size(); ++k) m.rho(i, k) = rho[i][k].get<double>();
    }
    m.delta = j.value("delta", 1.0 / 12.0);
    m.validate();
    return m;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("model block: ") + e.what());
  }
}

void RunConfig::validate() const {
  model.validate();
  if (steps_per_year < 1) throw ConfigError("steps_per_year must be >= 1");
  if (paths < 1) throw ConfigError("paths must be >= 1");
  for (double t : spx_maturities)
    if (!(t > 0)) throw ConfigError("maturities must be > 0");
  for (double t : vix_maturities)
    if (!(t > 0)) throw ConfigError("maturities must be > 0");
  if (loss.mode == LossMode::Joint && !(loss.lambda > 0 && loss.lambda < 1))
    throw ConfigError("loss: lambda must lie in (0,1)");
  if (loss.beta < 0 || loss.beta > 1) throw ConfigError("loss: beta must lie in [0,1]");
  if (loss.vix_quote_scale != 1.0 && loss.vix_quote_scale != 100.0)
    throw ConfigError("loss: vix_quote_scale must be 1 or 100");
  if (time_varying) {
    if (slice_starts.empty() || slice_starts[0] != 0.0) throw ConfigError("slices: first start must be 0");
    for (std::size_t i = 1; i < slice_starts.size(); ++i)
      if (!(slice_starts[i] > slice_starts[i - 1])) throw ConfigError("slices: starts must increase");
  }
  if (vix_control_variate < 0 || vix_control_variate > 2) throw ConfigError("vix_control_variate must be 0, 1 or 2");
  if (optimizer.method != "lm" && optimizer.method != "bfgs" && optimizer.method != "es")
    throw ConfigError("optimizer: method must be lm, bfgs or es");
  if (optimizer.budget < 1 || optimizer.n_ell < 1 || optimizer.boxes < 1) throw ConfigError("optimizer: bad sizes");
}

std::vector<double> RunConfig::store_maturities() const {
  std::set<double> s(spx_maturities.begin(), spx_maturities.end());
  s.insert(vix_maturities.begin(), vix_maturities.end());
  if (time_varying)
    for (double t : slice_starts)
      if (t > 0) s.insert(t);
  return {s.begin(), s.end()};
}

std::vector<double> RunConfig::effective_slice_starts() const {
  if (time_varying) return slice_starts;
  return {0.0};
}

Json to_json(const RunConfig& c) {
  Json j;
  j["name"] = c.name;
  j["model"] = to_json(c.model);
  j["simulation"] = {{"steps_per_year", c.steps_per_year},
                     {"paths", c.paths},
                     {"seed", c.seed},
                     {"scheme", to_string(c.scheme)},
                     {"keep_signatures", c.keep_signatures}};
  j["maturities"] = {{"spx", c.spx_maturities}, {"vix", c.vix_maturities}};
  j["time_varying"] = c.time_varying;
  j["slice_starts"] = c.slice_starts;
  Json spx = Json::array(), vix = Json::array();
  for (const auto& r : c.spx_strikes) spx.push_back(range_json(r));
  for (const auto& r : c.vix_strikes) vix.push_back(range_json(r));
  j["strikes"] = {{"spx", spx}, {"vix", vix}};
  j["market"] = {{"spx_spot", c.spx_spot}, {"rate", c.rate}, {"dividend", c.dividend},
                 {"synthetic_spread", c.synthetic_spread}};
  j["loss"] = {{"mode", to_string(c.loss.mode)},
               {"beta", c.loss.beta},
               {"lambda", c.loss.lambda},
               {"vix_quote_scale", c.loss.vix_quote_scale}};
  j["optimizer"] = {{"method", c.optimizer.method},        {"budget", c.optimizer.budget},
                    {"initial_guess", c.optimizer.initial_guess}, {"n_ell", c.optimizer.n_ell},
                    {"boxes", c.optimizer.boxes},          {"seed", c.optimizer.seed},
                    {"projection_dim", c.optimizer.projection_dim}};
  j["control_variates"] = {{"vix", c.vix_control_variate}, {"spx", c.spx_control_variate}};
  j["output_dir"] = c.output_dir;
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  try {
    c.name = j.value("name", std::string());
    c.model = model_from_json(j.at("model"));
    if (j.contains("simulation")) {
      const auto& s = j["simulation"];
      c.steps_per_year = s.value("steps_per_year", c.steps_per_year);
      c.paths = s.value("paths", c.paths);
      c.seed = s.value("seed", c.seed);
      c.scheme = scheme_from_string(s.value("scheme", std::string("exact")));
      c.keep_signatures = s.value("keep_signatures", c.keep_signatures);
    }
    if (j.contains("maturities")) {
      c.spx_maturities = j["maturities"].value("spx", std::vector<double>{});
      c.vix_maturities = j["maturities"].value("vix", std::vector<double>{});
    }
    c.time_varying = j.value("time_varying", false);
    c.slice_starts = j.value("slice_starts", std::vector<double>{});
    if (j.contains("strikes")) {
      for (const auto& r : j["strikes"].value("spx", Json::array())) c.spx_strikes.push_back(json_range(r));
      for (const auto& r : j["strikes"].value("vix", Json::array())) c.vix_strikes.push_back(json_range(r));
    }
    if (j.contains("market")) {
      const auto& m = j["market"];
      c.spx_spot = m.value("spx_spot", c.spx_spot);
      c.rate = m.value("rate", c.rate);
      c.dividend = m.value("dividend", c.dividend);
      c.synthetic_spread = m.value("synthetic_spread", c.synthetic_spread);
    }
    if (j.contains("loss")) {
      const auto& l = j["loss"];
      c.loss.mode = loss_mode_from_string(l.value("mode", std::string("joint")));
      c.loss.beta = l.value("beta", c.loss.beta);
      c.loss.lambda = l.value("lambda", c.loss.lambda);
      c.loss.vix_quote_scale = l.value("vix_quote_scale", c.loss.vix_quote_scale);
    }
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      c.optimizer.method = o.value("method", c.optimizer.method);
      c.optimizer.budget = o.value("budget", c.optimizer.budget);
      c.optimizer.initial_guess = o.value("initial_guess", c.optimizer.initial_guess);
      c.optimizer.n_ell = o.value("n_ell", c.optimizer.n_ell);
      c.optimizer.boxes = o.value("boxes", c.optimizer.boxes);
      c.optimizer.seed = o.value("seed", c.optimizer.seed);
      c.optimizer.projection_dim = o.value("projection_dim", c.optimizer.projection_dim);
    }
    if (j.contains("control_variates")) {
      c.vix_control_variate = j["control_variates"].value("vix", 0);
      c.spx_control_variate = j["control_variates"].value("spx", false);
    }
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace sigvol
