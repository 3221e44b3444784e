#include "sigvol/store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>

#include "sigvol/config.hpp"
#include "sigvol/spxcore.hpp"
#include "sigvol/vixcore.hpp"

namespace sigvol {

static_assert(std::endian::native == std::endian::little, "store format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'I', 'G', 'V', 'O', 'L', 'S', '1'};
constexpr const char* kGenerator = "mt19937_64+splitmix64/normal";
constexpr const char* kLabeling = "graded-lex, letter 0 = time, shorter words first";

// Signatures of chunks of paths at the requested grid indices.
// cb(first_path, sig_x[m], sig_z[m]) with one D x count matrix per maturity.
void for_each_chunk(const ModelConfig& cfg, const PathGrid& grid, const std::vector<Index>& idx, std::size_t n_paths,
                    std::uint64_t seed, Scheme scheme, Index chunk,
                    const std::function<void(std::size_t, const std::vector<Eigen::MatrixXd>&,
                                             const std::vector<Eigen::MatrixXd>&)>& cb) {
  const Index last = *std::max_element(idx.begin(), idx.end());
  PathGrid g = grid;
  g.horizon = std::max(grid.time_at(last), grid.step());
  PathGenerator gen(cfg, g, scheme);
  const Labeling lx(cfg.alphabet_x(), 2 * cfg.n + 1);
  const Labeling lz(cfg.alphabet_z(), cfg.n + 1);
  std::vector<double> wx(2 * lx.level_size(lx.level())), wz(2 * lz.level_size(lz.level()));
  Eigen::VectorXd sx(lx.size()), sz(lz.size());
  Eigen::MatrixXd inc;
  // order of visiting maturities along the path
  std::vector<std::size_t> order(idx.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });

  for (std::size_t first = 0; first < n_paths; first += static_cast<std::size_t>(chunk)) {
    const Index count = static_cast<Index>(std::min<std::size_t>(chunk, n_paths - first));
    std::vector<Eigen::MatrixXd> bx(idx.size(), Eigen::MatrixXd(lx.size(), count));
    std::vector<Eigen::MatrixXd> bz(idx.size(), Eigen::MatrixXd(lz.size(), count));
    for (Index c = 0; c < count; ++c) {
      gen.increments(seed, first + static_cast<std::size_t>(c), inc);
      sx.setZero();
      sx[0] = 1.0;
      sz.setZero();
      sz[0] = 1.0;
      std::size_t next = 0;
      for (Index k = 0; k <= last && next < order.size(); ++k) {
        if (k > 0) {
          chen_append(sx.data(), inc.col(k - 1).data(), lx, wx.data());
          chen_append(sz.data(), inc.col(k - 1).data(), lz, wz.data());
        }
        while (next < order.size() && idx[order[next]] == k) {
          bx[order[next]].col(c) = sx;
          bz[order[next]].col(c) = sz;
          ++next;
        }
      }
    }
    cb(first, bx, bz);
  }
}

Json options_json(const StoreOptions& o) {
  return Json{{"scheme", to_string(o.scheme)},
              {"keep_signatures", o.keep_signatures},
              {"vix_maturities", o.vix_maturities},
              {"slice_starts", o.slice_starts}};
}

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void read_matrix(std::ifstream& in, Eigen::MatrixXd& m, Index rows, Index cols) {
  m.resize(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw StoreError("read_store: truncated file");
}

}  // namespace

const WindowFactors* MaturityBlock::find_factors(double tau_lo, double tau_hi) const {
  for (const auto& f : factors)
    if (std::abs(f.tau_lo - tau_lo) < 1e-12 && std::abs(f.tau_hi - tau_hi) < 1e-12) return &f;
  return nullptr;
}

std::vector<const WindowFactors*> MaturityBlock::cover(double tau_lo, double tau_hi) const {
  if (const WindowFactors* f = find_factors(tau_lo, tau_hi)) return {f};
  std::vector<const WindowFactors*> out;
  double cur = tau_lo;
  while (cur < tau_hi - 1e-12) {
    const WindowFactors* best = nullptr;
    for (const auto& f : factors)
      if (std::abs(f.tau_lo - cur) < 1e-12 && f.tau_hi <= tau_hi + 1e-12 && (!best || f.tau_hi > best->tau_hi))
        best = &f;
    if (!best) return {};
    out.push_back(best);
    cur = best->tau_hi;
  }
  return out;
}

ParamSlices snap_slices(const ParamSlices& slices, const SampleStore& store) {
  ParamSlices s = slices;
  for (auto& t : s.starts) {
    if (t <= 0) continue;
    if (store.has(t))
      t = store.at(t).time;
    else if (t <= store.grid.horizon)
      t = store.grid.time_at(store.grid.snap(t));
  }
  return s;
}

bool SampleStore::has(double maturity) const {
  for (const auto& b : blocks)
    if (std::abs(b.requested - maturity) < 1e-12) return true;
  return false;
}

const MaturityBlock& SampleStore::at(double maturity) const {
  for (const auto& b : blocks)
    if (std::abs(b.requested - maturity) < 1e-12) return b;
  Index k = -1;
  try {
    k = grid.snap(maturity);
  } catch (const ConfigError&) {
  }
  for (const auto& b : blocks)
    if (b.grid_index == k) return b;
  throw StoreError("store has no block for maturity " + std::to_string(maturity));
}

std::string store_fingerprint(const ModelConfig& cfg, const PathGrid& grid, const std::vector<double>& maturities,
                              std::size_t n_paths, std::uint64_t seed, const StoreOptions& opt) {
  std::vector<double> m = maturities;
  std::sort(m.begin(), m.end());
  Json j{{"model", to_json(cfg)},
         {"steps_per_year", grid.steps_per_year},
         {"maturities", m},
         {"paths", n_paths},
         {"seed", seed},
         {"options", options_json(opt)},
         {"generator", kGenerator},
         {"labeling", kLabeling}};
  return fnv1a_hex(j.dump());
}

SampleStore build_sample_store(const ModelConfig& cfg, const PathGrid& grid, const std::vector<double>& maturities,
                               std::size_t n_paths, std::uint64_t seed, const StoreOptions& opt) {
  cfg.validate();
  if (maturities.empty()) throw ConfigError("store: no maturities");
  if (n_paths < 1) throw ConfigError("store: need at least one path");
  SampleStore st;
  st.config = cfg;
  st.seed = seed;
  st.n_paths = n_paths;
  st.options = opt;
  std::vector<double> mats = maturities;
  std::sort(mats.begin(), mats.end());
  mats.erase(std::unique(mats.begin(), mats.end()), mats.end());
  st.grid = grid;
  st.grid.horizon = std::max(grid.horizon, mats.back());
  st.fingerprint = store_fingerprint(cfg, st.grid, mats, n_paths, seed, opt);

  const QAssembler qa(cfg, opt.exp_method);
  const auto ito_m = e_tilde_coeffs(cfg).matrix();
  const Index N = static_cast<Index>(n_paths);
  const Index P = qa.pairs();
  std::vector<Index> idx;
  for (double t : mats) {
    MaturityBlock b;
    b.requested = t;
    b.grid_index = st.grid.snap(t);
    if (b.grid_index == 0) throw ConfigError("store: maturity snaps to t = 0");
    b.time = st.grid.time_at(b.grid_index);
    if (opt.keep_signatures) b.sig.resize(qa.sig_labeling().size(), N);
    b.ito.resize(qa.param_dim(), N);
    b.q0.resize(P, N);
    idx.push_back(b.grid_index);
    st.blocks.push_back(std::move(b));
  }

  // window pieces per VIX maturity and the weight matrices they need
  ParamSlices sl;
  sl.starts = opt.slice_starts.empty() ? std::vector<double>{0.0} : opt.slice_starts;
  for (auto& t : sl.starts)
    if (t > 0 && t <= st.grid.horizon) t = st.grid.time_at(st.grid.snap(t));
  sl.params.assign(sl.starts.size(), Eigen::VectorXd::Zero(1));
  std::deque<std::pair<double, Eigen::MatrixXd>> weights;
  auto weight_for = [&](double tau) -> const Eigen::MatrixXd& {
    for (const auto& [t, w] : weights)
      if (std::abs(t - tau) < 1e-12) return w;
    weights.emplace_back(tau, qa.window_weights(tau));
    return weights.back().second;
  };
  for (double tv : opt.vix_maturities) {
    bool found = false;
    for (auto& b : st.blocks) {
      if (std::abs(b.requested - tv) > 1e-12) continue;
      found = true;
      for (const auto& w : vix_window_pieces(sl, b.time, cfg.delta)) {
        if (b.find_factors(w.tau_lo, w.tau_hi)) continue;
        WindowFactors f;
        f.tau_lo = w.tau_lo;
        f.tau_hi = w.tau_hi;
        f.packed.resize(P, N);
        b.factors.push_back(std::move(f));
        weight_for(w.tau_hi);
        if (w.tau_lo > 0) weight_for(w.tau_lo);
      }
    }
    if (!found) throw ConfigError("store: VIX maturity " + std::to_string(tv) + " not among store maturities");
  }

  const Index na = qa.param_dim();
  for_each_chunk(cfg, st.grid, idx, n_paths, seed, opt.scheme, opt.chunk,
                 [&](std::size_t first, const std::vector<Eigen::MatrixXd>& bx, const std::vector<Eigen::MatrixXd>& bz) {
                   const Index c0 = static_cast<Index>(first);
                   for (std::size_t m = 0; m < st.blocks.size(); ++m) {
                     auto& b = st.blocks[m];
                     const Index cnt = bx[m].cols();
                     if (opt.keep_signatures) b.sig.middleCols(c0, cnt) = bx[m];
                     b.ito.middleCols(c0, cnt) = ito_m * bz[m];
                     b.q0.middleCols(c0, cnt) = qa.u_map().transpose() * bx[m];
                     for (auto& f : b.factors) {
                       Eigen::MatrixXd q = weight_for(f.tau_hi) * bx[m];
                       if (f.tau_lo > 0) q -= weight_for(f.tau_lo) * bx[m];
                       for (Index c = 0; c < cnt; ++c) {
                         CholFactor u = cholesky_psd(unpack_symmetric(q.col(c), na));
                         f.packed.col(c0 + c) = pack_upper(u.upper);
                       }
                     }
                   }
                 });
  return st;
}

void write_store(const SampleStore& st, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreError("write_store: cannot open " + path);
  Json h;
  h["fingerprint"] = st.fingerprint;
  h["model"] = to_json(st.config);
  h["grid"] = {{"horizon", st.grid.horizon}, {"steps_per_year", st.grid.steps_per_year}};
  h["seed"] = st.seed;
  h["paths"] = st.n_paths;
  h["options"] = options_json(st.options);
  h["generator"] = kGenerator;
  h["labeling"] = kLabeling;
  const Index D = st.blocks.empty() ? 0 : st.blocks[0].sig.rows();
  h["dims"] = {{"sig", D},
               {"ito", st.blocks.empty() ? 0 : st.blocks[0].ito.rows()},
               {"pairs", st.blocks.empty() ? 0 : st.blocks[0].q0.rows()}};
  Json blocks = Json::array();
  for (const auto& b : st.blocks) {
    Json f = Json::array();
    for (const auto& w : b.factors) f.push_back({w.tau_lo, w.tau_hi});
    blocks.push_back({{"requested", b.requested}, {"time", b.time}, {"grid_index", b.grid_index}, {"factors", f}});
  }
  h["blocks"] = blocks;
  const std::string text = h.dump();
  const std::uint64_t len = text.size();
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& b : st.blocks) {
    if (st.options.keep_signatures) write_matrix(out, b.sig);
    write_matrix(out, b.ito);
    write_matrix(out, b.q0);
    for (const auto& f : b.factors) write_matrix(out, f.packed);
  }
  if (!out) throw StoreError("write_store: write failed for " + path);
}

SampleStore read_store(const std::string& path, const std::string& expected_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("read_store: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, kMagic)) throw StoreError("read_store: not a sample store: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (1u << 30)) throw StoreError("read_store: bad header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw StoreError("read_store: truncated header");
  Json h = Json::parse(text);
  SampleStore st;
  st.fingerprint = h.at("fingerprint").get<std::string>();
  if (!expected_fingerprint.empty() && expected_fingerprint != st.fingerprint)
    throw StoreError("read_store: fingerprint mismatch (store " + st.fingerprint + ", expected " +
                     expected_fingerprint + ")");
  st.config = model_from_json(h.at("model"));
  st.grid.horizon = h.at("grid").at("horizon").get<double>();
  st.grid.steps_per_year = h.at("grid").at("steps_per_year").get<int>();
  st.seed = h.at("seed").get<std::uint64_t>();
  st.n_paths = h.at("paths").get<std::size_t>();
  const auto& o = h.at("options");
  st.options.scheme = scheme_from_string(o.at("scheme").get<std::string>());
  st.options.keep_signatures = o.at("keep_signatures").get<bool>();
  st.options.vix_maturities = o.at("vix_maturities").get<std::vector<double>>();
  st.options.slice_starts = o.at("slice_starts").get<std::vector<double>>();
  const Index D = h.at("dims").at("sig").get<Index>();
  const Index A = h.at("dims").at("ito").get<Index>();
  const Index P = h.at("dims").at("pairs").get<Index>();
  const Index N = static_cast<Index>(st.n_paths);
  std::vector<double> mats;
  for (const auto& jb : h.at("blocks")) {
    MaturityBlock b;
    b.requested = jb.at("requested").get<double>();
    b.time = jb.at("time").get<double>();
    b.grid_index = jb.at("grid_index").get<Index>();
    mats.push_back(b.requested);
    if (st.options.keep_signatures) read_matrix(in, b.sig, D, N);
    read_matrix(in, b.ito, A, N);
    read_matrix(in, b.q0, P, N);
    for (const auto& f : jb.at("factors")) {
      WindowFactors w;
      w.tau_lo = f[0].get<double>();
      w.tau_hi = f[1].get<double>();
      read_matrix(in, w.packed, P, N);
      b.factors.push_back(std::move(w));
    }
    st.blocks.push_back(std::move(b));
  }
  if (store_fingerprint(st.config, st.grid, mats, st.n_paths, st.seed, st.options) != st.fingerprint)
    throw StoreError("read_store: header does not match its fingerprint");
  return st;
}

Eigen::MatrixXd vix_moment_matrix(const ModelConfig& cfg, const PathGrid& grid, double maturity, std::size_t n_paths,
                                  std::uint64_t seed, Scheme scheme) {
  const QAssembler qa(cfg);
  const Eigen::MatrixXd w = qa.window_weights(cfg.delta);
  PathGrid g = grid;
  g.horizon = std::max(grid.horizon, maturity);
  const Index P = qa.pairs();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(P, P);
  for_each_chunk(cfg, g, {g.snap(maturity)}, n_paths, seed, scheme, 256,
                 [&](std::size_t, const std::vector<Eigen::MatrixXd>& bx, const std::vector<Eigen::MatrixXd>&) {
                   Eigen::MatrixXd q = w * bx[0];
                   acc.selfadjointView<Eigen::Lower>().rankUpdate(q);
                 });
  acc = acc.selfadjointView<Eigen::Lower>();
  return acc / static_cast<double>(n_paths);
}

}  // namespace sigvol
