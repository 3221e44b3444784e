#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigvol/model.hpp"
#include "sigvol/pathsim.hpp"
#include "sigvol/polyproc.hpp"
#include "sigvol/vixcore.hpp"

namespace sigvol {

// Packed upper Cholesky factors of Q(T,τ_hi) − Q(T,τ_lo), one column per sample.
struct WindowFactors {
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  Eigen::MatrixXd packed;  // P x N
};

struct MaturityBlock {
  double requested = 0.0;
  double time = 0.0;  // snapped
  Index grid_index = 0;
  Eigen::MatrixXd sig;  // D x N, B-free signature at level 2n+1 (empty if not kept)
  Eigen::MatrixXd ito;  // A_n x N, ⟨ẽ_I^B, Ẑ_T⟩
  Eigen::MatrixXd q0;   // P x N, packed Q⁰(T)
  std::vector<WindowFactors> factors;

  Index samples() const { return ito.cols(); }
  const WindowFactors* find_factors(double tau_lo, double tau_hi) const;
  // stored pieces tiling [tau_lo, tau_hi]; empty if they do not
  std::vector<const WindowFactors*> cover(double tau_lo, double tau_hi) const;
};

struct StoreOptions {
  Scheme scheme = Scheme::Exact;
  bool keep_signatures = true;
  // maturities that get VIX factors; pieces follow from slice_starts (just {0} for constant ℓ)
  std::vector<double> vix_maturities;
  std::vector<double> slice_starts = {0.0};
  ExpMethod exp_method = ExpMethod::Auto;
  Index chunk = 256;
};

struct SampleStore {
  ModelConfig config;
  PathGrid grid;
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  StoreOptions options;
  std::string fingerprint;
  std::vector<MaturityBlock> blocks;

  // block for maturity T (matched after snapping); throws if absent
  const MaturityBlock& at(double maturity) const;
  bool has(double maturity) const;
};

std::string store_fingerprint(const ModelConfig& cfg, const PathGrid& grid, const std::vector<double>& maturities,
                              std::size_t n_paths, std::uint64_t seed, const StoreOptions& opt);

// slice starts moved onto the store's time grid
ParamSlices snap_slices(const ParamSlices& slices, const SampleStore& store);

SampleStore build_sample_store(const ModelConfig& cfg, const PathGrid& grid, const std::vector<double>& maturities,
                               std::size_t n_paths, std::uint64_t seed, const StoreOptions& opt = {});

void write_store(const SampleStore& store, const std::string& path);
// expected_fingerprint empty = accept any
SampleStore read_store(const std::string& path, const std::string& expected_fingerprint = "");

// Second moments E[q qᵀ] of packed Q(T,Δ) from an independent run (VIX control variate with m = 2).
Eigen::MatrixXd vix_moment_matrix(const ModelConfig& cfg, const PathGrid& grid, double maturity, std::size_t n_paths,
                                  std::uint64_t seed, Scheme scheme = Scheme::Exact);

}  // namespace sigvol
