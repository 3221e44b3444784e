#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sigvol/model.hpp"
#include "sigvol/sigtensor.hpp"

namespace sigvol {

// Uniform grid on [0, horizon] with step 1/steps_per_year.
struct PathGrid {
  double horizon = 1.0;
  int steps_per_year = 2520;

  double step() const { return 1.0 / steps_per_year; }
  Index steps() const;
  double time_at(Index k) const { return static_cast<double>(k) / steps_per_year; }
  // nearest grid index; throws if t is outside the grid
  Index snap(double t) const;
};

enum class Scheme { Exact, Euler };

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t path_seed(std::uint64_t root, std::uint64_t path);

// Generates increments of Ẑ = (t, X, B) path by path. Path i only depends on (root seed, i).
class PathGenerator {
 public:
  PathGenerator(const ModelConfig& cfg, const PathGrid& grid, Scheme scheme = Scheme::Exact);

  Index steps() const { return steps_; }
  int dim() const { return cfg_.d + 2; }

  // out: (d+2) x steps, column k = Ẑ_{t_{k+1}} - Ẑ_{t_k}
  void increments(std::uint64_t root, std::uint64_t path, Eigen::MatrixXd& out) const;
  // (steps+1) x (d+2): rows are (t, X^1..X^d, B)
  Eigen::MatrixXd trajectory(std::uint64_t root, std::uint64_t path) const;

 private:
  ModelConfig cfg_;
  Scheme scheme_;
  double h_;
  Index steps_;
  Eigen::VectorXd decay_;  // e^{-κh} (exact) or 1-κh (Euler)
  Eigen::MatrixXd chol_;   // square root of the one-step noise covariance over (X, B)
};

std::vector<Eigen::MatrixXd> simulate_paths(const ModelConfig& cfg, const PathGrid& grid, std::size_t n_paths,
                                            std::uint64_t seed, Scheme scheme = Scheme::Exact);

// sig <- sig ⊗ exp(inc), dense labeled layout truncated at lab.level().
// work must hold 2·A^level scalars.
template <typename Scalar>
void chen_append(Scalar* sig, const Scalar* inc, const Labeling& lab, Scalar* work) {
  const int A = lab.alphabet();
  const int L = lab.level();
  const Index top = lab.level_size(L);
  for (int m = L; m >= 1; --m) {
    Scalar* cur = work;
    Scalar* nxt = work + top;
    cur[0] = sig[0];
    Index size = 1;
    for (int j = 1; j <= m; ++j) {
      const Scalar f = Scalar(1) / Scalar(m - j + 1);
      const Scalar* sj = sig + lab.level_offset(j);
      for (Index p = 0; p < size; ++p) {
        const Scalar v = cur[p] * f;
        Scalar* dst = nxt + p * A;
        const Scalar* src = sj + p * A;
        for (int a = 0; a < A; ++a) dst[a] = v * inc[a] + src[a];
      }
      size *= A;
      std::swap(cur, nxt);
    }
    Scalar* sm = sig + lab.level_offset(m);
    for (Index p = 0; p < size; ++p) sm[p] = cur[p];
  }
}

// Truncated tensor exponential of one linear segment.
CoeffTensor segment_signature(const Eigen::VectorXd& increment, int level);
Eigen::VectorXd segment_signature_dense(const Eigen::VectorXd& increment, int level);

// path: rows are points, columns are coordinates
Eigen::VectorXd path_signature_dense(const Eigen::MatrixXd& path, int level);
CoeffTensor path_signature(const Eigen::MatrixXd& path, int level);
// signatures of path[0..k] for each requested point index k (ascending)
std::vector<Eigen::VectorXd> running_signatures(const Eigen::MatrixXd& path, int level,
                                                const std::vector<Index>& at);

// truncated tensor product a ⊗ b of dense labeled tensors
Eigen::VectorXd chen_product(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Labeling& lab);

// ⟨ẽ_I^B, Ẑ_T⟩ for all |I| <= n; e_tilde has one row per word I (see spxcore)
Eigen::VectorXd ito_contractions(const Eigen::VectorXd& sig_z, const Eigen::SparseMatrix<double, Eigen::RowMajor>& e_tilde);

}  // namespace sigvol
