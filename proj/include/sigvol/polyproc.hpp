#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sigvol/model.hpp"
#include "sigvol/sigtensor.hpp"

namespace sigvol {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Drift b_j (level <= 1) and diffusion a_ij (level <= 2) of a polynomial diffusion,
// expressed in signature coordinates.
struct PolyCoefficients {
  int alphabet = 0;
  std::vector<CoeffTensor> b;  // size alphabet
  std::vector<CoeffTensor> a;  // alphabet*alphabet, row major

  const CoeffTensor& drift(int j) const { return b[j]; }
  const CoeffTensor& diffusion(int i, int j) const { return a[i * alphabet + j]; }
  void validate() const;
};

// alphabet = d+1 gives (t,X); alphabet = d+2 adds the price BM as letter d+1.
PolyCoefficients build_coefficients(const ModelConfig& cfg, int alphabet);

// L e_I, L e_∅ = 0
CoeffTensor apply_dual(const Word& word, const PolyCoefficients& coeffs);

// G with G·vec(u) = vec(Lu). Column k holds vec(L e_{word k}).
struct DualMatrix {
  Labeling labeling;
  SparseMatrix G;
  int level() const { return labeling.level(); }
  Index size() const { return labeling.size(); }
};

DualMatrix build_G(const PolyCoefficients& coeffs, int level);

PolyCoefficients restrict_alphabet(const PolyCoefficients& coeffs, std::span<const int> letters);
// G^E on words over the letters E (relabeled 0..|E|-1 in the given order)
DualMatrix restrict_alphabet(const DualMatrix& dual, std::span<const int> letters);
// picks the components of a full-alphabet vector that belong to words over E
Eigen::VectorXd project_to_alphabet(const Eigen::VectorXd& v, const Labeling& full, std::span<const int> letters,
                                    int level);
// labels in `full` of all words over E up to `level`, in the order of the restricted labeling
std::vector<Index> alphabet_embedding(const Labeling& full, std::span<const int> letters, int level);

// exp(M): Padé 13 with scaling and squaring.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

// e^{tM}·V by a scaled truncated Taylor series (sparse M).
Eigen::MatrixXd exp_action(const SparseMatrix& m, double t, const Eigen::MatrixXd& v);

enum class ExpMethod { Auto, Dense, Action };

// e^{tGᵀ}·state
Eigen::VectorXd expected_signature(const DualMatrix& dual, double t, const Eigen::VectorXd& state,
                                   ExpMethod method = ExpMethod::Auto);

// e^{tG}·V, used for vec-maps of the dual side
Eigen::MatrixXd dual_exp_apply(const DualMatrix& dual, double t, const Eigen::MatrixXd& v,
                               ExpMethod method = ExpMethod::Auto);

enum class IntegrationMethod { Trapezoid, Taylor, Augmented };

// ∫_0^Δ e^{tGᵀ} dt (dense)
// Taylor stops as soon as a power of G vanishes; terms_used reports how many were summed.
Eigen::MatrixXd integrated_exponential(const DualMatrix& dual, double delta, IntegrationMethod method,
                                       int terms = 64, int* terms_used = nullptr);

double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace sigvol
