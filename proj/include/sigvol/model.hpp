#pragma once

#include <string>

#include <Eigen/Dense>

#include "sigvol/errors.hpp"

namespace sigvol {

enum class ProcessKind { OU, BrownianMotion };

// Primary-process hyperparameters. Letters: 0 = time, 1..d = factors, d+1 = price BM.
struct ModelConfig {
  ProcessKind kind = ProcessKind::OU;
  int d = 1;
  int n = 1;
  Eigen::VectorXd kappa;
  Eigen::VectorXd theta;
  Eigen::VectorXd sigma;
  Eigen::VectorXd x0;
  Eigen::MatrixXd rho;  // (d+1)x(d+1), price BM last
  double delta = 1.0 / 12.0;

  void validate() const;

  int alphabet_x() const { return d + 1; }
  int alphabet_z() const { return d + 2; }
  int price_letter() const { return d + 1; }

  // per-letter values for process letters 1..d+1 (price BM has κ=0, σ=1, X0=0)
  double kappa_of(int letter) const;
  double theta_of(int letter) const;
  double sigma_of(int letter) const;
  double x0_of(int letter) const;
  double rho_of(int i, int j) const { return rho(i - 1, j - 1); }
};

double smallest_eigenvalue(const Eigen::MatrixXd& sym);

std::string to_string(ProcessKind k);
ProcessKind process_kind_from_string(const std::string& s);

}  // namespace sigvol
