#pragma once

#include <random>

#include <Eigen/Dense>

#include "sigvol/model.hpp"

namespace testutil {

inline sigvol::ModelConfig ou2(int n = 2) {
  sigvol::ModelConfig m;
  m.d = 2;
  m.n = n;
  m.kappa = Eigen::Vector2d(0.1, 25);
  m.theta = Eigen::Vector2d(0.1, 4);
  m.sigma = Eigen::Vector2d(0.7, 10);
  m.x0 = Eigen::Vector2d(1, 0.08);
  m.rho.resize(3, 3);
  m.rho << 1, -0.577, 0.3, -0.577, 1, -0.6, 0.3, -0.6, 1;
  return m;
}

inline sigvol::ModelConfig ou1(int n = 1) {
  sigvol::ModelConfig m;
  m.d = 1;
  m.n = n;
  m.kappa = Eigen::VectorXd::Constant(1, 25);
  m.theta = Eigen::VectorXd::Constant(1, 4);
  m.sigma = Eigen::VectorXd::Constant(1, 10);
  m.x0 = Eigen::VectorXd::Constant(1, 0.08);
  m.rho = Eigen::Matrix2d::Identity();
  m.rho(0, 1) = m.rho(1, 0) = -0.5;
  return m;
}

inline sigvol::ModelConfig bm2(int n = 2) {
  sigvol::ModelConfig m = ou2(n);
  m.kind = sigvol::ProcessKind::BrownianMotion;
  m.kappa = Eigen::Vector2d::Zero();
  m.theta = Eigen::Vector2d::Zero();
  m.x0 = Eigen::Vector2d::Zero();
  m.sigma = Eigen::Vector2d::Ones();
  return m;
}

// piecewise linear path with a time column
inline Eigen::MatrixXd random_path(int points, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.3);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(points, dim);
  for (int k = 1; k < points; ++k) {
    p(k, 0) = p(k - 1, 0) + 0.1;
    for (int j = 1; j < dim; ++j) p(k, j) = p(k - 1, j) + g(rng);
  }
  return p;
}

}  // namespace testutil
