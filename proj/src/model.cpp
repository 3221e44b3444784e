#include "sigvol/model.hpp"

#include <cmath>
#include <sstream>

namespace sigvol {

double smallest_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void ModelConfig::validate() const {
  if (d < 1) throw ConfigError("model: d must be >= 1");
  if (n < 0) throw ConfigError("model: n must be >= 0");
  auto need = [&](const Eigen::VectorXd& v, const char* name) {
    if (v.size() != d) {
      std::ostringstream os;
      os << "model: " << name << " has length " << v.size() << ", expected " << d;
      throw ConfigError(os.str());
    }
    if (!v.allFinite()) throw ConfigError(std::string("model: non-finite ") + name);
  };
  need(kappa, "kappa");
  need(theta, "theta");
  need(sigma, "sigma");
  need(x0, "x0");
  if ((kappa.array() < 0).any()) throw ConfigError("model: kappa must be >= 0");
  if ((sigma.array() <= 0).any()) throw ConfigError("model: sigma must be > 0");
  if (!(delta > 0)) throw ConfigError("model: delta must be > 0");
  if (rho.rows() != d + 1 || rho.cols() != d + 1) throw ConfigError("model: rho must be (d+1)x(d+1)");
  if (!rho.allFinite()) throw ConfigError("model: non-finite rho");
  for (int i = 0; i <= d; ++i) {
    if (std::abs(rho(i, i) - 1.0) > 1e-12) throw ConfigError("model: rho diagonal must be 1");
    for (int j = 0; j < i; ++j)
      if (std::abs(rho(i, j) - rho(j, i)) > 1e-12) throw ConfigError("model: rho not symmetric");
  }
  double lam = smallest_eigenvalue(rho);
  if (lam < -1e-10) {
    std::ostringstream os;
    os << "model: rho is not positive semidefinite (smallest eigenvalue " << lam << ")";
    throw ConfigError(os.str());
  }
}

double ModelConfig::kappa_of(int letter) const {
  if (letter == price_letter() || kind == ProcessKind::BrownianMotion) return 0.0;
  return kappa[letter - 1];
}
double ModelConfig::theta_of(int letter) const {
  return letter == price_letter() ? 0.0 : theta[letter - 1];
}
double ModelConfig::sigma_of(int letter) const {
  return letter == price_letter() ? 1.0 : sigma[letter - 1];
}
double ModelConfig::x0_of(int letter) const {
  return letter == price_letter() ? 0.0 : x0[letter - 1];
}

std::string to_string(ProcessKind k) { return k == ProcessKind::OU ? "ou" : "bm"; }

ProcessKind process_kind_from_string(const std::string& s) {
  if (s == "ou" || s == "OU") return ProcessKind::OU;
  if (s == "bm" || s == "BM" || s == "brownian") return ProcessKind::BrownianMotion;
  throw ConfigError("unknown process kind '" + s + "'");
}

}  // namespace sigvol
