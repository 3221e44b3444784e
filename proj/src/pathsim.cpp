#include "sigvol/pathsim.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace sigvol {

Index PathGrid::steps() const {
  if (!(horizon > 0) || steps_per_year < 1) throw ConfigError("grid: need horizon > 0 and steps_per_year >= 1");
  return static_cast<Index>(std::ceil(horizon * steps_per_year - 1e-9));
}

Index PathGrid::snap(double t) const {
  if (t < 0) throw ConfigError("grid: negative time");
  Index k = static_cast<Index>(std::llround(t * steps_per_year));
  if (k > steps()) {
    std::ostringstream os;
    os << "grid: time " << t << " beyond horizon " << horizon;
    throw ConfigError(os.str());
  }
  return k;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t root, std::uint64_t path) { return splitmix64(splitmix64(root) ^ path); }

PathGenerator::PathGenerator(const ModelConfig& cfg, const PathGrid& grid, Scheme scheme)
    : cfg_(cfg), scheme_(scheme), h_(grid.step()), steps_(grid.steps()) {
  cfg_.validate();
  const int m = cfg.d + 1;  // X^1..X^d, B
  decay_.resize(m);
  Eigen::MatrixXd cov(m, m);
  for (int i = 1; i <= m; ++i) {
    double ki = cfg_.kappa_of(i);
    decay_[i - 1] = scheme == Scheme::Exact ? std::exp(-ki * h_) : 1.0 - ki * h_;
    for (int j = 1; j <= m; ++j) {
      double k = cfg_.kappa_of(i) + cfg_.kappa_of(j);
      double phi = h_;
      if (scheme == Scheme::Exact && k > 0) phi = -std::expm1(-k * h_) / k;
      cov(i - 1, j - 1) = cfg_.sigma_of(i) * cfg_.sigma_of(j) * cfg_.rho_of(i, j) * phi;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    chol_ = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    chol_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
}

void PathGenerator::increments(std::uint64_t root, std::uint64_t path, Eigen::MatrixXd& out) const {
  const int m = cfg_.d + 1;
  out.resize(m + 1, steps_);
  std::mt19937_64 eng(path_seed(root, path));
  std::normal_distribution<double> nd;
  Eigen::VectorXd x(m), z(m), eps(m);
  for (int i = 1; i <= m; ++i) x[i - 1] = cfg_.x0_of(i);
  for (Index k = 0; k < steps_; ++k) {
    for (int i = 0; i < m; ++i) z[i] = nd(eng);
    eps.noalias() = chol_ * z;
    out(0, k) = h_;
    for (int i = 0; i < m; ++i) {
      double th = cfg_.theta_of(i + 1);
      double dx = (th - x[i]) * (1.0 - decay_[i]) + eps[i];
      if (cfg_.kappa_of(i + 1) == 0.0) dx = eps[i];
      x[i] += dx;
      out(i + 1, k) = dx;
    }
  }
}

Eigen::MatrixXd PathGenerator::trajectory(std::uint64_t root, std::uint64_t path) const {
  Eigen::MatrixXd inc;
  increments(root, path, inc);
  Eigen::MatrixXd tr(steps_ + 1, dim());
  tr(0, 0) = 0.0;
  for (int i = 1; i <= cfg_.d + 1; ++i) tr(0, i) = cfg_.x0_of(i);
  for (Index k = 0; k < steps_; ++k) {
    tr.row(k + 1) = tr.row(k) + inc.col(k).transpose();
    tr(k + 1, 0) = static_cast<double>(k + 1) * h_;
  }
  return tr;
}

std::vector<Eigen::MatrixXd> simulate_paths(const ModelConfig& cfg, const PathGrid& grid, std::size_t n_paths,
                                            std::uint64_t seed, Scheme scheme) {
  if (n_paths < 1) throw ConfigError("simulate_paths: need at least one path");
  PathGenerator gen(cfg, grid, scheme);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) out.push_back(gen.trajectory(seed, p));
  return out;
}

Eigen::VectorXd segment_signature_dense(const Eigen::VectorXd& increment, int level) {
  Labeling lab(static_cast<int>(increment.size()), level);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(lab.size());
  s[0] = 1.0;
  std::vector<double> work(2 * lab.level_size(level));
  chen_append(s.data(), increment.data(), lab, work.data());
  return s;
}

CoeffTensor segment_signature(const Eigen::VectorXd& increment, int level) {
  Labeling lab(static_cast<int>(increment.size()), level);
  return unvec(segment_signature_dense(increment, level), lab);
}

std::vector<Eigen::VectorXd> running_signatures(const Eigen::MatrixXd& path, int level,
                                                const std::vector<Index>& at) {
  const int A = static_cast<int>(path.cols());
  Labeling lab(A, level);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(lab.size());
  s[0] = 1.0;
  std::vector<double> work(2 * lab.level_size(level));
  Eigen::VectorXd inc(A);
  std::vector<Eigen::VectorXd> out;
  std::size_t next = 0;
  for (Index k = 0; k < path.rows() && next < at.size(); ++k) {
    if (k > 0) {
      inc = (path.row(k) - path.row(k - 1)).transpose();
      chen_append(s.data(), inc.data(), lab, work.data());
    }
    while (next < at.size() && at[next] == k) {
      out.push_back(s);
      ++next;
    }
  }
  if (next != at.size()) throw std::out_of_range("running_signatures: requested index beyond path");
  return out;
}

Eigen::VectorXd path_signature_dense(const Eigen::MatrixXd& path, int level) {
  return running_signatures(path, level, {path.rows() - 1}).front();
}

CoeffTensor path_signature(const Eigen::MatrixXd& path, int level) {
  return unvec(path_signature_dense(path, level), Labeling(static_cast<int>(path.cols()), level));
}

Eigen::VectorXd chen_product(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Labeling& lab) {
  if (a.size() != lab.size() || b.size() != lab.size()) throw std::invalid_argument("chen_product: dimension mismatch");
  Eigen::VectorXd r = Eigen::VectorXd::Zero(lab.size());
  const int L = lab.level();
  for (int m = 0; m <= L; ++m) {
    for (int i = 0; i <= m; ++i) {
      const int j = m - i;
      const Index ni = lab.level_size(i), nj = lab.level_size(j);
      for (Index p = 0; p < ni; ++p) {
        double av = a[lab.level_offset(i) + p];
        if (av == 0.0) continue;
        r.segment(lab.level_offset(m) + p * nj, nj) += av * b.segment(lab.level_offset(j), nj);
      }
    }
  }
  return r;
}

Eigen::VectorXd ito_contractions(const Eigen::VectorXd& sig_z,
                                 const Eigen::SparseMatrix<double, Eigen::RowMajor>& e_tilde) {
  if (sig_z.size() != e_tilde.cols()) throw AlphabetMismatch("ito_contractions: signature dimension mismatch");
  return e_tilde * sig_z;
}

}  // namespace sigvol
