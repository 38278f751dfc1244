#pragma once

// Independent reference computations used by the unit and acceptance suites.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "consensus/gibbs.hpp"
#include "consensus/lvbc.hpp"
#include "consensus/panel.hpp"

namespace consensus::testing {

/// Posterior of X from Xtilde = alpha X + beta + noise written as a weighted
/// least-squares problem and solved with dense matrices.
inline ConditionalPosterior dense_posterior(const std::vector<double>& forecasts,
                                            const std::vector<double>& alphas,
                                            const std::vector<double>& betas,
                                            const std::vector<double>& sigmas, double lambda0) {
  const auto n = static_cast<Eigen::Index>(forecasts.size());
  Eigen::MatrixXd a(n, 1);
  Eigen::VectorXd xt(n);
  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    a(j, 0) = alphas[j];
    xt(j) = forecasts[j] - betas[j];
    precision(j, j) = 1.0 / (sigmas[j] * sigmas[j]);
  }
  Eigen::MatrixXd info = a.transpose() * precision * a;
  info(0, 0) += lambda0;
  const Eigen::MatrixXd cov = info.inverse();
  const Eigen::VectorXd mean = cov * (a.transpose() * precision * xt);
  return {mean(0), cov(0, 0)};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Stationary mean of X_i under the sampler that draws z from its prior, X
/// from the conditional posterior given the previous sign branch, and then
/// resets the branch from the sign of X. The branch is a two-state Markov
/// chain; z is enumerated exhaustively over the instruments that read the
/// quantity.
inline double enumerated_chain_mean(const std::vector<std::pair<std::size_t, double>>& readings,
                                    const LvbcParameters& params, double lambda0) {
  const std::size_t K = params.num_groups;
  const std::size_t n = readings.size();
  std::size_t combos = 1;
  for (std::size_t j = 0; j < n; ++j) combos *= K;

  double p_up[2] = {0.0, 0.0};   // P(next branch = 1 | current branch)
  double mean_x[2] = {0.0, 0.0}; // E[X | current branch]
  std::vector<GroupedReading> grouped(n);
  std::vector<std::size_t> z(n);
  for (std::size_t c = 0; c < combos; ++c) {
    double prior = 1.0;
    std::size_t code = c;
    for (std::size_t j = 0; j < n; ++j) {
      z[j] = code % K;
      code /= K;
      prior *= params.group_probabilities(readings[j].first)[z[j]];
      grouped[j] = {readings[j].second, z[j]};
    }
    for (int xi = 0; xi < 2; ++xi) {
      const auto post = conditional_posterior(grouped, params, xi, lambda0);
      p_up[xi] += prior * normal_cdf(post.mean / std::sqrt(post.variance));
      mean_x[xi] += prior * post.mean;
    }
  }
  // Stationary law of the branch chain with P(0 -> 1) = p_up[0], P(1 -> 0) = 1 - p_up[1].
  const double to_one = p_up[0];
  const double to_zero = 1.0 - p_up[1];
  const double pi_one = to_one + to_zero > 0.0 ? to_one / (to_one + to_zero) : 0.5;
  return (1.0 - pi_one) * mean_x[0] + pi_one * mean_x[1];
}

/// Standard error of a correlated series' mean from non-overlapping batch means.
inline double batch_means_se(const std::vector<double>& xs, std::size_t num_batches) {
  const std::size_t size = xs.size() / num_batches;
  std::vector<double> means(num_batches, 0.0);
  for (std::size_t b = 0; b < num_batches; ++b) {
    for (std::size_t i = 0; i < size; ++i) means[b] += xs[b * size + i];
    means[b] /= static_cast<double>(size);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(num_batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return std::sqrt(ss / static_cast<double>(num_batches - 1) / static_cast<double>(num_batches));
}

/// Ridge solution shrinking (slope, intercept) toward (1, 0), from the
/// stacked least-squares system [X; sqrt(r) I] theta = [y; sqrt(r) (1, 0)].
inline Eigen::Vector2d stacked_ridge(const std::vector<double>& x, const std::vector<double>& y,
                                     double ridge) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n + 2, 2);
  Eigen::VectorXd target(n + 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = x[i];
    design(i, 1) = 1.0;
    target(i) = y[i];
  }
  const double s = std::sqrt(ridge);
  design.row(n) << s, 0.0;
  design.row(n + 1) << 0.0, s;
  target(n) = s;
  target(n + 1) = 0.0;
  return design.colPivHouseholderQr().solve(target);
}

/// Creates a fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("consensus_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace consensus::testing
