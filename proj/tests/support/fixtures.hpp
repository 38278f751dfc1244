#pragma once

// Shared panels and checks for the LVBC tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "consensus/lvbc.hpp"
#include "consensus/panel.hpp"
#include "consensus/random.hpp"
#include "consensus/synthetic.hpp"

namespace consensus::testing {

/// Labelled panel with `num_entries` entries spread over `num_instruments`
/// instruments; actuals alternate in sign so both branches are exercised.
inline ForecastPanel random_panel(std::size_t num_entries, std::size_t num_instruments,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.2, 4.0);
  ForecastPanel p;
  const std::size_t per_quantity = std::min<std::size_t>(num_instruments, 3);
  for (std::size_t e = 0, q = 0; e < num_entries; ++q) {
    const double x = (q % 2 ? 1.0 : -1.0) * mag(rng);
    p.set_actual("q" + std::to_string(q), x);
    for (std::size_t k = 0; k < per_quantity && e < num_entries; ++k, ++e) {
      const std::size_t j = (q + k) % num_instruments;
      p.add_forecast("q" + std::to_string(q), "i" + std::to_string(j), 0.8 * x + noise(rng));
    }
  }
  return p;
}

/// Non-trivial parameters: free groups perturbed from identity, varied logits.
inline LvbcParameters random_parameters(std::size_t num_groups,
                                        const std::vector<std::string>& instruments, bool pinned,
                                        std::uint64_t seed) {
  LvbcParameters p = LvbcParameters::identity(num_groups, instruments, pinned, 1.0);
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t k = 0; k < num_groups; ++k) {
    if (!(pinned && k == 0)) {
      for (std::size_t b = 0; b < kNumSignBranches; ++b) {
        p.alpha[k][b] = 1.0 + 0.3 * n(rng);
        p.beta[k][b] = 0.3 * n(rng);
      }
    }
    p.log_sigma[k] = 0.3 * n(rng);
  }
  for (auto& w : p.logits) w = n(rng);
  return p;
}

/// Largest relative error between the analytic ELBO gradient and central
/// differences with step h, over every free coordinate. Relative error uses
/// max(|g|, 1) as the scale so near-zero coordinates are compared absolutely.
inline double max_fd_relative_error(const LvbcParameters& params, const HyperParams& hyper,
                                    const ForecastPanel& panel, double h = 1e-5) {
  const auto analytic = elbo_gradient(params, hyper, panel).pack();
  const auto theta = params.pack();
  // Pinned coordinates: alpha[0][0..1] at 0,1 and beta[0][0..1] at 2K, 2K+1.
  const std::size_t K = params.num_groups;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const bool pinned_coord = params.pinned && (i < 2 || (i >= 2 * K && i < 2 * K + 2));
    if (pinned_coord) {
      worst = std::max(worst, std::abs(analytic[i]));
      continue;
    }
    LvbcParameters plus = params, minus = params;
    auto tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    plus.unpack(tp);
    minus.unpack(tm);
    const double fd = (elbo(plus, hyper, panel) - elbo(minus, hyper, panel)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic[i]) / std::max(std::abs(analytic[i]), 1.0));
  }
  return worst;
}

/// The two-group recovery world: group 0 is identity with sigma 1, group 1
/// has alpha 0.7, beta -0.3, sigma 0.5; instruments split evenly.
inline LvbcWorld recovery_world(std::size_t num_instruments = 50) {
  LvbcWorld w;
  w.num_instruments = num_instruments;
  w.groups = {GroupSpec{{1.0, 1.0}, {0.0, 0.0}, 1.0, 0.5},
              GroupSpec{{0.7, 0.7}, {-0.3, -0.3}, 0.5, 0.5}};
  return w;
}

struct RecoveryData {
  std::vector<int> groups;
  ForecastPanel train, valid, test;
};

inline RecoveryData recovery_data(std::uint64_t seed, std::size_t num_train = 400,
                                  std::size_t num_valid = 200, std::size_t num_test = 400) {
  const LvbcWorld w = recovery_world();
  RecoveryData d;
  d.groups = assign_instrument_groups(w, derive_stream_seed(seed, 0, 1));
  d.train = generate_lvbc_panel(w, d.groups, num_train, derive_stream_seed(seed, 1, 1), "train_q");
  d.valid = generate_lvbc_panel(w, d.groups, num_valid, derive_stream_seed(seed, 2, 1), "valid_q");
  d.test = generate_lvbc_panel(w, d.groups, num_test, derive_stream_seed(seed, 3, 1), "test_q");
  return d;
}

/// Hyperparameters that train the recovery world in about a second per restart.
inline HyperParams quick_hyper() {
  HyperParams h;
  h.prior_strength = 100.0;
  h.learning_rate = 0.01;
  h.minibatch_size = 1000;
  h.max_epochs = 300;
  h.patience = 10;
  h.num_restarts = 3;
  return h;
}

/// Fraction of instruments whose most likely fitted group matches the generator.
inline double assignment_accuracy(const LvbcParameters& params, const std::vector<int>& truth) {
  std::size_t hits = 0;
  for (std::size_t j = 0; j < params.num_instruments(); ++j) {
    const auto idx = std::stoul(params.instruments[j].substr(4));  // "inst<j>"
    if (static_cast<int>(params.most_likely_group(j)) == truth.at(idx)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(params.num_instruments());
}

}  // namespace consensus::testing
