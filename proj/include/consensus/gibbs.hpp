#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "consensus/estimators.hpp"
#include "consensus/lvbc.hpp"
#include "consensus/panel.hpp"

namespace consensus {

struct ConditionalPosterior {
  double mean = 0.0;
  double variance = 1.0;
};

/// A forecast together with the latent group currently assigned to its instrument.
struct GroupedReading {
  double forecast = 0.0;
  std::size_t group = 0;
};

/// Normal posterior of X given grouped readings, prior N(0, 1/lambda0) and the
/// sign branch xi:
///   variance = 1 / (lambda0 + sum_j alpha_j^2 / sigma_j^2)
///   mean     = variance * sum_j alpha_j (Xhat_j - beta_j) / sigma_j^2
ConditionalPosterior conditional_posterior(std::span<const GroupedReading> readings,
                                           const LvbcParameters& params, int xi, double lambda0);

struct GibbsBudget {
  std::size_t num_samples = 1000;  // total iterations N
  std::size_t burn_in = 100;
  double credible_level = 0.95;
};

struct ChainOutput {
  std::string quantity_id;
  std::vector<double> samples;  // iterations burn_in+1 .. N
  double point_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct GibbsResult {
  std::vector<ChainOutput> chains;     // panel quantity order
  std::vector<std::string> excluded;   // quantities without readings

  const ChainOutput* find(const std::string& quantity_id) const;
};

/// Inverse inference by Gibbs sampling. X_i starts at the plain average of its
/// readings and xi_i at its sign. Each iteration redraws every instrument's
/// group from softmax(w_j), then every X_i from conditional_posterior using
/// the previous xi_i, then sets xi_i = 1{X_i > 0}. Instruments unknown to
/// `params` draw their group uniformly. Actuals in the panel are ignored.
GibbsResult gibbs_run(const ForecastPanel& panel, const LvbcParameters& params, double lambda0,
                      const GibbsBudget& budget, std::uint64_t seed);

/// Posterior-mean estimate per quantity id.
std::map<std::string, double> infer_point_estimates(const ForecastPanel& panel,
                                                    const LvbcParameters& params,
                                                    double lambda0, const GibbsBudget& budget,
                                                    std::uint64_t seed);

}  // namespace consensus
