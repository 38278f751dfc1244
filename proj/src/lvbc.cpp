#include "consensus/lvbc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "consensus/error.hpp"
#include "consensus/gibbs.hpp"
#include "consensus/log.hpp"
#include "consensus/random.hpp"

namespace consensus {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kValidationStream = 0x7A11D;

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - top);
    total += out[k];
  }
  for (auto& p : out) p /= total;
}

// Training entries flattened against a parameter set's logits rows.
struct EntryTable {
  std::vector<std::size_t> row;
  std::vector<double> truth;
  std::vector<double> forecast;
  std::vector<std::uint8_t> branch;

  std::size_t size() const noexcept { return row.size(); }
};

EntryTable make_entry_table(const LvbcParameters& params, const ForecastPanel& panel) {
  std::unordered_map<std::string, std::size_t> lookup;
  for (std::size_t j = 0; j < params.instruments.size(); ++j) lookup.emplace(params.instruments[j], j);
  std::vector<std::size_t> rows(panel.num_instruments());
  for (std::size_t j = 0; j < panel.num_instruments(); ++j) {
    auto it = lookup.find(panel.instrument_ids()[j]);
    if (it == lookup.end()) {
      throw InvalidInput("instrument '" + panel.instrument_ids()[j] +
                         "' has no logits row in the parameter set");
    }
    rows[j] = it->second;
  }
  EntryTable t;
  const auto n = panel.num_entries();
  t.row.reserve(n);
  t.truth.reserve(n);
  t.forecast.reserve(n);
  t.branch.reserve(n);
  for (const auto& e : panel.entries()) {
    const auto& actual = panel.actual(e.quantity);
    if (!actual) {
      throw InvalidInput("quantity '" + panel.quantity_ids()[e.quantity] +
                         "' has forecasts but no actual");
    }
    t.row.push_back(rows[e.instrument]);
    t.truth.push_back(*actual);
    t.forecast.push_back(e.forecast);
    t.branch.push_back(*actual > 0.0 ? 1 : 0);
  }
  return t;
}

LvbcGradient zero_gradient(const LvbcParameters& p) {
  LvbcGradient g;
  g.alpha.assign(p.num_groups, {0.0, 0.0});
  g.beta.assign(p.num_groups, {0.0, 0.0});
  g.log_sigma.assign(p.num_groups, 0.0);
  g.logits.assign(p.logits.size(), 0.0);
  return g;
}

// Objective and (optionally) its gradient over a set of entry positions.
// `indices == nullptr` selects the whole table.
double evaluate(const LvbcParameters& p, const HyperParams& hyper, const EntryTable& table,
                const std::size_t* indices, std::size_t count, LvbcGradient* grad) {
  const std::size_t K = p.num_groups;
  const std::size_t A = p.num_instruments();

  std::vector<double> prob(A * K);
  for (std::size_t j = 0; j < A; ++j) {
    softmax_into(std::span(p.logits).subspan(j * K, K), std::span(prob).subspan(j * K, K));
  }
  std::vector<double> inv_var(K);
  for (std::size_t k = 0; k < K; ++k) inv_var[k] = std::exp(-2.0 * p.log_sigma[k]);

  std::vector<double> ell(K);
  double total = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t e = indices ? indices[c] : c;
    const std::size_t j = table.row[e];
    const double x = table.truth[e];
    const double xhat = table.forecast[e];
    const std::uint8_t b = table.branch[e];
    const double* pj = prob.data() + j * K;

    double expected = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double r = xhat - (p.alpha[k][b] * x + p.beta[k][b]);
      const double r2s = r * r * inv_var[k];
      ell[k] = -0.5 * r2s - p.log_sigma[k];
      expected += pj[k] * ell[k];
      if (grad) {
        const double w = pj[k] * r * inv_var[k];
        grad->alpha[k][b] += w * x;
        grad->beta[k][b] += w;
        grad->log_sigma[k] += pj[k] * (r2s - 1.0);
      }
    }
    total += expected;
    if (grad) {
      double* gj = grad->logits.data() + j * K;
      for (std::size_t k = 0; k < K; ++k) gj[k] += pj[k] * (ell[k] - expected);
    }
  }

  const double share = table.size() ? static_cast<double>(count) / static_cast<double>(table.size())
                                    : 0.0;
  const double scale = hyper.prior_strength * share;
  total -= scale * regularizer(p, hyper);

  if (grad) {
    for (std::size_t k = 0; k < K; ++k) {
      if (p.pinned && k == 0) {
        grad->alpha[0] = {0.0, 0.0};
        grad->beta[0] = {0.0, 0.0};
      } else {
        for (std::size_t b = 0; b < kNumSignBranches; ++b) {
          grad->alpha[k][b] -= 2.0 * scale * (p.alpha[k][b] - hyper.prior_alpha);
          grad->beta[k][b] -= 2.0 * scale * (p.beta[k][b] - hyper.prior_beta);
        }
      }
      const double s = p.sigma(k);
      grad->log_sigma[k] -= 2.0 * scale * (s - hyper.prior_sigma) * s;
    }
  }
  return total;
}

std::vector<std::size_t> checked_subset(std::optional<std::span<const std::size_t>> subset,
                                        std::size_t n) {
  if (!subset) return {};
  for (auto e : *subset) {
    if (e >= n) throw InvalidInput("subset index " + std::to_string(e) + " out of range");
  }
  return {subset->begin(), subset->end()};
}

}  // namespace

// ---------------------------------------------------------------------------

LvbcParameters LvbcParameters::identity(std::size_t num_groups,
                                        std::vector<std::string> instruments, bool pinned,
                                        double sigma) {
  if (num_groups < 1) throw InvalidInput("num_groups must be >= 1");
  if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
  LvbcParameters p;
  p.num_groups = num_groups;
  p.pinned = pinned;
  p.alpha.assign(num_groups, {1.0, 1.0});
  p.beta.assign(num_groups, {0.0, 0.0});
  p.log_sigma.assign(num_groups, std::log(sigma));
  p.instruments = std::move(instruments);
  p.logits.assign(p.instruments.size() * num_groups, 0.0);
  return p;
}

double LvbcParameters::sigma(std::size_t k) const { return std::exp(log_sigma.at(k)); }

std::vector<double> LvbcParameters::group_probabilities(std::size_t j) const {
  std::vector<double> out(num_groups);
  softmax_into(std::span(logits).subspan(j * num_groups, num_groups), out);
  return out;
}

std::size_t LvbcParameters::most_likely_group(std::size_t j) const {
  const auto first = logits.begin() + static_cast<std::ptrdiff_t>(j * num_groups);
  return static_cast<std::size_t>(
      std::distance(first, std::max_element(first, first + static_cast<std::ptrdiff_t>(num_groups))));
}

std::optional<std::size_t> LvbcParameters::find_instrument(const std::string& id) const {
  auto it = std::find(instruments.begin(), instruments.end(), id);
  if (it == instruments.end()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(instruments.begin(), it));
}

void LvbcParameters::validate() const {
  if (num_groups < 1) throw InvalidInput("num_groups must be >= 1");
  if (alpha.size() != num_groups || beta.size() != num_groups || log_sigma.size() != num_groups) {
    throw InvalidInput("per-group arrays do not match num_groups");
  }
  if (logits.size() != instruments.size() * num_groups) {
    throw InvalidInput("logits shape does not match instruments x num_groups");
  }
  for (std::size_t k = 0; k < num_groups; ++k) {
    for (std::size_t b = 0; b < kNumSignBranches; ++b) {
      if (!std::isfinite(alpha[k][b]) || !std::isfinite(beta[k][b])) {
        throw InvalidInput("non-finite calibration parameter");
      }
    }
    if (!std::isfinite(log_sigma[k])) throw InvalidInput("non-finite log_sigma");
  }
  for (double w : logits) {
    if (!std::isfinite(w)) throw InvalidInput("non-finite logit");
  }
  if (pinned && (alpha[0] != std::array<double, 2>{1.0, 1.0} ||
                 beta[0] != std::array<double, 2>{0.0, 0.0})) {
    throw InvalidInput("pinned group 0 must have alpha = 1 and beta = 0");
  }
}

void LvbcParameters::enforce_pin() {
  if (!pinned) return;
  alpha[0] = {1.0, 1.0};
  beta[0] = {0.0, 0.0};
}

std::vector<double> LvbcParameters::pack() const {
  std::vector<double> flat;
  flat.reserve(5 * num_groups + logits.size());
  for (const auto& a : alpha) flat.insert(flat.end(), a.begin(), a.end());
  for (const auto& b : beta) flat.insert(flat.end(), b.begin(), b.end());
  flat.insert(flat.end(), log_sigma.begin(), log_sigma.end());
  flat.insert(flat.end(), logits.begin(), logits.end());
  return flat;
}

void LvbcParameters::unpack(std::span<const double> flat) {
  if (flat.size() != 5 * num_groups + logits.size()) {
    throw InvalidInput("flat parameter vector has the wrong length");
  }
  auto it = flat.begin();
  for (auto& a : alpha) for (auto& v : a) v = *it++;
  for (auto& b : beta) for (auto& v : b) v = *it++;
  for (auto& s : log_sigma) s = *it++;
  for (auto& w : logits) w = *it++;
}

std::vector<double> LvbcGradient::pack() const {
  std::vector<double> flat;
  for (const auto& a : alpha) flat.insert(flat.end(), a.begin(), a.end());
  for (const auto& b : beta) flat.insert(flat.end(), b.begin(), b.end());
  flat.insert(flat.end(), log_sigma.begin(), log_sigma.end());
  flat.insert(flat.end(), logits.begin(), logits.end());
  return flat;
}

void HyperParams::validate() const {
  if (!(prior_strength > 0.0)) throw InvalidInput("prior_strength must be positive");
  if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be positive");
  if (!(prior_sigma > 0.0)) throw InvalidInput("prior_sigma must be positive");
  if (minibatch_size == 0) throw InvalidInput("minibatch_size must be positive");
  if (max_epochs == 0) throw InvalidInput("max_epochs must be positive");
  if (patience == 0) throw InvalidInput("patience must be positive");
  if (num_restarts == 0) throw InvalidInput("num_restarts must be positive");
  if (!(validation_lambda0 > 0.0)) throw InvalidInput("validation_lambda0 must be positive");
  if (validation_samples <= validation_burn_in) {
    throw InvalidInput("validation_samples must exceed validation_burn_in");
  }
}

double regularizer(const LvbcParameters& p, const HyperParams& hyper) {
  double omega = 0.0;
  for (std::size_t k = 0; k < p.num_groups; ++k) {
    if (!(p.pinned && k == 0)) {
      for (std::size_t b = 0; b < kNumSignBranches; ++b) {
        const double da = p.alpha[k][b] - hyper.prior_alpha;
        const double db = p.beta[k][b] - hyper.prior_beta;
        omega += da * da + db * db;
      }
    }
    const double ds = p.sigma(k) - hyper.prior_sigma;
    omega += ds * ds;
  }
  return omega;
}

double elbo(const LvbcParameters& params, const HyperParams& hyper, const ForecastPanel& panel,
            std::optional<std::span<const std::size_t>> subset) {
  params.validate();
  const EntryTable table = make_entry_table(params, panel);
  const auto idx = checked_subset(subset, table.size());
  return subset ? evaluate(params, hyper, table, idx.data(), idx.size(), nullptr)
                : evaluate(params, hyper, table, nullptr, table.size(), nullptr);
}

LvbcGradient elbo_gradient(const LvbcParameters& params, const HyperParams& hyper,
                           const ForecastPanel& panel,
                           std::optional<std::span<const std::size_t>> subset) {
  params.validate();
  const EntryTable table = make_entry_table(params, panel);
  const auto idx = checked_subset(subset, table.size());
  LvbcGradient g = zero_gradient(params);
  if (subset) {
    evaluate(params, hyper, table, idx.data(), idx.size(), &g);
  } else {
    evaluate(params, hyper, table, nullptr, table.size(), &g);
  }
  return g;
}

// ---------------------------------------------------------------------------

AdamOptimizer::AdamOptimizer(std::size_t dimension, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
      m_(dimension, 0.0), v_(dimension, 0.0) {}

void AdamOptimizer::ascend(std::span<double> theta, std::span<const double> gradient) {
  if (theta.size() != m_.size() || gradient.size() != m_.size()) {
    throw InvalidInput("optimiser dimension mismatch");
  }
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gradient[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gradient[i] * gradient[i];
    theta[i] += lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

// ---------------------------------------------------------------------------

LvbcParameters initial_parameters(std::size_t num_groups, std::vector<std::string> instruments,
                                  bool pinned, const HyperParams& hyper, std::uint64_t seed) {
  LvbcParameters p = LvbcParameters::identity(num_groups, std::move(instruments), pinned,
                                              hyper.prior_sigma);
  Rng rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < num_groups; ++k) {
    if (pinned && k == 0) continue;
    for (std::size_t b = 0; b < kNumSignBranches; ++b) {
      p.alpha[k][b] = hyper.prior_alpha + 0.1 * unit(rng);
      p.beta[k][b] = hyper.prior_beta + 0.1 * unit(rng);
    }
  }
  for (auto& w : p.logits) w = 0.01 * unit(rng);
  return p;
}

double validation_rmse(const LvbcParameters& params, const ForecastPanel& panel, double lambda0,
                       std::size_t num_samples, std::size_t burn_in, std::uint64_t seed) {
  const auto estimates = infer_point_estimates(panel, params, lambda0,
                                               GibbsBudget{num_samples, burn_in, 0.95}, seed);
  double sse = 0.0;
  std::size_t count = 0;
  for (const auto& [id, value] : estimates) {
    const auto q = panel.find_quantity(id);
    if (!q || !panel.has_actual(*q)) continue;
    const double err = value - *panel.actual(*q);
    sse += err * err;
    ++count;
  }
  if (count == 0) throw InvalidInput("validation panel has no scorable quantity");
  return std::sqrt(sse / static_cast<double>(count));
}

namespace {

RestartReport run_restart(const ForecastPanel& valid, const EntryTable& table,
                          std::vector<std::string> instruments, std::size_t num_groups,
                          const HyperParams& hyper, bool pinned, std::size_t restart) {
  RestartReport report;
  report.restart = restart;
  const std::uint64_t init_seed = derive_stream_seed(hyper.seed, restart, kInitStream);
  LvbcParameters params = initial_parameters(num_groups, std::move(instruments), pinned, hyper,
                                             init_seed);
  Rng shuffle_rng(splitmix64(init_seed));
  const std::uint64_t valid_seed = derive_stream_seed(hyper.seed, 0, kValidationStream);

  std::vector<double> theta = params.pack();
  AdamOptimizer adam(theta.size(), hyper.learning_rate);
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);

  report.best_valid_rmse = std::numeric_limits<double>::infinity();
  report.params = params;
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += hyper.minibatch_size) {
      const std::size_t count = std::min(hyper.minibatch_size, order.size() - start);
      LvbcGradient g = zero_gradient(params);
      evaluate(params, hyper, table, order.data() + start, count, &g);
      adam.ascend(theta, g.pack());
      params.unpack(theta);
      params.enforce_pin();
      theta = params.pack();
    }

    const double objective = evaluate(params, hyper, table, nullptr, table.size(), nullptr);
    if (!std::isfinite(objective)) {
      report.failed = true;
      report.diagnostic = "non-finite loss at epoch " + std::to_string(epoch);
      warn("restart " + std::to_string(restart) + ": " + report.diagnostic);
      return report;
    }
    const double rmse = validation_rmse(params, valid, hyper.validation_lambda0,
                                        hyper.validation_samples, hyper.validation_burn_in,
                                        valid_seed);
    report.trace.push_back({epoch, -objective, rmse});
    if (!std::isfinite(rmse)) {
      report.failed = true;
      report.diagnostic = "non-finite validation RMSE at epoch " + std::to_string(epoch);
      warn("restart " + std::to_string(restart) + ": " + report.diagnostic);
      return report;
    }
    if (rmse < report.best_valid_rmse) {
      report.best_valid_rmse = rmse;
      report.best_epoch = epoch;
      report.params = params;
      stale = 0;
    } else if (++stale >= hyper.patience) {
      break;
    }
  }
  info("restart " + std::to_string(restart) + ": best validation RMSE " +
       std::to_string(report.best_valid_rmse) + " at epoch " + std::to_string(report.best_epoch));
  return report;
}

}  // namespace

FitResult fit(const ForecastPanel& train, const ForecastPanel& valid, std::size_t num_groups,
              const HyperParams& hyper, bool pinned) {
  hyper.validate();
  if (num_groups < 1) throw InvalidInput("num_groups must be >= 1");
  if (train.empty()) throw InvalidInput("training panel is empty");
  if (valid.empty()) throw InvalidInput("validation panel is empty");

  const LvbcParameters shape =
      LvbcParameters::identity(num_groups, train.instrument_ids(), pinned, hyper.prior_sigma);
  const EntryTable table = make_entry_table(shape, train);

  FitResult result;
  result.best_valid_rmse = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t r = 0; r < hyper.num_restarts; ++r) {
    result.restarts.push_back(
        run_restart(valid, table, train.instrument_ids(), num_groups, hyper, pinned, r));
    const auto& rep = result.restarts.back();
    if (rep.failed) continue;
    if (!any || rep.best_valid_rmse < result.best_valid_rmse) {
      any = true;
      result.best_valid_rmse = rep.best_valid_rmse;
      result.best_restart = r;
    }
  }
  if (!any) throw TrainingFailure("all " + std::to_string(hyper.num_restarts) + " restarts failed");
  result.params = result.restarts[result.best_restart].params;
  return result;
}

FitResult fit_over_grid(const ForecastPanel& train, const ForecastPanel& valid,
                        std::size_t num_groups, HyperParams hyper, bool pinned,
                        std::span<const double> grid) {
  if (grid.empty()) throw InvalidInput("prior strength grid is empty");
  std::optional<FitResult> best;
  for (double lambda : grid) {
    hyper.prior_strength = lambda;
    FitResult result = fit(train, valid, num_groups, hyper, pinned);
    info("lambda " + std::to_string(lambda) + ": validation RMSE " +
         std::to_string(result.best_valid_rmse));
    if (!best || result.best_valid_rmse < best->best_valid_rmse) best = std::move(result);
  }
  return std::move(*best);
}

}  // namespace consensus
