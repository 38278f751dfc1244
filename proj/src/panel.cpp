#include "consensus/panel.hpp"

#include "consensus/error.hpp"

namespace consensus {

std::size_t ForecastPanel::intern_quantity(const std::string& id) {
  auto [it, inserted] = quantity_index_.try_emplace(id, quantity_ids_.size());
  if (inserted) {
    quantity_ids_.push_back(id);
    actuals_.emplace_back();
  }
  return it->second;
}

std::size_t ForecastPanel::intern_instrument(const std::string& id) {
  auto [it, inserted] = instrument_index_.try_emplace(id, instrument_ids_.size());
  if (inserted) instrument_ids_.push_back(id);
  return it->second;
}

void ForecastPanel::add_forecast(const std::string& quantity_id,
                                 const std::string& instrument_id, double forecast) {
  const std::size_t q = intern_quantity(quantity_id);
  const std::size_t j = intern_instrument(instrument_id);
  if (!seen_.insert((static_cast<std::uint64_t>(q) << 32) | j).second) {
    throw ConflictError("duplicate forecast for quantity '" + quantity_id +
                        "' and instrument '" + instrument_id + "'");
  }
  entries_.push_back({q, j, forecast});
}

void ForecastPanel::set_actual(const std::string& quantity_id, double actual) {
  const std::size_t q = intern_quantity(quantity_id);
  if (actuals_[q].has_value()) {
    throw ConflictError("duplicate actual for quantity '" + quantity_id + "'");
  }
  actuals_[q] = actual;
}

std::optional<std::size_t> ForecastPanel::find_quantity(const std::string& id) const {
  auto it = quantity_index_.find(id);
  if (it == quantity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ForecastPanel::find_instrument(const std::string& id) const {
  auto it = instrument_index_.find(id);
  if (it == instrument_index_.end()) return std::nullopt;
  return it->second;
}

bool ForecastPanel::fully_labelled() const {
  for (const auto& e : entries_) {
    if (!actuals_[e.quantity].has_value()) return false;
  }
  return true;
}

int ForecastPanel::sign_flag(std::size_t quantity) const {
  const auto& a = actuals_.at(quantity);
  if (!a) throw InvalidInput("quantity '" + quantity_ids_[quantity] + "' has no actual");
  return *a > 0.0 ? 1 : 0;
}

std::vector<std::vector<std::size_t>> ForecastPanel::entries_by_quantity() const {
  std::vector<std::vector<std::size_t>> out(quantity_ids_.size());
  for (std::size_t e = 0; e < entries_.size(); ++e) out[entries_[e].quantity].push_back(e);
  return out;
}

std::map<std::string, double> ForecastPanel::actuals_by_id() const {
  std::map<std::string, double> out;
  for (std::size_t q = 0; q < quantity_ids_.size(); ++q) {
    if (actuals_[q]) out.emplace(quantity_ids_[q], *actuals_[q]);
  }
  return out;
}

ForecastPanel ForecastPanel::without_actuals() const {
  ForecastPanel copy = *this;
  for (auto& a : copy.actuals_) a.reset();
  return copy;
}

}  // namespace consensus
