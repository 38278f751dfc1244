#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace consensus {

/// One observed forecast. Indices refer to the owning panel's id tables.
struct PanelEntry {
  std::size_t quantity = 0;
  std::size_t instrument = 0;
  double forecast = 0.0;
};

/// Sparse (quantity x instrument) matrix of forecast changes, plus the
/// realised change of each quantity when known.
class ForecastPanel {
 public:
  /// Appends a forecast. Throws ConflictError on a repeated
  /// (quantity, instrument) pair.
  void add_forecast(const std::string& quantity_id, const std::string& instrument_id,
                    double forecast);

  /// Registers the quantity if new and records its realised change.
  /// Throws ConflictError if an actual was already set.
  void set_actual(const std::string& quantity_id, double actual);

  std::size_t num_entries() const noexcept { return entries_.size(); }
  std::size_t num_quantities() const noexcept { return quantity_ids_.size(); }
  std::size_t num_instruments() const noexcept { return instrument_ids_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const std::vector<PanelEntry>& entries() const noexcept { return entries_; }
  const std::vector<std::string>& quantity_ids() const noexcept { return quantity_ids_; }
  const std::vector<std::string>& instrument_ids() const noexcept { return instrument_ids_; }

  std::optional<std::size_t> find_quantity(const std::string& id) const;
  std::optional<std::size_t> find_instrument(const std::string& id) const;

  const std::optional<double>& actual(std::size_t quantity) const { return actuals_.at(quantity); }
  bool has_actual(std::size_t quantity) const { return actuals_.at(quantity).has_value(); }
  /// True when every quantity that has forecasts also has an actual.
  bool fully_labelled() const;

  /// 1{X > 0} for quantities with a known actual.
  int sign_flag(std::size_t quantity) const;

  /// Entry indices grouped by quantity, in insertion order.
  std::vector<std::vector<std::size_t>> entries_by_quantity() const;

  /// Actuals keyed by quantity id (only quantities with a known actual).
  std::map<std::string, double> actuals_by_id() const;

  /// Copy of this panel with actuals removed.
  ForecastPanel without_actuals() const;

 private:
  std::size_t intern_quantity(const std::string& id);
  std::size_t intern_instrument(const std::string& id);

  std::vector<std::string> quantity_ids_;
  std::vector<std::string> instrument_ids_;
  std::unordered_map<std::string, std::size_t> quantity_index_;
  std::unordered_map<std::string, std::size_t> instrument_index_;
  std::vector<std::optional<double>> actuals_;
  std::vector<PanelEntry> entries_;
  std::unordered_set<std::uint64_t> seen_;  // (quantity << 32) | instrument
};

}  // namespace consensus
