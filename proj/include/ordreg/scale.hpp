#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ordreg {

/// Ordered response categories. Labels are opaque tokens ordered by position;
/// "10" sorts after "9" only if it is listed after it.
class OrdinalScale {
 public:
  explicit OrdinalScale(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t threshold_count() const noexcept { return labels_.size() - 1; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t k) const { return labels_.at(k); }

  std::optional<std::size_t> find(std::string_view token) const;
  /// Name of threshold k (0-based), e.g. "1|2".
  std::string threshold_name(std::size_t k) const;

  friend bool operator==(const OrdinalScale&, const OrdinalScale&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Categorical predictor with a reference level for treatment coding.
class Factor {
 public:
  /// The reference defaults to the first level.
  Factor(std::string name, std::vector<std::string> levels,
         std::optional<std::string> reference = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& levels() const noexcept { return levels_; }
  const std::string& reference() const { return levels_[reference_]; }
  std::size_t reference_index() const noexcept { return reference_; }
  std::size_t size() const noexcept { return levels_.size(); }

  std::optional<std::size_t> find(std::string_view level) const;
  std::size_t index_of(std::string_view level) const;

  friend bool operator==(const Factor&, const Factor&) = default;

 private:
  std::string name_;
  std::vector<std::string> levels_;
  std::size_t reference_ = 0;
};

/// Same levels, new reference. Throws ValidationError for unknown levels.
Factor relevel(const Factor& factor, std::string_view new_reference);

struct FactorColumn {
  Factor factor;
  std::vector<std::size_t> codes;  // level index per row
};

struct NumericColumn {
  std::string name;
  std::vector<double> values;
};

/// Long-format observations. Responses are stored as category indices into
/// the scale, so downstream code never looks at label text.
class Dataset {
 public:
  Dataset(OrdinalScale scale, std::vector<std::size_t> responses,
          std::vector<FactorColumn> factors = {}, std::vector<NumericColumn> numerics = {},
          std::optional<FactorColumn> group = std::nullopt);

  const OrdinalScale& scale() const noexcept { return scale_; }
  std::size_t rows() const noexcept { return responses_.size(); }
  const std::vector<std::size_t>& responses() const noexcept { return responses_; }
  const std::vector<FactorColumn>& factors() const noexcept { return factors_; }
  const std::vector<NumericColumn>& numerics() const noexcept { return numerics_; }
  const std::optional<FactorColumn>& group() const noexcept { return group_; }

  const FactorColumn* find_factor(std::string_view name) const;
  const NumericColumn* find_numeric(std::string_view name) const;

  /// Observation count per category.
  std::vector<std::size_t> category_counts() const;

  /// Rows picked by index (repeats allowed), in the given order.
  Dataset select(std::span<const std::size_t> rows) const;
  /// Copy with factor `name` releveled.
  Dataset relevel(std::string_view name, std::string_view new_reference) const;

 private:
  OrdinalScale scale_;
  std::vector<std::size_t> responses_;
  std::vector<FactorColumn> factors_;
  std::vector<NumericColumn> numerics_;
  std::optional<FactorColumn> group_;
};

/// Counts per (condition level, category).
struct FrequencyTable {
  Factor condition;
  std::vector<std::vector<std::size_t>> counts;  // [level][category]
};

Dataset expand_frequency_table(const FrequencyTable& freq, const OrdinalScale& scale);
FrequencyTable tabulate(const Dataset& data, std::string_view factor_name);

struct BoundaryDropResult {
  Dataset data;
  std::vector<std::string> warnings;
  /// Interior categories (indices into the reduced scale) with zero counts.
  std::vector<std::size_t> weak_categories;
};

/// Removes categories without observations at either end of the scale,
/// repeating until both extremes are observed.
BoundaryDropResult drop_unobserved_boundary_categories(const Dataset& data);

}  // namespace ordreg
