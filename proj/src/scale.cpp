#include "ordreg/scale.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "ordreg/errors.hpp"

namespace ordreg {

OrdinalScale::OrdinalScale(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw ValidationError("an ordinal scale needs at least two categories");
  }
  std::set<std::string_view> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) {
      throw ValidationError("duplicate scale label '" + l + "'");
    }
  }
}

std::optional<std::size_t> OrdinalScale::find(std::string_view token) const {
  auto it = std::find(labels_.begin(), labels_.end(), token);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::string OrdinalScale::threshold_name(std::size_t k) const {
  return labels_.at(k) + "|" + labels_.at(k + 1);
}

Factor::Factor(std::string name, std::vector<std::string> levels,
               std::optional<std::string> reference)
    : name_(std::move(name)), levels_(std::move(levels)) {
  if (levels_.empty()) throw ValidationError("factor '" + name_ + "' has no levels");
  std::set<std::string_view> seen;
  for (const auto& l : levels_) {
    if (!seen.insert(l).second) {
      throw ValidationError("factor '" + name_ + "' has duplicate level '" + l + "'");
    }
  }
  if (reference) reference_ = index_of(*reference);
}

std::optional<std::size_t> Factor::find(std::string_view level) const {
  auto it = std::find(levels_.begin(), levels_.end(), level);
  if (it == levels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - levels_.begin());
}

std::size_t Factor::index_of(std::string_view level) const {
  if (auto k = find(level)) return *k;
  throw ValidationError("factor '" + name_ + "' has no level '" + std::string(level) + "'");
}

Factor relevel(const Factor& factor, std::string_view new_reference) {
  return Factor(factor.name(), factor.levels(), std::string(new_reference));
}

namespace {

void check_codes(const FactorColumn& col, std::size_t rows) {
  if (col.codes.size() != rows) {
    throw ValidationError("column '" + col.factor.name() + "' has " +
                          std::to_string(col.codes.size()) + " values for " +
                          std::to_string(rows) + " rows");
  }
  for (auto c : col.codes) {
    if (c >= col.factor.size()) {
      throw ValidationError("column '" + col.factor.name() + "' has an out-of-range level code");
    }
  }
}

}  // namespace

Dataset::Dataset(OrdinalScale scale, std::vector<std::size_t> responses,
                 std::vector<FactorColumn> factors, std::vector<NumericColumn> numerics,
                 std::optional<FactorColumn> group)
    : scale_(std::move(scale)),
      responses_(std::move(responses)),
      factors_(std::move(factors)),
      numerics_(std::move(numerics)),
      group_(std::move(group)) {
  for (auto r : responses_) {
    if (r >= scale_.size()) throw ValidationError("response index outside the scale");
  }
  std::set<std::string_view> names;
  for (const auto& f : factors_) {
    check_codes(f, rows());
    if (!names.insert(f.factor.name()).second) {
      throw ValidationError("duplicate column '" + f.factor.name() + "'");
    }
  }
  for (const auto& n : numerics_) {
    if (n.values.size() != rows()) {
      throw ValidationError("numeric column '" + n.name + "' has the wrong length");
    }
    if (!names.insert(n.name).second) {
      throw ValidationError("duplicate column '" + n.name + "'");
    }
  }
  if (group_) check_codes(*group_, rows());
}

const FactorColumn* Dataset::find_factor(std::string_view name) const {
  for (const auto& f : factors_) {
    if (f.factor.name() == name) return &f;
  }
  return nullptr;
}

const NumericColumn* Dataset::find_numeric(std::string_view name) const {
  for (const auto& n : numerics_) {
    if (n.name == name) return &n;
  }
  return nullptr;
}

std::vector<std::size_t> Dataset::category_counts() const {
  std::vector<std::size_t> counts(scale_.size(), 0);
  for (auto r : responses_) ++counts[r];
  return counts;
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  auto pick = [&](const auto& src) {
    std::remove_cvref_t<decltype(src)> out;
    out.reserve(rows.size());
    for (auto i : rows) out.push_back(src.at(i));
    return out;
  };
  std::vector<FactorColumn> factors;
  for (const auto& f : factors_) factors.push_back({f.factor, pick(f.codes)});
  std::vector<NumericColumn> numerics;
  for (const auto& n : numerics_) numerics.push_back({n.name, pick(n.values)});
  std::optional<FactorColumn> group;
  if (group_) group = FactorColumn{group_->factor, pick(group_->codes)};
  return Dataset(scale_, pick(responses_), std::move(factors), std::move(numerics),
                 std::move(group));
}

Dataset Dataset::relevel(std::string_view name, std::string_view new_reference) const {
  Dataset copy = *this;
  for (auto& f : copy.factors_) {
    if (f.factor.name() == name) {
      f.factor = ordreg::relevel(f.factor, new_reference);
      return copy;
    }
  }
  throw ValidationError("no factor named '" + std::string(name) + "'");
}

Dataset expand_frequency_table(const FrequencyTable& freq, const OrdinalScale& scale) {
  if (freq.counts.size() != freq.condition.size()) {
    throw ValidationError("frequency table needs one row per condition level");
  }
  std::vector<std::size_t> responses;
  std::vector<std::size_t> codes;
  for (std::size_t level = 0; level < freq.counts.size(); ++level) {
    const auto& row = freq.counts[level];
    if (row.size() != scale.size()) {
      throw ValidationError("frequency table row '" + freq.condition.levels()[level] +
                            "' needs one count per category");
    }
    for (std::size_t k = 0; k < row.size(); ++k) {
      responses.insert(responses.end(), row[k], k);
      codes.insert(codes.end(), row[k], level);
    }
  }
  if (responses.empty()) throw ValidationError("frequency table has no positive counts");
  std::vector<FactorColumn> factors;
  factors.push_back({freq.condition, std::move(codes)});
  return Dataset(scale, std::move(responses), std::move(factors));
}

FrequencyTable tabulate(const Dataset& data, std::string_view factor_name) {
  const FactorColumn* col = data.find_factor(factor_name);
  if (!col) throw ValidationError("no factor named '" + std::string(factor_name) + "'");
  FrequencyTable table{col->factor, {}};
  table.counts.assign(col->factor.size(), std::vector<std::size_t>(data.scale().size(), 0));
  for (std::size_t i = 0; i < data.rows(); ++i) {
    ++table.counts[col->codes[i]][data.responses()[i]];
  }
  return table;
}

BoundaryDropResult drop_unobserved_boundary_categories(const Dataset& data) {
  const auto counts = data.category_counts();
  const auto& labels = data.scale().labels();
  std::vector<std::string> warnings;
  std::size_t lo = 0;
  std::size_t hi = counts.size();
  while (lo < hi && counts[lo] == 0) {
    warnings.push_back("category '" + labels[lo] +
                       "' has no observations at the lower end of the scale; dropped");
    ++lo;
  }
  while (hi > lo && counts[hi - 1] == 0) {
    warnings.push_back("category '" + labels[hi - 1] +
                       "' has no observations at the upper end of the scale; dropped");
    --hi;
  }
  if (hi - lo < 2) {
    throw ValidationError("fewer than two observed categories remain after dropping "
                          "unobserved boundary categories");
  }
  std::vector<std::size_t> weak;
  for (std::size_t k = lo; k < hi; ++k) {
    if (counts[k] == 0) weak.push_back(k - lo);
  }
  if (lo == 0 && hi == counts.size()) return {data, std::move(warnings), std::move(weak)};

  std::vector<std::string> kept(labels.begin() + static_cast<std::ptrdiff_t>(lo),
                                labels.begin() + static_cast<std::ptrdiff_t>(hi));
  std::vector<std::size_t> responses = data.responses();
  for (auto& r : responses) r -= lo;
  return {Dataset(OrdinalScale(std::move(kept)), std::move(responses), data.factors(),
                  data.numerics(), data.group()),
          std::move(warnings), std::move(weak)};
}

}  // namespace ordreg
