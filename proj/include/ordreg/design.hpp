#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ordreg/formula.hpp"
#include "ordreg/links.hpp"
#include "ordreg/scale.hpp"

namespace ordreg {

/// Model structure: location terms, optional scale and nominal terms, an
/// optional random-intercept grouping factor, and the link.
struct ModelSpec {
  std::string response;
  std::vector<std::string> location;
  std::vector<std::string> scale;
  std::vector<std::string> nominal;
  std::optional<std::string> group;
  Link link;

  static ModelSpec from_formula(const FormulaSpec& formula, Link link,
                                std::vector<std::string> scale_terms = {},
                                std::vector<std::string> nominal_terms = {});
  FormulaSpec formula() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

enum class TermKind { factor, numeric };

/// How one term maps onto design columns. Factors use treatment coding: one
/// 0/1 column per non-reference level.
struct TermCoding {
  std::string term;
  TermKind kind = TermKind::numeric;
  std::vector<std::string> levels;
  std::size_t reference = 0;

  std::vector<std::string> column_names() const;
  friend bool operator==(const TermCoding&, const TermCoding&) = default;
};

struct DesignBlock {
  std::vector<TermCoding> terms;
  std::vector<std::string> columns;
  Eigen::MatrixXd matrix;  // rows x columns

  Eigen::Index size() const { return static_cast<Eigen::Index>(columns.size()); }
};

struct Design {
  DesignBlock location;
  DesignBlock scale;
  DesignBlock nominal;
};

/// Term value by name: a level for factors, decimal text for numerics.
/// Terms left out take the reference level (factors) or 0 (numerics).
using CovariateSetting = std::map<std::string, std::string>;

TermCoding code_term(const Dataset& data, const std::string& term);
DesignBlock build_block(const Dataset& data, const std::vector<std::string>& terms);

/// Validates the spec against the data (known terms, no location/nominal
/// overlap, full column rank alongside the thresholds) and builds all blocks.
Design build_design(const ModelSpec& spec, const Dataset& data);

/// One design row for a covariate setting.
Eigen::VectorXd encode_setting(const std::vector<TermCoding>& terms,
                               const CovariateSetting& setting);

/// Throws ValidationError naming the first column that is a linear
/// combination of the preceding ones (and of a constant column).
void require_full_rank(const Eigen::MatrixXd& matrix, const std::vector<std::string>& names,
                       const std::string& what);

}  // namespace ordreg
