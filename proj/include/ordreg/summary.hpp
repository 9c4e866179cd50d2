#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ordreg/clm.hpp"
#include "ordreg/clmm.hpp"
#include "ordreg/inference.hpp"

namespace ordreg {

struct SummaryHeader {
  std::string link;
  std::string threshold = "flexible";
  std::size_t nobs = 0;
  double log_lik = 0;
  double aic = 0;
  std::string niter;
  double max_grad = 0;
  double cond_h = 0;
};

struct RandomEffectRow {
  std::string group;
  std::string name = "(Intercept)";
  double variance = 0;
  double std_dev = 0;
};

/// Everything the printed summary shows, before formatting.
struct ModelSummary {
  std::string formula;
  std::string data_name;
  SummaryHeader header;
  bool mixed = false;
  std::vector<RandomEffectRow> random_effects;
  std::size_t group_count = 0;
  std::vector<WaldRow> coefficients;
  std::vector<WaldRow> scale_coefficients;
  std::vector<WaldRow> thresholds;  // thresholds, then nominal effects
  std::vector<std::string> warnings;
};

ModelSummary summarize(const FittedClm& fitted, const std::string& data_name = "data");
ModelSummary summarize(const FittedClmm& fitted, const std::string& data_name = "data");

/// Text block in the layout of R's ordinal summaries.
std::string render(const ModelSummary& summary);

/// Common fixed-point formatting of a column: every value shows at least
/// `digits` significant digits, with shared decimals.
std::vector<std::string> format_column(std::span<const double> values, int digits);
/// Estimate/SE formatting: round to the decimals implied by the smallest
/// magnitude, then format_column.
std::vector<std::string> format_estimates(std::span<const double> values, int digits);
std::vector<std::string> format_p_values(std::span<const double> p, int digits);
std::string significance_stars(double p);

}  // namespace ordreg
