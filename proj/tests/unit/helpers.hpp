#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ordreg/design.hpp"
#include "ordreg/formula.hpp"
#include "ordreg/scale.hpp"
#include "ordreg/summary.hpp"

namespace testing_support {

inline ordreg::OrdinalScale five_point() { return ordreg::OrdinalScale({"1", "2", "3", "4", "5"}); }

/// The perceived-usefulness counts, conditions in the printed column order.
inline ordreg::FrequencyTable usefulness_table() {
  return {ordreg::Factor("Condition", {"Active", "Dissimilar", "Self", "Minimal"}),
          {{0, 1, 3, 6, 16}, {0, 3, 3, 6, 13}, {0, 0, 3, 7, 15}, {1, 0, 4, 12, 9}}};
}

inline ordreg::Dataset usefulness() {
  return ordreg::expand_frequency_table(usefulness_table(), five_point());
}

inline ordreg::ModelSpec probit_condition() {
  return ordreg::ModelSpec::from_formula(ordreg::parse_formula("Usefulness ~ 1 + Condition"),
                                        ordreg::Link());
}

inline double probit_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double logit_cdf(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double cloglog_cdf(double x) { return -std::expm1(-std::exp(x)); }
inline double probit_ccdf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
inline double logit_ccdf(double x) { return 1.0 / (1.0 + std::exp(x)); }
inline double cloglog_ccdf(double x) { return std::exp(-std::exp(x)); }

inline std::string data_path(const std::string& name) {
  return std::string(ORDREG_TEST_DATA) + "/" + name;
}

inline ordreg::WaldRow summary_row(std::string name, double est, double se, double z, double p = 1) {
  return ordreg::WaldRow{std::move(name), est, se, z, p};
}

/// The published mixed-model summary as a rendering fixture.
inline ordreg::ModelSummary mixed_fixture() {
  ordreg::ModelSummary s;
  s.formula = "score ~ 1 + condition + (1 | participant_id)";
  s.data_name = "pd_df";
  s.header = ordreg::SummaryHeader{"probit", "flexible", 90, -161.75, 343.50, "706(2737)", 3.18e-04, 1.0e+02};
  s.mixed = true;
  s.random_effects = {ordreg::RandomEffectRow{"participant_id", "(Intercept)", 1.871, 1.368}};
  s.group_count = 30;
  s.coefficients = {summary_row("conditionFixed", 0.4326, 0.2777, 1.558, 0.11925),
                    summary_row("conditionManual", 0.7551, 0.2844, 2.655, 0.00793)};
  s.thresholds = {summary_row("2|3", -2.2670, 0.4800, -4.723), summary_row("3|4", -1.1828, 0.3703, -3.194),
                  summary_row("4|5", -0.6183, 0.3458, -1.788), summary_row("5|6", -0.1894, 0.3371, -0.562),
                  summary_row("6|7", 0.3812, 0.3390, 1.124),   summary_row("7|8", 1.3784, 0.3651, 3.775),
                  summary_row("8|9", 2.5397, 0.4396, 5.777)};
  return s;
}

}  // namespace testing_support
