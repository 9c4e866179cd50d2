#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ordreg {

enum class StudyDesign { between, within, mixed, any };
std::string design_name(StudyDesign design);
StudyDesign parse_design(std::string_view name);

struct AssumptionFlags {
  bool metric_data = false;
  bool normality = false;
  bool equal_variance = false;
  friend bool operator==(const AssumptionFlags&, const AssumptionFlags&) = default;
};

struct TestInfo {
  std::string id;    // CLI name
  std::string name;  // display name
  std::string category;
  std::vector<StudyDesign> designs;
  AssumptionFlags flags;
  bool implemented = false;
};

/// Static assumption table for the classical tests.
const std::vector<TestInfo>& test_registry();
/// Lookup by id or display name.
const TestInfo& registry_entry(std::string_view name);
/// The design a test runs under: the declared one (must be allowed), or the
/// only allowed one. Tests allowing several designs need a declaration.
StudyDesign resolve_design(const TestInfo& info, std::optional<StudyDesign> declared);

struct TestResult {
  std::string test;  // registry id
  double statistic = 0;
  std::vector<double> df;
  double p = 1;
  bool exact = false;
  AssumptionFlags flags;
  StudyDesign design = StudyDesign::between;
  std::vector<std::string> warnings;
};

struct ExactOptions {
  std::size_t signed_rank_max_n = 25;
  std::size_t rank_sum_max_min = 8;
  /// Permutation counts up to this are enumerated (Kruskal-Wallis, Friedman).
  double max_permutations = 200000;
};

/// Midranks (1-based) of `values`.
std::vector<double> midranks(std::span<const double> values);

TestResult oneway_anova(const std::vector<std::vector<double>>& groups);
TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups,
                          const ExactOptions& options = {});
/// blocks[subject][condition]; NaN marks a missing value.
TestResult friedman(const std::vector<std::vector<double>>& blocks,
                    const std::vector<std::string>& subjects = {},
                    const ExactOptions& options = {});
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                const ExactOptions& options = {});
TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                             const ExactOptions& options = {});

/// Null variance of the Mann-Whitney U statistic, optionally tie-corrected.
double rank_sum_null_variance(std::span<const double> a, std::span<const double> b,
                              bool tie_correction);

}  // namespace ordreg
