#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "ordreg/clm.hpp"
#include "ordreg/clmm.hpp"
#include "ordreg/formula.hpp"
#include "ordreg/simulate.hpp"
#include "ordreg/summary.hpp"

using namespace ordreg;
using namespace testing_support;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

bool has_line(const std::string& text, const std::string& line) {
  for (const auto& l : lines_of(text)) {
    if (l == line) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("column formatting") {
  // estimates and standard errors share one format
  const double est[] = {-2.58972, -1.88012, -1.14366, -0.24504, 0.44086, 0.29651, 0.25193, 0.23579};
  CHECK(format_estimates(est, 4) == std::vector<std::string>{"-2.5897", "-1.8801", "-1.1437", "-0.2450",
                                                             "0.4409", "0.2965", "0.2519", "0.2358"});
  // trailing zeros are dropped as in R
  const double exact[] = {-2.5897, -0.2450};
  CHECK(format_estimates(exact, 4) == std::vector<std::string>{"-2.590", "-0.245"});
  const double beta[] = {-0.32161, 0.04704, -0.49092};
  CHECK(format_estimates(beta, 4) == std::vector<std::string>{"-0.32161", "0.04704", "-0.49092"});
  const double one[] = {1.871};
  CHECK(format_column(one, 4) == std::vector<std::string>{"1.871"});
  const double big[] = {123456.7, 2.0};
  CHECK(format_column(big, 4) == std::vector<std::string>{"123457", "2"});
  const double p[] = {0.11925, 0.00793};
  CHECK(format_p_values(p, 3) == std::vector<std::string>{"0.11925", "0.00793"});
  const double tiny[] = {1e-20, 0.5};
  CHECK(format_p_values(tiny, 3)[0] == "<2e-16");
  const double clm_p[] = {0.319, 0.887, 0.119};
  CHECK(format_p_values(clm_p, 3) == std::vector<std::string>{"0.319", "0.887", "0.119"});
}

TEST_CASE("significance stars") {
  CHECK(significance_stars(0.0001) == "***");
  CHECK(significance_stars(0.001) == "**");
  CHECK(significance_stars(0.00793) == "**");
  CHECK(significance_stars(0.03) == "*");
  CHECK(significance_stars(0.07) == ".");
  CHECK(significance_stars(0.11925) == " ");
  CHECK(significance_stars(1.0) == " ");
}

TEST_CASE("mixed summary matches the reference block byte for byte") {
  const std::string expected = read_file(data_path("clmm_summary_fixture.txt"));
  REQUIRE_FALSE(expected.empty());
  CHECK(render(mixed_fixture()) == expected);
}

TEST_CASE("plain summary of the usefulness fit") {
  const FittedClm f = fit_clm(probit_condition(), usefulness());
  const ModelSummary s = summarize(f, "usefulness_dataframe");
  CHECK(s.formula == "Usefulness ~ 1 + Condition");
  CHECK(s.header.nobs == 102);
  CHECK(s.header.link == "probit");
  CHECK_FALSE(s.mixed);
  const std::string text = render(s);
  CHECK(text.rfind("formula: Usefulness ~ 1 + Condition\ndata:    usefulness_dataframe\n\n", 0) == 0);
  const auto lines = lines_of(text);
  REQUIRE(lines.size() > 4);
  CHECK(lines[3].rfind("link   threshold nobs logLik  AIC    niter", 0) == 0);
  CHECK(lines[4].rfind("probit flexible  102  -113.99 241.97 ", 0) == 0);
  // the published coefficient block lost some padding, so compare its cells
  const std::vector<std::string> published[] = {
      tokens("ConditionDissimilar -0.32161    0.32288  -0.996   0.319"),
      tokens("ConditionSelf        0.04704    0.33048   0.142   0.887"),
      tokens("ConditionMinimal    -0.49092    0.31466  -1.560   0.119")};
  std::size_t header = 0;
  while (header < lines.size() && lines[header] != "Coefficients:") ++header;
  REQUIRE(header + 4 < lines.size());
  for (int r = 0; r < 3; ++r) CHECK(tokens(lines[header + 2 + r]) == published[r]);
  // columns right-align under their headers
  const std::string& head = lines[header + 1];
  for (int r = 0; r < 3; ++r) {
    const std::string& line = lines[header + 2 + r];
    CHECK(line.size() == head.size());
    for (const char* col : {"Estimate", "Error", "value", "Pr(>|z|)"}) {
      const std::size_t end = head.find(col) + std::string(col).size();
      CHECK(line[end - 1] != ' ');
      if (end < line.size()) CHECK(line[end] == ' ');
    }
  }
  CHECK(has_line(text, "1|2  -2.5897     0.4409  -5.874"));
  CHECK(has_line(text, "2|3  -1.8801     0.2965  -6.340"));
  CHECK(has_line(text, "3|4  -1.1437     0.2519  -4.540"));
  CHECK(has_line(text, "4|5  -0.2450     0.2358  -1.039"));
  // no p below 0.1, so no stars legend
  CHECK(text.find("Signif. codes") == std::string::npos);
  CHECK(text.find("Random effects") == std::string::npos);
}

TEST_CASE("mixed summary of a fitted model has the reference structure") {
  HierarchicalDesign d;
  d.tau = {-2.27, -1.18, -0.62, -0.19, 0.38, 1.38, 2.54};
  d.conditions = {"Baseline", "Fixed", "Manual"};
  d.beta = {0.0, 0.43, 0.76};
  d.sigma_b = 1.37;
  d.groups = 30;
  const Dataset data = simulate_hierarchical(d, 21);
  const ModelSpec spec =
      ModelSpec::from_formula(parse_formula("response ~ 1 + condition + (1 | participant_id)"), Link());
  const FittedClmm m = fit_clmm(spec, data);
  const ModelSummary s = summarize(m, "pd_df");
  REQUIRE(s.random_effects.size() == 1);
  CHECK(s.random_effects[0].variance == doctest::Approx(m.sigma * m.sigma));
  CHECK(s.random_effects[0].std_dev == doctest::Approx(m.sigma));
  CHECK(s.group_count == 30);
  CHECK(s.thresholds.size() == 7);
  CHECK(s.coefficients.size() == 2);

  const auto got = lines_of(render(s));
  const auto want = lines_of(render(mixed_fixture()));
  REQUIRE(got.size() == want.size());
  // same section markers on the same lines
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].empty() || want[i].back() == ':' || want[i].rfind("Number of groups", 0) == 0) {
      CHECK(got[i].substr(0, got[i].find_first_of("0123456789")) ==
            want[i].substr(0, want[i].find_first_of("0123456789")));
    }
  }
  CHECK(got[5] == "");
  CHECK(got[9] == "Number of groups:  participant_id 30 ");
  CHECK(got[3].rfind(" link   threshold nobs logLik", 0) == 0);
}

TEST_CASE("warnings are printed after the tables") {
  ModelSummary s = mixed_fixture();
  s.warnings = {"random-intercept SD is at the boundary (sigma = 0)"};
  const std::string text = render(s);
  const std::string last = "warning: random-intercept SD is at the boundary (sigma = 0)\n";
  REQUIRE(text.size() > last.size());
  CHECK(text.substr(text.size() - last.size()) == last);
  CHECK(text.rfind("8|9   2.5397     0.4396   5.777\nwarning: ") != std::string::npos);
}
