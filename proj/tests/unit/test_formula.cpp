#include "doctest.h"
#include "helpers.hpp"
#include "ordreg/design.hpp"
#include "ordreg/errors.hpp"
#include "ordreg/formula.hpp"

using namespace ordreg;
using namespace testing_support;

TEST_CASE("formula grammar") {
  const auto f = parse_formula("Usefulness ~ 1 + Condition");
  CHECK(f.response == "Usefulness");
  CHECK(f.location == std::vector<std::string>{"Condition"});
  CHECK_FALSE(f.random_group);
  CHECK(f.to_string() == "Usefulness ~ 1 + Condition");

  const auto m = parse_formula("score~1+condition+(1|participant_id)");
  CHECK(m.location == std::vector<std::string>{"condition"});
  CHECK(m.random_group == "participant_id");
  CHECK(m.to_string() == "score ~ 1 + condition + (1 | participant_id)");

  CHECK(parse_formula("  y ~ 1 ").location.empty());
}

TEST_CASE("formula errors carry positions") {
  CHECK_THROWS_AS(parse_formula("y ~ x + (1|g) + (1|h)"), ParseError);
  try {
    parse_formula("y ~ x + (1|g) + (1|h)");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("one random term") != std::string::npos);
    CHECK(e.position() > 10);
  }
  try {
    parse_formula("y 1 + x");
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK((e.position() == 1 || e.position() == 2));
  }
  CHECK_THROWS_AS(parse_formula("y ~ 1 + y"), ParseError);
  CHECK_THROWS_AS(parse_formula("y ~ Condition"), ParseError);
  CHECK_THROWS_AS(parse_formula("y ~ 1 + x + x"), ParseError);
  CHECK_THROWS_AS(parse_formula("y ~ 1 + x +"), ParseError);
  CHECK_THROWS_AS(parse_formula("y ~ 1 + (1|y)"), ParseError);
  CHECK_THROWS_AS(parse_formula("y ~ 1 + g + (1|g)"), ParseError);
}

TEST_CASE("term lists") {
  CHECK(parse_term_list("").empty());
  CHECK(parse_term_list("   ").empty());
  CHECK(parse_term_list("a + b") == std::vector<std::string>{"a", "b"});
  CHECK_THROWS_AS(parse_term_list("a + + b"), ParseError);
  CHECK_THROWS_AS(parse_term_list("a + a"), ParseError);
}

TEST_CASE("treatment coding against the reference") {
  const Dataset d = usefulness();
  const ModelSpec spec = ModelSpec::from_formula(parse_formula("y ~ 1 + Condition"), Link());
  const Design design = build_design(spec, d);
  CHECK(design.location.columns ==
        std::vector<std::string>{"ConditionDissimilar", "ConditionSelf", "ConditionMinimal"});
  const auto& codes = d.find_factor("Condition")->codes;
  for (Eigen::Index i = 0; i < design.location.matrix.rows(); ++i) {
    const auto level = codes[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(design.location.matrix(i, j) == (level == static_cast<std::size_t>(j + 1) ? 1.0 : 0.0));
    }
  }
  const Design re = build_design(spec, d.relevel("Condition", "Self"));
  CHECK(re.location.columns ==
        std::vector<std::string>{"ConditionActive", "ConditionDissimilar", "ConditionMinimal"});

  const auto coding = code_term(d, "Condition");
  CHECK(encode_setting({coding}, {{"Condition", "Minimal"}}) == Eigen::Vector3d(0, 0, 1));
  CHECK(encode_setting({coding}, {}) == Eigen::Vector3d(0, 0, 0));
  CHECK_THROWS_AS(encode_setting({coding}, {{"Condition", "Passive"}}), ValidationError);
  CHECK_THROWS_AS(encode_setting({coding}, {{"Other", "x"}}), ValidationError);
}

TEST_CASE("design validation") {
  const Dataset d = usefulness();
  ModelSpec spec = ModelSpec::from_formula(parse_formula("y ~ 1 + Condition"), Link(), {},
                                           {"Condition"});
  CHECK_THROWS_AS(build_design(spec, d), ValidationError);
  spec = ModelSpec::from_formula(parse_formula("y ~ 1 + Missing"), Link());
  CHECK_THROWS_AS(build_design(spec, d), ValidationError);

  // unobserved level gives a zero column
  const FactorColumn f{Factor("g", {"a", "b", "c"}), {0, 1, 0, 1}};
  const Dataset e(OrdinalScale({"1", "2"}), {0, 1, 1, 0}, {f});
  spec = ModelSpec::from_formula(parse_formula("y ~ 1 + g"), Link());
  try {
    build_design(spec, e);
    FAIL("expected rank error");
  } catch (const ValidationError& err) {
    CHECK(std::string(err.what()).find("gc") != std::string::npos);
  }
  // constant numeric covariate is aliased with the thresholds
  const Dataset c(OrdinalScale({"1", "2"}), {0, 1, 1}, {}, {NumericColumn{"x", {2, 2, 2}}});
  spec = ModelSpec::from_formula(parse_formula("y ~ 1 + x"), Link());
  CHECK_THROWS_AS(build_design(spec, c), ValidationError);
}
