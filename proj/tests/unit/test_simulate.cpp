#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "json.hpp"

#include "doctest.h"
#include "helpers.hpp"
#include "ordreg/errors.hpp"
#include "ordreg/random.hpp"
#include "ordreg/simulate.hpp"

using namespace ordreg;
using namespace testing_support;

namespace {

const Link kLinks[] = {Link(LinkFamily::probit), Link(LinkFamily::logit), Link(LinkFamily::cloglog)};

double oracle_cdf(const Link& link, double x) {
  switch (link.family()) {
    case LinkFamily::probit: return probit_cdf(x);
    case LinkFamily::logit: return logit_cdf(x);
    case LinkFamily::cloglog: return cloglog_cdf(x);
  }
  return 0;
}

}  // namespace

TEST_CASE("cutpoints from proportions") {
  const double p[] = {0.10, 0.15, 0.75};
  const auto tau = cutpoints_from_proportions(p, Link());
  REQUIRE(tau.size() == 2);
  CHECK(tau[0] == doctest::Approx(-1.2815515655446004).epsilon(1e-12));
  CHECK(tau[1] == doctest::Approx(-0.6744897501960817).epsilon(1e-12));
  CHECK(std::abs(tau[0] - -1.28) < 5e-3);
  CHECK(std::abs(tau[1] - -0.67) < 5e-3);

  const double logit_p[] = {0.25, 0.5, 0.25};
  const auto lt = cutpoints_from_proportions(logit_p, Link(LinkFamily::logit));
  CHECK(lt[0] == doctest::Approx(-std::log(3.0)));
  CHECK(lt[1] == doctest::Approx(std::log(3.0)));
  const double half[] = {0.5, 0.5};
  CHECK(cutpoints_from_proportions(half, Link(LinkFamily::cloglog))[0] ==
        doctest::Approx(std::log(std::log(2.0))));

  const double zero[] = {0.5, 0.0, 0.5};
  CHECK_THROWS_AS(cutpoints_from_proportions(zero, Link()), ValidationError);
  const double off[] = {0.5, 0.6};
  CHECK_THROWS_AS(cutpoints_from_proportions(off, Link()), ValidationError);
  const double one[] = {1.0};
  CHECK_THROWS_AS(cutpoints_from_proportions(one, Link()), ValidationError);
}

TEST_CASE("forward probabilities invert the cutpoints") {
  Rng rng(11);
  for (const Link& link : kLinks) {
    for (int rep = 0; rep < 30; ++rep) {
      const std::size_t k = 2 + rng.below(6);
      std::vector<double> p(k);
      double total = 0;
      for (auto& v : p) total += v = 0.05 + rng.uniform();
      for (auto& v : p) v /= total;
      const auto tau = cutpoints_from_proportions(p, link);
      const auto back = forward_probabilities({tau, 0.0, 1.0, link});
      REQUIRE(back.size() == k);
      for (std::size_t j = 0; j < k; ++j) CHECK(back[j] == doctest::Approx(p[j]).epsilon(1e-9));
    }
  }
}

TEST_CASE("forward probabilities against the closed-form cdfs") {
  Rng rng(3);
  for (const Link& link : kLinks) {
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<double> tau = {-1.5 + rng.uniform(), 0.2 * rng.uniform(), 0.5 + rng.uniform()};
      const double shift = 2 * rng.uniform() - 1, scale = 0.3 + 2 * rng.uniform();
      const auto got = forward_probabilities({tau, shift, scale, link});
      double sum = 0;
      for (std::size_t j = 0; j < got.size(); ++j) {
        const double hi = j < tau.size() ? oracle_cdf(link, (tau[j] - shift) / scale) : 1.0;
        const double lo = j > 0 ? oracle_cdf(link, (tau[j - 1] - shift) / scale) : 0.0;
        CHECK(got[j] == doctest::Approx(hi - lo).epsilon(1e-12));
        CHECK(got[j] > 0);
        sum += got[j];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("shared forward vectors") {
  std::ifstream in(data_path("forward_vectors.json"));
  REQUIRE(in.good());
  const auto doc = nlohmann::json::parse(in);
  REQUIRE(doc.at("vectors").size() >= 20);
  for (const auto& v : doc.at("vectors")) {
    const ForwardModel m{v.at("tau").get<std::vector<double>>(), v.at("shift").get<double>(),
                         v.at("scale").get<double>(), Link::parse(v.at("link").get<std::string>())};
    const auto want = v.at("probs").get<std::vector<double>>();
    const auto got = forward_probabilities(m);
    REQUIRE(got.size() == want.size());
    for (std::size_t j = 0; j < got.size(); ++j) {
      CHECK_MESSAGE(std::abs(got[j] - want[j]) < 1e-9, v.at("name").get<std::string>());
    }
  }
}

TEST_CASE("scale limits") {
  const std::vector<double> tau = {-1.0, 0.5, 2.0};
  for (const Link& link : kLinks) {
    // an enormous spread piles the mass onto the tails in the ratio F(0) : 1 - F(0)
    const auto wide = forward_probabilities({tau, 0.0, 1e9, link});
    CHECK(wide[0] == doctest::Approx(link.cdf(0)).epsilon(1e-6));
    CHECK(wide[3] == doctest::Approx(1 - link.cdf(0)).epsilon(1e-6));
    CHECK(wide[1] + wide[2] < 1e-8);
    // a tiny spread concentrates on the category holding the shift
    const auto narrow = forward_probabilities({tau, 1.0, 1e-6, link});
    CHECK(narrow[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(forward_probabilities({tau, 0.0, 0.0, Link()}), ValidationError);
  CHECK_THROWS_AS(forward_probabilities({tau, 0.0, -1.0, Link()}), ValidationError);
  CHECK_THROWS_AS(forward_probabilities({{0.5, 0.5}, 0.0, 1.0, Link()}), ValidationError);
  CHECK_THROWS_AS(forward_probabilities({{1.0, 0.0}, 0.0, 1.0, Link()}), ValidationError);
  CHECK_THROWS_AS(forward_probabilities({{}, 0.0, 1.0, Link()}), ValidationError);
  CHECK_THROWS_AS(
      forward_probabilities({{std::numeric_limits<double>::infinity()}, 0.0, 1.0, Link()}),
      ValidationError);
}

TEST_CASE("shift translates the thresholds") {
  const std::vector<double> tau = {-0.7, 0.1, 1.2};
  for (const Link& link : kLinks) {
    const auto a = forward_probabilities({tau, 0.4, 1.3, link});
    const auto b = forward_probabilities({{-1.1, -0.3, 0.8}, 0.0, 1.3, link});
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));
  }
}

TEST_CASE("inversion sampling") {
  const double p[] = {0.2, 0.3, 0.5};
  CHECK(draw_category(p, 0.0) == 0);
  CHECK(draw_category(p, 0.19999) == 0);
  CHECK(draw_category(p, 0.2) == 1);
  CHECK(draw_category(p, 0.4999) == 1);
  CHECK(draw_category(p, 0.5) == 2);
  CHECK(draw_category(p, 0.999999) == 2);

  const ForwardModel m{{-0.8, 0.0, 0.9}, 0.2, 1.0, Link()};
  const auto probs = forward_probabilities(m);
  const std::size_t n = 200000;
  const auto draws = sample_ordinal(m, n, 99);
  std::vector<double> freq(4, 0);
  for (auto y : draws) freq[y] += 1;
  for (std::size_t j = 0; j < 4; ++j) {
    const double se = std::sqrt(probs[j] * (1 - probs[j]) / n);
    CHECK(std::abs(freq[j] / n - probs[j]) < 4 * se);
  }
  CHECK(sample_ordinal(m, 50, 7) == sample_ordinal(m, 50, 7));
  CHECK(sample_ordinal(m, 50, 7) != sample_ordinal(m, 50, 8));
  CHECK_THROWS_AS(sample_ordinal(m, 0, 1), ValidationError);
}

TEST_CASE("hierarchical simulation layout") {
  HierarchicalDesign d;
  d.tau = {-1.0, 0.0, 1.0};
  d.conditions = {"A", "B"};
  d.beta = {0.0, 0.8};
  d.sigma_b = 1.0;
  d.groups = 12;
  d.reps_per_cell = 3;
  const Dataset data = simulate_hierarchical(d, 4);
  CHECK(data.rows() == 12 * 2 * 3);
  CHECK(data.scale().labels() == std::vector<std::string>{"1", "2", "3", "4"});
  REQUIRE(data.group().has_value());
  CHECK(data.group()->factor.name() == "participant_id");
  CHECK(data.group()->factor.levels().front() == "g01");
  CHECK(data.group()->factor.levels().back() == "g12");
  const FactorColumn* cond = data.find_factor("condition");
  REQUIRE(cond != nullptr);
  std::map<std::pair<std::size_t, std::size_t>, int> cells;
  for (std::size_t i = 0; i < data.rows(); ++i) cells[{data.group()->codes[i], cond->codes[i]}] += 1;
  CHECK(cells.size() == 24);
  for (const auto& [key, count] : cells) CHECK(count == 3);

  const Dataset again = simulate_hierarchical(d, 4);
  CHECK(again.responses() == data.responses());
  CHECK(simulate_hierarchical(d, 5).responses() != data.responses());

  d.sigma_b = -1;
  CHECK_THROWS_AS(simulate_hierarchical(d, 1), ValidationError);
  d.sigma_b = 0;
  d.groups = 1;
  CHECK_THROWS_AS(simulate_hierarchical(d, 1), ValidationError);
  d.groups = 3;
  d.beta = {0.0};
  CHECK_THROWS_AS(simulate_hierarchical(d, 1), ValidationError);
}

TEST_CASE("hierarchical margins follow the forward model when sigma is zero") {
  HierarchicalDesign d;
  d.tau = {-0.5, 0.3, 1.1};
  d.conditions = {"A", "B"};
  d.beta = {0.0, 0.6};
  d.groups = 400;
  d.reps_per_cell = 50;
  const Dataset data = simulate_hierarchical(d, 12);
  const FactorColumn* cond = data.find_factor("condition");
  for (std::size_t c = 0; c < 2; ++c) {
    const auto probs = forward_probabilities({d.tau, d.beta[c], 1.0, Link()});
    std::vector<double> freq(4, 0);
    double n = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (cond->codes[i] != c) continue;
      freq[data.responses()[i]] += 1;
      n += 1;
    }
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(std::abs(freq[j] / n - probs[j]) < 4 * std::sqrt(probs[j] * (1 - probs[j]) / n));
    }
  }
}

TEST_CASE("random streams") {
  Rng a(1, 0), b(1, 0), c(1, 1);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  Rng u(2);
  double mean = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = u.normal();
    mean += z;
    sq += z * z;
  }
  CHECK(std::abs(mean / n) < 0.02);
  CHECK(std::abs(sq / n - 1) < 0.03);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = u.below(7);
    CHECK(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
}
