#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ordreg/errors.hpp"
#include "ordreg/links.hpp"

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

TEST_CASE("cdf agrees with closed forms") {
  for (const auto& link : kLinks) {
    for (double x = -8; x <= 8; x += 0.25) {
      CHECK(link.cdf(x) == doctest::Approx(oracle_cdf(link, x)).epsilon(1e-12));
    }
  }
  CHECK(Link(LinkFamily::probit).cdf(0) == 0.5);
  CHECK(Link(LinkFamily::logit).cdf(0) == 0.5);
  CHECK(std::abs(Link(LinkFamily::probit).cdf(-1.2816) - 0.10) < 1e-4);
}

TEST_CASE("quantile inverts cdf") {
  for (const auto& link : kLinks) {
    for (int i = 1; i <= 999; ++i) {
      const double p = i / 1000.0;
      CHECK(std::abs(link.cdf(link.quantile(p)) - p) < 1e-10);
    }
  }
  CHECK(std::abs(Link(LinkFamily::probit).quantile(0.25) + 0.6745) < 5e-5);
  CHECK(Link(LinkFamily::probit).quantile(0.5) == doctest::Approx(0).epsilon(1e-15));
  CHECK(std::abs(Link(LinkFamily::logit).quantile(0.5)) < 1e-15);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK_THROWS_AS(Link(LinkFamily::probit).quantile(0.0), ValidationError);
  CHECK_THROWS_AS(Link(LinkFamily::logit).quantile(1.0), ValidationError);
}

TEST_CASE("density is the derivative of cdf") {
  const double h = 1e-5;
  for (const auto& link : kLinks) {
    for (double x = -6; x <= 4; x += 0.1) {
      const double numeric = (link.cdf(x + h) - link.cdf(x - h)) / (2 * h);
      CHECK(std::abs(numeric - link.density(x)) < 1e-6);
      const double second = (link.density(x + h) - link.density(x - h)) / (2 * h);
      CHECK(std::abs(second - link.density_derivative(x)) < 1e-6);
      const double third = (link.density_derivative(x + h) - link.density_derivative(x - h)) / (2 * h);
      CHECK(std::abs(third - link.density_second_derivative(x)) < 1e-6);
    }
    // trapezoid integral over a wide range
    double area = 0;
    for (double x = -40; x < 40; x += 0.001) area += 0.001 * link.density(x + 0.0005);
    CHECK(area == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(Link(LinkFamily::probit).density(0) == doctest::Approx(1 / std::sqrt(2 * M_PI)));
  CHECK(Link(LinkFamily::logit).density(0) == doctest::Approx(0.25));
  const double tail = Link(LinkFamily::probit).density(8);
  CHECK(tail < 1e-14);
  CHECK(tail == doctest::Approx(std::exp(-32.0) / std::sqrt(2 * M_PI)).epsilon(1e-12));
  CHECK(Link(LinkFamily::probit).density(-8) == tail);
}

TEST_CASE("symmetric links satisfy cdf(-x) = 1 - cdf(x)") {
  for (const auto& link : {kLinks[0], kLinks[1]}) {
    CHECK(link.symmetric());
    for (double x = 0; x <= 8; x += 0.5) CHECK(std::abs(link.cdf(-x) - (1 - link.cdf(x))) < 1e-12);
  }
  CHECK_FALSE(kLinks[2].symmetric());
  CHECK(std::abs(kLinks[2].cdf(-1) - (1 - kLinks[2].cdf(1))) > 0.1);
}

TEST_CASE("upper tail keeps relative precision") {
  const Link probit(LinkFamily::probit);
  CHECK(probit.ccdf(10) == doctest::Approx(0.5 * std::erfc(10 / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(probit.interval_probability(9, 10) > 0);
  CHECK(probit.interval_probability(9, 10) ==
        doctest::Approx(0.5 * (std::erfc(9 / std::sqrt(2.0)) - std::erfc(10 / std::sqrt(2.0))))
            .epsilon(1e-10));
  CHECK(probit.interval_probability(-INFINITY, INFINITY) == doctest::Approx(1.0));
  CHECK(probit.interval_probability(-INFINITY, 0) == doctest::Approx(0.5));
}

TEST_CASE("links parse by name and reject non-finite input") {
  CHECK(Link::parse("probit").family() == LinkFamily::probit);
  CHECK(Link::parse("logit").family() == LinkFamily::logit);
  CHECK(Link::parse("cloglog").name() == "cloglog");
  CHECK_THROWS_AS(Link::parse("cauchit"), ValidationError);
  CHECK_THROWS_AS(Link(LinkFamily::probit).cdf(NAN), ValidationError);
  CHECK_THROWS_AS(Link(LinkFamily::logit).density(INFINITY), ValidationError);
}
