#include "ordreg/links.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "ordreg/errors.hpp"

namespace ordreg {
namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
// cloglog median: log(log 2)
constexpr double kCloglogMedian = -0.366512920581664327012439158232;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw ValidationError(std::string(what) + ": argument must be finite");
  }
}

template <std::size_t N>
double horner(const std::array<double, N>& c, double x) {
  double acc = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double probit_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

// Wichura's AS241 (PPND16) rational approximation, about 1e-16 relative.
double ppnd16(double p) {
  static constexpr std::array<double, 8> a = {
      3.387132872796366608,   133.14166789178437745, 1971.5909503065514427,
      13731.693765509461125,  45921.953931549871457, 67265.770927008700853,
      33430.575583588128105,  2509.0809287301226727};
  static constexpr std::array<double, 8> b = {
      1.0,                   42.313330701600911252, 687.1870074920579083,
      5394.1960214247511077, 21213.794301586595867, 39307.89580009271061,
      28729.085735721942674, 5226.495278852545925};
  static constexpr std::array<double, 8> c = {
      1.42343711074968357734,  4.6303378461565452959,    5.7694972214606914055,
      3.64784832476320460504,  1.27045825245236838258,   0.24178072517745061177,
      0.0227238449892691845833, 7.7454501427834140764e-4};
  static constexpr std::array<double, 8> d = {
      1.0,                     2.05319162663775882187,  1.6763848301838038494,
      0.68976733498510000455,  0.14810397642748007459,  0.0151986665636164571966,
      5.475938084995344946e-4, 1.05075007164441684324e-9};
  static constexpr std::array<double, 8> e = {
      6.6579046435011037772,    5.4637849111641143699,     1.7848265399172913358,
      0.29656057182850489123,   0.026532189526576123093,   0.0012426609473880784386,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr std::array<double, 8> f = {
      1.0,                     0.59983220655588793769,   0.13692988092273580531,
      0.0148753612908506148525, 7.868691311456132591e-4, 1.8463183175100546818e-5,
      1.4215117583164458887e-7, 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, r) / horner(b, r);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = horner(c, r) / horner(d, r);
  } else {
    r -= 5.0;
    val = horner(e, r) / horner(f, r);
  }
  return q < 0 ? -val : val;
}

double probit_quantile(double p) {
  double x = ppnd16(p);
  // One Newton step against erfc tightens the last few ulps.
  const double dens = phi(x);
  if (dens > 0) {
    if (p < 0.5) {
      x -= (probit_cdf(x) - p) / dens;
    } else {
      x += (probit_cdf(-x) - (1.0 - p)) / dens;
    }
  }
  return x;
}

double raw_cdf(LinkFamily family, double x) {
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  switch (family) {
    case LinkFamily::probit:
      return probit_cdf(x);
    case LinkFamily::logit:
      if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
      return std::exp(x) / (1.0 + std::exp(x));
    case LinkFamily::cloglog:
      return -std::expm1(-std::exp(x));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double raw_ccdf(LinkFamily family, double x) {
  if (x == -std::numeric_limits<double>::infinity()) return 1.0;
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  switch (family) {
    case LinkFamily::probit:
    case LinkFamily::logit:
      return raw_cdf(family, -x);
    case LinkFamily::cloglog:
      return std::exp(-std::exp(x));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

Link Link::parse(std::string_view name) {
  if (name == "probit") return Link(LinkFamily::probit);
  if (name == "logit") return Link(LinkFamily::logit);
  if (name == "cloglog") return Link(LinkFamily::cloglog);
  throw ValidationError("unknown link '" + std::string(name) +
                        "' (expected probit, logit or cloglog)");
}

std::string Link::name() const {
  switch (family_) {
    case LinkFamily::probit:
      return "probit";
    case LinkFamily::logit:
      return "logit";
    case LinkFamily::cloglog:
      return "cloglog";
  }
  return "unknown";
}

double Link::cdf(double x) const {
  require_finite(x, "cdf");
  return raw_cdf(family_, x);
}

double Link::ccdf(double x) const {
  require_finite(x, "ccdf");
  return raw_ccdf(family_, x);
}

double Link::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("quantile: probability must lie strictly inside (0, 1)");
  }
  switch (family_) {
    case LinkFamily::probit:
      return probit_quantile(p);
    case LinkFamily::logit:
      return std::log(p) - std::log1p(-p);
    case LinkFamily::cloglog:
      return std::log(-std::log1p(-p));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Link::density(double x) const {
  require_finite(x, "density");
  switch (family_) {
    case LinkFamily::probit:
      return phi(x);
    case LinkFamily::logit: {
      const double e = std::exp(-std::abs(x));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case LinkFamily::cloglog:
      if (x > 40.0) return 0.0;
      return std::exp(x - std::exp(x));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Link::density_derivative(double x) const {
  const double f = density(x);
  switch (family_) {
    case LinkFamily::probit:
      return -x * f;
    case LinkFamily::logit:
      return f * (1.0 - 2.0 * raw_cdf(family_, x));
    case LinkFamily::cloglog:
      if (f == 0.0) return 0.0;
      return f * (1.0 - std::exp(x));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Link::density_second_derivative(double x) const {
  const double f = density(x);
  if (f == 0.0) return 0.0;
  switch (family_) {
    case LinkFamily::probit:
      return (x * x - 1.0) * f;
    case LinkFamily::logit:
      return f * (1.0 - 6.0 * f);
    case LinkFamily::cloglog: {
      const double e = std::exp(x);
      return f * ((1.0 - e) * (1.0 - e) - e);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Link::interval_probability(double lower, double upper) const {
  const double median = family_ == LinkFamily::cloglog ? kCloglogMedian : 0.0;
  if (lower >= median) return raw_ccdf(family_, lower) - raw_ccdf(family_, upper);
  return raw_cdf(family_, upper) - raw_cdf(family_, lower);
}

double normal_cdf(double x) { return probit_cdf(x); }

double normal_quantile(double p) { return Link(LinkFamily::probit).quantile(p); }

double two_sided_normal_p(double z) {
  if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

}  // namespace ordreg
