#pragma once

#include <string>
#include <string_view>

namespace ordreg {

enum class LinkFamily { probit, logit, cloglog };

/// Cumulative distribution family of the latent error term. The link proper
/// is the quantile function; cdf/density are the inverse link and its
/// derivative.
class Link {
 public:
  constexpr Link() = default;
  constexpr explicit Link(LinkFamily family) : family_(family) {}

  static Link parse(std::string_view name);

  LinkFamily family() const noexcept { return family_; }
  std::string name() const;
  bool symmetric() const noexcept { return family_ != LinkFamily::cloglog; }

  double cdf(double x) const;
  /// 1 - cdf(x), evaluated without cancellation in the upper tail.
  double ccdf(double x) const;
  double quantile(double p) const;
  double density(double x) const;
  /// First derivative of the density.
  double density_derivative(double x) const;
  double density_second_derivative(double x) const;

  /// F(upper) - F(lower) for lower < upper, computed on whichever tail loses
  /// less precision. Either bound may be infinite.
  double interval_probability(double lower, double upper) const;

  friend bool operator==(const Link&, const Link&) = default;

 private:
  LinkFamily family_ = LinkFamily::probit;
};

// Standard normal helpers shared with the inference code.
double normal_cdf(double x);
double normal_quantile(double p);
/// Two-sided p-value 2 * (1 - Phi(|z|)).
double two_sided_normal_p(double z);

}  // namespace ordreg
