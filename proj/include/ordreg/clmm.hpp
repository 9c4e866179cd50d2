#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ordreg/clm.hpp"
#include "ordreg/quadrature.hpp"

namespace ordreg {

/// Marginal likelihood of a cumulative link model with one random intercept
/// per group, integrated over b ~ N(0, sigma^2). Fixed parameters are packed
/// as (thresholds, location).
class ClmmLikelihood {
 public:
  ClmmLikelihood(const Design& design, std::span<const std::size_t> responses,
                 std::size_t categories, const FactorColumn& group, Link link);

  const ParameterLayout& layout() const noexcept { return layout_; }
  std::size_t groups() const noexcept { return members_.size(); }
  /// Groups with at least one row.
  std::size_t observed_groups() const;

  /// Negative log marginal likelihood; nodes = 1 is the Laplace
  /// approximation, larger odd counts use adaptive Gauss-Hermite quadrature
  /// centred at each group's mode. Fills per-group modes of b when asked.
  double value(const Eigen::VectorXd& fixed, double sigma, int nodes,
               std::vector<double>* modes = nullptr) const;
  /// value() plus its gradient with respect to (fixed, log sigma).
  double value_and_gradient(const Eigen::VectorXd& fixed, double sigma, int nodes,
                            Eigen::VectorXd& gradient) const;

  /// Inner Newton iterations performed so far (all calls).
  long inner_iterations() const noexcept { return inner_iterations_; }

 private:
  struct GroupTerms {
    double h = 0;   // -sum log P + u^2/2
    double h1 = 0;  // dh/du
    double h2 = 0;  // d2h/du2
  };
  bool group_terms(std::size_t g, const Eigen::VectorXd& eta, const Eigen::VectorXd& tau,
                   double sigma, double u, GroupTerms& out, bool derivatives) const;
  struct GroupPartials {
    Eigen::VectorXd d1;  // sum of dlogP/dphi over the group's rows
    Eigen::VectorXd d2;  // d2 logP / db dphi
    Eigen::VectorXd d3;  // d3 logP / db2 dphi
    double s1 = 0, s2 = 0, s3 = 0;  // derivatives of sum log P in b
    double log_p = 0;
  };
  bool group_partials(std::size_t g, const Eigen::VectorXd& eta, const Eigen::VectorXd& tau,
                      double b, bool third, GroupPartials& out) const;
  double evaluate(const Eigen::VectorXd& fixed, double sigma, int nodes,
                  std::vector<double>* modes, Eigen::VectorXd* gradient) const;
  double group_mode(std::size_t g, const Eigen::VectorXd& eta, const Eigen::VectorXd& tau,
                    double sigma, GroupTerms& at_mode) const;

  Design design_;
  std::vector<std::size_t> responses_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::string> labels_;
  Link link_;
  ParameterLayout layout_;
  mutable long inner_iterations_ = 0;
};

double marginal_nll_laplace(const ModelSpec& spec, const Dataset& data,
                            const Eigen::VectorXd& fixed, double sigma);
double marginal_nll_agq(const ModelSpec& spec, const Dataset& data, const Eigen::VectorXd& fixed,
                        double sigma, int nodes);

struct ClmmOptions {
  /// 1 = Laplace; otherwise an odd Gauss-Hermite node count up to 101.
  int nodes = 1;
  double tolerance = 1e-6;
  int max_iterations = 500;
  /// Holds the random-intercept SD at this value (0 allowed).
  std::optional<double> fixed_sigma;
  /// Packed (thresholds, location, log sigma) start; log sigma is ignored
  /// when sigma is fixed.
  std::optional<Eigen::VectorXd> start;
};

struct FittedClmm {
  /// Fixed-effect part. `covariance` covers the fixed parameters only;
  /// log_lik and aic refer to the marginal model (aic counts sigma unless
  /// it was fixed).
  FittedClm fixed;
  std::string group;
  std::vector<std::string> group_levels;
  double sigma = 0;
  /// NaN when sigma is fixed or on the boundary.
  double sigma_se = 0;
  bool sigma_fixed = false;
  /// Covariance of (thresholds, location, log sigma); fixed block only when
  /// sigma is fixed or on the boundary.
  Eigen::MatrixXd full_covariance;
  /// Per-group modes of the random intercept, in group-level order.
  std::vector<double> modes;
  int nodes = 1;
  std::size_t group_count = 0;

  double variance() const { return sigma * sigma; }
};

FittedClmm fit_clmm(const ModelSpec& spec, const Dataset& data, const ClmmOptions& options = {});

/// The stored per-group modes.
const std::vector<double>& conditional_modes(const FittedClmm& fitted);
/// Modes recomputed from the fitted parameters and the data.
std::vector<double> recompute_conditional_modes(const FittedClmm& fitted, const Dataset& data);

}  // namespace ordreg
