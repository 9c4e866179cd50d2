#include "ordreg/inference.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "ordreg/errors.hpp"
#include "ordreg/random.hpp"

namespace ordreg {
namespace {

double chi_square_upper(double statistic, double df) {
  if (df <= 0) return 1.0;
  if (!(statistic > 0)) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), statistic));
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

const TermCoding& find_factor_term(const FittedClm& fitted, const std::string& factor) {
  for (const auto& t : fitted.location_terms) {
    if (t.term == factor) {
      if (t.kind != TermKind::factor) {
        throw ValidationError("term '" + factor + "' is numeric, not a factor");
      }
      return t;
    }
  }
  throw ValidationError("factor '" + factor + "' is not a location term of the model");
}

/// Packed index of a level's coefficient; nullopt for the reference level.
std::optional<std::size_t> level_index(const FittedClm& fitted, const TermCoding& coding,
                                       const std::string& level) {
  auto it = std::find(coding.levels.begin(), coding.levels.end(), level);
  if (it == coding.levels.end()) {
    throw ValidationError("factor '" + coding.term + "' has no level '" + level + "'");
  }
  const auto pos = static_cast<std::size_t>(it - coding.levels.begin());
  if (pos == coding.reference) return std::nullopt;
  std::size_t offset = fitted.layout.location_offset();
  for (const auto& t : fitted.location_terms) {
    if (&t == &coding) break;
    offset += t.column_names().size();
  }
  return offset + (pos < coding.reference ? pos : pos - 1);
}

double wald_statistic(const Eigen::VectorXd& d, const Eigen::MatrixXd& v) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(v);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0)) {
    throw Error("covariance of the coefficient differences is singular");
  }
  return std::max(0.0, d.dot(ldlt.solve(d)));
}

}  // namespace

std::vector<WaldRow> wald_table(const FittedClm& fitted) {
  std::vector<WaldRow> rows;
  for (std::size_t j = 0; j < fitted.parameter_count(); ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    const double var = fitted.covariance(i, i);
    if (!(var > 0) || !std::isfinite(var)) {
      throw Error("covariance is singular: variance of '" + fitted.names[j] + "' is not positive");
    }
    WaldRow r{fitted.names[j], fitted.estimates(i), std::sqrt(var)};
    r.z = r.estimate / r.std_error;
    r.p = two_sided_normal_p(r.z);
    rows.push_back(r);
  }
  return rows;
}

TestStatistic likelihood_ratio_test(const FittedClm& null_fit, const FittedClm& full_fit) {
  const auto& a = null_fit.spec;
  const auto& b = full_fit.spec;
  auto subset = [](const std::vector<std::string>& small, const std::vector<std::string>& big,
                   const std::vector<std::string>& alt = {}) {
    for (const auto& t : small) {
      if (std::find(big.begin(), big.end(), t) == big.end() &&
          std::find(alt.begin(), alt.end(), t) == alt.end()) {
        return false;
      }
    }
    return true;
  };
  const bool nested = null_fit.n_obs == full_fit.n_obs && a.response == b.response &&
                      a.link == b.link && null_fit.scale == full_fit.scale &&
                      subset(a.location, b.location, b.nominal) && subset(a.scale, b.scale) &&
                      subset(a.nominal, b.nominal) &&
                      null_fit.parameter_count() <= full_fit.parameter_count();
  if (!nested) throw ValidationError("models are not nested (same data, link and scale; terms contained)");
  const double df = static_cast<double>(full_fit.parameter_count() - null_fit.parameter_count());
  double stat = 2.0 * (full_fit.log_lik - null_fit.log_lik);
  if (stat < 0) stat = 0;
  return {stat, df, df == 0 ? 1.0 : chi_square_upper(stat, df)};
}

BrantResult brant_test(const FittedClm& fitted, const Dataset& data) {
  const auto& L = fitted.layout;
  if (L.scale > 0 || L.nominal > 0) {
    throw ValidationError("the Brant test needs a location-only model");
  }
  if (fitted.scale.size() < 3) throw ValidationError("the Brant test needs at least 3 categories");
  if (L.location == 0) throw ValidationError("the model has no location coefficients to test");
  const Dataset base = drop_unobserved_boundary_categories(data).data;
  if (!(base.scale() == fitted.scale) || base.rows() != fitted.n_obs) {
    throw ValidationError("data do not match the fitted model");
  }
  const std::size_t J = L.thresholds;
  const std::size_t p = L.location;
  ModelSpec spec = fitted.spec;

  std::vector<Eigen::VectorXd> betas;
  std::vector<Eigen::MatrixXd> bread;   // inverse information
  std::vector<Eigen::MatrixXd> scores;  // rows x (1 + p)
  for (std::size_t k = 0; k < J; ++k) {
    const std::string split = fitted.scale.threshold_name(k);
    std::vector<std::size_t> y(base.rows());
    std::size_t above = 0;
    for (std::size_t i = 0; i < base.rows(); ++i) {
      y[i] = base.responses()[i] > k ? 1 : 0;
      above += y[i];
    }
    if (above == 0 || above == base.rows()) {
      throw ValidationError("binary split " + split + " has an empty side");
    }
    Dataset binary(OrdinalScale({"<=" + fitted.scale.label(k), ">" + fitted.scale.label(k)}), y,
                   base.factors(), base.numerics());
    FittedClm fit = [&] {
      try {
        return fit_clm(spec, binary);
      } catch (const SeparationError& e) {
        throw SeparationError("binary split " + split + ": " + e.what(), e.iterations(),
                              e.max_abs_gradient(), e.best_nll());
      } catch (const Error& e) {
        throw ValidationError("binary split " + split + ": " + e.what());
      }
    }();
    const Design design = build_design(spec, binary);
    const ClmLikelihood lik(design, binary.responses(), 2, spec.link);
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    lik.evaluate(fit.estimates, &g, &h);
    betas.push_back(fit.estimates.tail(static_cast<Eigen::Index>(p)));
    bread.push_back(h.inverse());
    scores.push_back(lik.row_scores(fit.estimates));
  }

  const auto P = static_cast<Eigen::Index>(p);
  Eigen::VectorXd stacked(static_cast<Eigen::Index>(p * J));
  Eigen::MatrixXd v(static_cast<Eigen::Index>(p * J), static_cast<Eigen::Index>(p * J));
  for (std::size_t k = 0; k < J; ++k) {
    const auto rk = static_cast<Eigen::Index>(k * p);
    stacked.segment(rk, P) = betas[k];
    for (std::size_t l = 0; l < J; ++l) {
      const auto rl = static_cast<Eigen::Index>(l * p);
      const Eigen::MatrixXd meat = scores[k].transpose() * scores[l];
      const Eigen::MatrixXd block = bread[k] * meat * bread[l].transpose();
      v.block(rk, rl, P, P) = block.bottomRightCorner(P, P);
    }
  }

  BrantResult result;
  const auto rows = static_cast<Eigen::Index>(p * (J - 1));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(p * J));
  for (std::size_t k = 1; k < J; ++k) {
    const auto r = static_cast<Eigen::Index>((k - 1) * p);
    d.block(r, 0, P, P).setIdentity();
    d.block(r, static_cast<Eigen::Index>(k * p), P, P) = -Eigen::MatrixXd::Identity(P, P);
  }
  const double omni = wald_statistic(d * stacked, d * v * d.transpose());
  result.omnibus = {omni, static_cast<double>(rows), chi_square_upper(omni, static_cast<double>(rows))};

  const auto Jm = static_cast<Eigen::Index>(J);
  for (std::size_t j = 0; j < p; ++j) {
    Eigen::VectorXd b(Jm);
    Eigen::MatrixXd vj(Jm, Jm);
    for (std::size_t k = 0; k < J; ++k) {
      b(static_cast<Eigen::Index>(k)) = stacked(static_cast<Eigen::Index>(k * p + j));
      for (std::size_t l = 0; l < J; ++l) {
        vj(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
            v(static_cast<Eigen::Index>(k * p + j), static_cast<Eigen::Index>(l * p + j));
      }
    }
    Eigen::MatrixXd dj = Eigen::MatrixXd::Zero(Jm - 1, Jm);
    for (Eigen::Index k = 1; k < Jm; ++k) {
      dj(k - 1, 0) = 1;
      dj(k - 1, k) = -1;
    }
    const double stat = wald_statistic(dj * b, dj * vj * dj.transpose());
    const double df = static_cast<double>(J - 1);
    result.columns.push_back({fitted.names[J + j], {stat, df, chi_square_upper(stat, df)}});
  }
  return result;
}

Adjustment parse_adjustment(std::string_view name) {
  if (name == "none") return Adjustment::none;
  if (name == "bonferroni") return Adjustment::bonferroni;
  if (name == "holm") return Adjustment::holm;
  throw ValidationError("unknown adjustment '" + std::string(name) +
                        "' (expected none, bonferroni or holm)");
}

std::string adjustment_name(Adjustment adjustment) {
  switch (adjustment) {
    case Adjustment::none: return "none";
    case Adjustment::bonferroni: return "bonferroni";
    case Adjustment::holm: return "holm";
  }
  return "none";
}

std::vector<double> adjust_p_values(const std::vector<double>& p, Adjustment adjustment) {
  const double m = static_cast<double>(p.size());
  std::vector<double> out(p.size());
  if (adjustment == Adjustment::none) return p;
  if (adjustment == Adjustment::bonferroni) {
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::min(1.0, m * p[i]);
    return out;
  }
  std::vector<std::size_t> order(p.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  double running = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    running = std::max(running, std::min(1.0, (m - static_cast<double>(r)) * p[order[r]]));
    out[order[r]] = running;
  }
  return out;
}

ContrastResult contrast(const FittedClm& fitted, const std::string& factor,
                        const std::string& level_a, const std::string& level_b) {
  const auto& coding = find_factor_term(fitted, factor);
  const auto ia = level_index(fitted, coding, level_a);
  const auto ib = level_index(fitted, coding, level_b);
  auto est = [&](std::optional<std::size_t> i) {
    return i ? fitted.estimates(static_cast<Eigen::Index>(*i)) : 0.0;
  };
  auto cov = [&](std::optional<std::size_t> i, std::optional<std::size_t> j) {
    return i && j ? fitted.covariance(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j))
                  : 0.0;
  };
  ContrastResult r;
  r.level_a = level_a;
  r.level_b = level_b;
  r.estimate = est(ia) - est(ib);
  const double var = cov(ia, ia) + cov(ib, ib) - 2 * cov(ia, ib);
  r.std_error = std::sqrt(std::max(0.0, var));
  if (r.std_error > 0) {
    r.z = r.estimate / r.std_error;
    r.p_raw = two_sided_normal_p(r.z);
  } else {
    r.z = 0;
    r.p_raw = 1;
  }
  r.p_adjusted = r.p_raw;
  r.adjustment = Adjustment::none;
  return r;
}

std::vector<ContrastResult> pairwise_contrasts(const FittedClm& fitted, const std::string& factor,
                                               Adjustment adjustment) {
  const auto& coding = find_factor_term(fitted, factor);
  std::vector<ContrastResult> out;
  for (std::size_t i = 0; i < coding.levels.size(); ++i) {
    for (std::size_t j = i + 1; j < coding.levels.size(); ++j) {
      out.push_back(contrast(fitted, factor, coding.levels[j], coding.levels[i]));
    }
  }
  std::vector<double> raw;
  for (const auto& c : out) raw.push_back(c.p_raw);
  const auto adj = adjust_p_values(raw, adjustment);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].p_adjusted = adj[i];
    out[i].adjustment = adjustment;
  }
  return out;
}

std::vector<double> expected_scores(const FittedClm& fitted, const std::string& factor,
                                    const OrdinalScale& original,
                                    const std::vector<double>& scores) {
  const auto& coding = find_factor_term(fitted, factor);
  if (!scores.empty() && scores.size() != original.size()) {
    throw ValidationError("need one score per category (" + std::to_string(original.size()) +
                          "), got " + std::to_string(scores.size()));
  }
  std::vector<double> code(fitted.scale.size());
  for (std::size_t k = 0; k < fitted.scale.size(); ++k) {
    const auto idx = original.find(fitted.scale.label(k));
    if (!idx) throw ValidationError("fitted category '" + fitted.scale.label(k) + "' not in scale");
    code[k] = scores.empty() ? static_cast<double>(*idx + 1) : scores[*idx];
  }
  std::vector<double> out;
  for (const auto& level : coding.levels) {
    const auto probs = predict_probs(fitted, {{factor, level}});
    double e = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) e += code[k] * probs[k];
    out.push_back(e);
  }
  return out;
}

double quantile_type7(std::vector<double> values, double probability) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  if (!(probability >= 0 && probability <= 1)) throw ValidationError("probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1) * probability;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::vector<BootstrapCI> bootstrap_response_scale_ci(
    const ModelSpec& spec, const Dataset& data, const std::string& factor,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const BootstrapOptions& options) {
  if (options.replicates < 100) throw ValidationError("at least 100 bootstrap replicates are required");
  if (!(options.level > 0 && options.level < 1)) throw ValidationError("level must be in (0, 1)");
  if (!options.scores.empty() && options.scores.size() != data.scale().size()) {
    throw ValidationError("one score per category is required");
  }
  const FactorColumn* column = data.find_factor(factor);
  if (!column) throw ValidationError("dataset has no factor '" + factor + "'");
  auto level_pos = [&](const std::string& level) { return column->factor.index_of(level); };
  std::vector<std::pair<std::size_t, std::size_t>> index_pairs;
  for (const auto& [a, b] : pairs) index_pairs.emplace_back(level_pos(a), level_pos(b));

  std::vector<std::vector<std::size_t>> strata(column->factor.size());
  for (std::size_t i = 0; i < column->codes.size(); ++i) strata[column->codes[i]].push_back(i);

  auto differences = [&](const Dataset& d) {
    const FittedClm fit = fit_clm(spec, d);
    const auto e = expected_scores(fit, factor, data.scale(), options.scores);
    std::vector<double> out;
    for (const auto& [a, b] : index_pairs) out.push_back(e[a] - e[b]);
    return out;
  };
  const auto point = differences(data);

  const std::size_t B = options.replicates;
  std::vector<std::optional<std::vector<double>>> draws(B);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> rows;
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(options.seed, r + 1);
      rows.clear();
      for (const auto& s : strata) {
        for (std::size_t i = 0; i < s.size(); ++i) rows.push_back(s[rng.below(s.size())]);
      }
      try {
        draws[r] = differences(data.select(rows));
      } catch (const Error&) {
        draws[r].reset();
      }
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    run_range(0, B);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (B + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(B, t * chunk);
      const std::size_t end = std::min(B, begin + chunk);
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  const auto failures = static_cast<std::size_t>(
      std::count_if(draws.begin(), draws.end(), [](const auto& d) { return !d; }));
  if (static_cast<double>(failures) > 0.05 * static_cast<double>(B)) {
    throw Error(std::to_string(failures) + " of " + std::to_string(B) +
                " bootstrap refits failed (more than 5%)");
  }
  std::vector<BootstrapCI> out;
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    std::vector<double> sample;
    for (const auto& d : draws) {
      if (d) sample.push_back((*d)[q]);
    }
    BootstrapCI ci;
    ci.level_a = pairs[q].first;
    ci.level_b = pairs[q].second;
    ci.estimate = point[q];
    ci.lower = quantile_type7(sample, (1 - options.level) / 2);
    ci.upper = quantile_type7(sample, (1 + options.level) / 2);
    ci.level = options.level;
    ci.replicates = B;
    ci.failures = failures;
    ci.seed = options.seed;
    out.push_back(ci);
  }
  return out;
}

Interpretation interpret_coefficient(const FittedClm& fitted, const std::string& term,
                                     const InterpretationContext& context) {
  const auto idx = fitted.index_of(term);
  const auto& L = fitted.layout;
  if (!idx || *idx < L.location_offset() || *idx >= L.scale_offset()) {
    throw ValidationError("'" + term + "' is not a location coefficient of the model");
  }
  std::string level = term, reference = context.reference, factor;
  for (const auto& t : fitted.location_terms) {
    const auto cols = t.column_names();
    const auto it = std::find(cols.begin(), cols.end(), term);
    if (it == cols.end()) continue;
    factor = t.term;
    if (t.kind == TermKind::factor) {
      std::size_t pos = static_cast<std::size_t>(it - cols.begin());
      if (pos >= t.reference) ++pos;
      level = t.term + " = " + t.levels[pos];
      if (reference.empty()) reference = t.term + " = " + t.levels[t.reference];
    }
  }
  const auto i = static_cast<Eigen::Index>(*idx);
  Interpretation out;
  out.term = term;
  out.link = fitted.spec.link.name();
  out.estimate = fitted.estimates(i);
  out.std_error = std::sqrt(std::max(0.0, fitted.covariance(i, i)));
  out.p = out.std_error > 0 ? two_sided_normal_p(out.estimate / out.std_error) : 1.0;

  const bool numeric_term = reference.empty();
  const std::string at = numeric_term ? "per unit increase of " + factor : "at " + level;
  const std::string versus = numeric_term ? "" : " than at " + reference;
  const std::string est = fmt("%.4f", out.estimate);
  const bool zero = est == "0.0000" || est == "-0.0000";
  const std::string p_text = out.p < 0.001 ? "p < 0.001" : "p = " + fmt("%.3g", out.p);
  const std::string significance =
      p_text + (out.p < context.alpha ? ", significant" : ", not significant") + " at the " +
      fmt("%g", context.alpha) + " level";

  std::string text;
  if (fitted.spec.link.family() == LinkFamily::logit) {
    const double ratio = std::exp(out.estimate);
    out.odds_ratio = ratio;
    const std::string r3 = fmt("%.3f", ratio);
    text = term + ": log-odds estimate " + est + " (SE " + fmt("%.4f", out.std_error) + ", " +
           significance + "). ";
    if (zero) {
      text += "Odds ratio exp(" + est + ") = 1.000: no shift in the odds of a higher category of " +
              context.response + " " + at + versus + ".";
    } else if (ratio < 1) {
      text += "Odds ratio exp(" + est + ") = " + r3 + ": a higher category of " + context.response +
              " is approximately " + fmt("%.1f", 1.0 / ratio) + " times (1/" + r3 + ") less likely " +
              at + versus + ", a " + fmt("%.0f", 100.0 * (1.0 - ratio)) +
              "% reduction in the odds.";
    } else {
      text += "Odds ratio exp(" + est + ") = " + r3 + ": a higher category of " + context.response +
              " is approximately " + fmt("%.1f", ratio) + " times more likely " + at +
              versus + ", a " + fmt("%.0f", 100.0 * (ratio - 1.0)) + "% increase in the odds.";
    }
  } else {
    const std::string magnitude = fmt("%.4f", std::abs(out.estimate));
    text = term + ": ";
    if (zero) {
      text += "no shift on the latent score scale " + at + versus;
    } else if (out.estimate < 0) {
      text += "a decrease of " + est + " on the latent score scale (" + magnitude +
              " latent standard units lower " + at + versus + ")";
    } else {
      text += "an increase of " + est + " on the latent score scale (" + magnitude +
              " latent standard units higher " + at + versus + ")";
    }
    text += " (SE " + fmt("%.4f", out.std_error) + ", " + significance + ").";
    if (!zero) {
      text += out.estimate < 0 ? " Higher categories of " + context.response + " are less likely."
                               : " Higher categories of " + context.response + " are more likely.";
    }
    if (fitted.spec.link.family() == LinkFamily::probit) {
      text += " The estimate is a shift of the mean of a standard normal latent variable assumed "
              "to generate the ordinal responses through the fitted thresholds; readers new to "
              "latent-variable models should be pointed to an introduction to them.";
    } else {
      text += " Note: the cloglog link has no odds-ratio form; the estimate is a shift on the "
              "latent extreme-value scale.";
    }
  }
  out.text = text;
  return out;
}

}  // namespace ordreg
