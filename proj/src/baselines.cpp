#include "ordreg/baselines.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "ordreg/errors.hpp"
#include "ordreg/links.hpp"

namespace ordreg {
namespace {

double chi_square_upper(double x, double df) {
  if (!(x > 0)) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

TestResult make_result(std::string_view id) {
  const auto& info = registry_entry(id);
  TestResult r;
  r.test = info.id;
  r.flags = info.flags;
  r.design = info.designs.front();
  return r;
}

/// Sum over tie groups of t^3 - t.
double tie_term(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double total = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double t = static_cast<double>(j - i);
    total += t * t * t - t;
    i = j;
  }
  return total;
}

double factorial(std::size_t n) {
  double f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

constexpr double kRelTie = 1e-9;

}  // namespace

std::string design_name(StudyDesign design) {
  switch (design) {
    case StudyDesign::between: return "between";
    case StudyDesign::within: return "within";
    case StudyDesign::mixed: return "mixed";
    case StudyDesign::any: return "any";
  }
  return "any";
}

StudyDesign parse_design(std::string_view name) {
  if (name == "between") return StudyDesign::between;
  if (name == "within") return StudyDesign::within;
  if (name == "mixed") return StudyDesign::mixed;
  throw ValidationError("unknown design '" + std::string(name) + "' (between, within, mixed)");
}

const std::vector<TestInfo>& test_registry() {
  using D = StudyDesign;
  static const std::vector<TestInfo> registry = {
      {"signed-rank", "Wilcoxon Signed Rank test", "Pairwise", {D::within}, {true, false, false}, true},
      {"rank-sum", "Wilcoxon Rank Sum test", "Pairwise", {D::between}, {false, false, false}, true},
      {"art-contrasts", "ART-Contrasts", "Pairwise", {D::mixed}, {true, false, false}, false},
      {"dunn", "Dunn test", "Pairwise", {D::between}, {false, false, false}, false},
      {"conover", "Conover test", "Pairwise", {D::between, D::within}, {false, false, false}, false},
      {"chi-squared", "Chi-squared test", "Pairwise", {D::between}, {false, false, false}, false},
      {"nemenyi", "Nemenyi test", "Pairwise", {D::within}, {false, false, false}, false},
      {"games-howell", "Games-Howell test", "Pairwise", {D::between}, {false, false, false}, false},
      {"kolmogorov-smirnov", "Kolmogorov-Smirnov test", "Pairwise", {D::between}, {false, false, false}, false},
      {"kruskal-wallis", "Kruskal-Wallis test", "Omnibus", {D::between}, {false, false, false}, true},
      {"art-anova", "ART-ANOVA", "Omnibus", {D::mixed}, {true, false, false}, false},
      {"friedman", "Friedman test", "Omnibus", {D::within}, {false, false, false}, true},
      {"quade", "Quade test", "Omnibus", {D::within}, {true, false, false}, false},
      {"anova", "One-way ANOVA", "Parametric", {D::between}, {true, true, true}, true},
  };
  return registry;
}

const TestInfo& registry_entry(std::string_view name) {
  for (const auto& t : test_registry()) {
    if (t.id == name || t.name == name) return t;
  }
  throw ValidationError("unknown test '" + std::string(name) + "'");
}

StudyDesign resolve_design(const TestInfo& info, std::optional<StudyDesign> declared) {
  if (declared) {
    if (std::find(info.designs.begin(), info.designs.end(), *declared) == info.designs.end()) {
      throw ValidationError(info.name + " does not apply to a " + design_name(*declared) +
                            "-subject design");
    }
    return *declared;
  }
  if (info.designs.size() != 1) {
    throw ValidationError(info.name + " applies to several designs; declare one (between or within)");
  }
  return info.designs.front();
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

TestResult oneway_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw ValidationError("ANOVA needs at least 2 groups");
  double total = 0;
  std::size_t n = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) {
      throw ValidationError("ANOVA group " + std::to_string(g + 1) + " has fewer than 2 observations");
    }
    for (double x : groups[g]) total += x;
    n += groups[g].size();
  }
  const double grand = total / static_cast<double>(n);
  double ssb = 0, ssw = 0;
  for (const auto& g : groups) {
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double x : g) ssw += (x - mean) * (x - mean);
  }
  const double df1 = static_cast<double>(groups.size() - 1);
  const double df2 = static_cast<double>(n - groups.size());
  TestResult r = make_result("anova");
  r.df = {df1, df2};
  if (ssw <= 0) {
    r.statistic = ssb > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.p = ssb > 0 ? 0.0 : 1.0;
    return r;
  }
  r.statistic = (ssb / df1) / (ssw / df2);
  r.p = r.statistic > 0
            ? boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), r.statistic))
            : 1.0;
  return r;
}

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups,
                          const ExactOptions& options) {
  if (groups.size() < 2) throw ValidationError("Kruskal-Wallis needs at least 2 groups");
  std::vector<double> pooled;
  std::vector<std::size_t> sizes;
  for (const auto& g : groups) {
    if (g.empty()) throw ValidationError("Kruskal-Wallis groups must be non-empty");
    pooled.insert(pooled.end(), g.begin(), g.end());
    sizes.push_back(g.size());
  }
  const double n = static_cast<double>(pooled.size());
  const auto ranks = midranks(pooled);
  const double correction = 1.0 - tie_term(pooled) / (n * n * n - n);
  TestResult r = make_result("kruskal-wallis");
  r.df = {static_cast<double>(groups.size() - 1)};
  if (!(correction > 1e-12)) return r;  // all observations tied

  auto spread = [&](const std::vector<double>& rank_sums) {
    double s = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
      s += rank_sums[g] * rank_sums[g] / static_cast<double>(sizes[g]);
    }
    return s;
  };
  std::vector<double> sums(groups.size(), 0.0);
  for (std::size_t g = 0, i = 0; g < groups.size(); ++g) {
    for (std::size_t j = 0; j < sizes[g]; ++j, ++i) sums[g] += ranks[i];
  }
  const double observed = spread(sums);
  r.statistic = std::max(0.0, (12.0 / (n * (n + 1)) * observed - 3.0 * (n + 1)) / correction);

  double assignments = factorial(pooled.size());
  for (auto s : sizes) assignments /= factorial(s);
  if (assignments <= options.max_permutations) {
    // all distinct assignments of the pooled ranks to groups of the given sizes
    std::vector<std::size_t> left = sizes;
    std::vector<double> acc(groups.size(), 0.0);
    double hits = 0, count = 0;
    const double threshold = observed * (1 - kRelTie);
    std::function<void(std::size_t)> place = [&](std::size_t i) {
      if (i == ranks.size()) {
        count += 1;
        if (spread(acc) >= threshold) hits += 1;
        return;
      }
      for (std::size_t g = 0; g < sizes.size(); ++g) {
        if (left[g] == 0) continue;
        --left[g];
        acc[g] += ranks[i];
        place(i + 1);
        acc[g] -= ranks[i];
        ++left[g];
      }
    };
    place(0);
    r.p = hits / count;
    r.exact = true;
  } else {
    r.p = chi_square_upper(r.statistic, r.df[0]);
  }
  return r;
}

TestResult friedman(const std::vector<std::vector<double>>& blocks,
                    const std::vector<std::string>& subjects, const ExactOptions& options) {
  if (blocks.empty()) throw ValidationError("Friedman test needs at least one block");
  const std::size_t k = blocks.front().size();
  if (k < 3) throw ValidationError("Friedman test needs at least 3 conditions");
  auto subject = [&](std::size_t i) {
    return i < subjects.size() ? subjects[i] : std::to_string(i + 1);
  };
  std::vector<std::vector<double>> ranks;
  double ties = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const bool complete =
        b.size() == k && std::none_of(b.begin(), b.end(), [](double x) { return std::isnan(x); });
    if (!complete) throw ValidationError("incomplete block for subject " + subject(i));
    ranks.push_back(midranks(b));
    ties += tie_term(b);
  }
  const double n = static_cast<double>(blocks.size());
  const double kd = static_cast<double>(k);
  auto sum_squares = [&](const std::vector<double>& col) {
    double s = 0;
    for (double v : col) s += v * v;
    return s;
  };
  std::vector<double> columns(k, 0.0);
  for (const auto& r : ranks) {
    for (std::size_t j = 0; j < k; ++j) columns[j] += r[j];
  }
  const double denom = n * kd * (kd + 1) - ties / (kd - 1);
  TestResult out = make_result("friedman");
  out.df = {kd - 1};
  if (!(denom > 1e-9)) return out;  // every block constant
  const double centre = n * (kd + 1) / 2;
  // 12 sum (R_j - n(k+1)/2)^2 / denom, written through sum R_j^2
  auto statistic = [&](const std::vector<double>& col) {
    return 12.0 * (sum_squares(col) - kd * centre * centre) / denom;
  };
  const double observed = sum_squares(columns);
  out.statistic = std::max(0.0, statistic(columns));

  const double perms = std::pow(factorial(k), n);
  if (perms <= options.max_permutations) {
    std::vector<double> acc(k, 0.0);
    double hits = 0, count = 0;
    const double threshold = observed * (1 - kRelTie);
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
      if (i == ranks.size()) {
        count += 1;
        if (sum_squares(acc) >= threshold) hits += 1;
        return;
      }
      std::vector<std::size_t> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        for (std::size_t j = 0; j < k; ++j) acc[j] += ranks[i][perm[j]];
        visit(i + 1);
        for (std::size_t j = 0; j < k; ++j) acc[j] -= ranks[i][perm[j]];
      } while (std::next_permutation(perm.begin(), perm.end()));
    };
    visit(0);
    out.p = hits / count;
    out.exact = true;
  } else {
    out.p = chi_square_upper(out.statistic, out.df[0]);
  }
  return out;
}

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                const ExactOptions& options) {
  if (a.size() != b.size() || a.empty()) {
    throw ValidationError("signed-rank test needs paired samples of equal, non-zero length");
  }
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (diff != 0) d.push_back(diff);
  }
  TestResult r = make_result("signed-rank");
  if (d.empty()) {
    r.warnings.push_back("all paired differences are zero; the test is degenerate");
    return r;
  }
  std::vector<double> magnitude(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) magnitude[i] = std::abs(d[i]);
  const auto ranks = midranks(magnitude);
  double w = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0) w += ranks[i];
  }
  r.statistic = w;
  const std::size_t n = d.size();
  const double nd = static_cast<double>(n);
  if (n <= options.signed_rank_max_n) {
    // distribution of twice the positive-rank sum over all sign patterns
    std::vector<long> doubled(n);
    long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = std::lround(2 * ranks[i]);
      total += doubled[i];
    }
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1;
    long reach = 0;
    for (long v : doubled) {
      for (long s = reach; s >= 0; --s) counts[static_cast<std::size_t>(s + v)] += counts[static_cast<std::size_t>(s)];
      reach += v;
    }
    const long obs = std::lround(2 * w);
    double lower = 0, upper = 0, all = 0;
    for (long s = 0; s <= total; ++s) {
      const double c = counts[static_cast<std::size_t>(s)];
      all += c;
      if (s <= obs) lower += c;
      if (s >= obs) upper += c;
    }
    r.p = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    r.exact = true;
  } else {
    const double mean = nd * (nd + 1) / 4;
    const double var = nd * (nd + 1) * (2 * nd + 1) / 24 - tie_term(magnitude) / 48;
    const double centred = w - mean;
    const double corrected = centred - (centred > 0 ? 0.5 : centred < 0 ? -0.5 : 0.0);
    r.p = var > 0 ? std::min(1.0, two_sided_normal_p(corrected / std::sqrt(var))) : 1.0;
  }
  return r;
}

double rank_sum_null_variance(std::span<const double> a, std::span<const double> b,
                              bool tie_correction) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double n = na + nb;
  const double ties = tie_correction ? tie_term(pooled) / (n * (n - 1)) : 0.0;
  return na * nb / 12.0 * ((n + 1) - ties);
}

TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                             const ExactOptions& options) {
  if (a.empty() || b.empty()) throw ValidationError("rank-sum test needs two non-empty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  double ra = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ra += ranks[i];
  const std::size_t na = a.size(), nb = b.size();
  const double u = ra - static_cast<double>(na * (na + 1)) / 2;
  TestResult r = make_result("rank-sum");
  r.statistic = u;
  const bool ties = tie_term(pooled) > 0;
  if (std::min(na, nb) <= options.rank_sum_max_min && !ties) {
    // counts[j][s]: subsets of size j of {1..m} with U contribution s
    const std::size_t umax = na * nb;
    std::vector<std::vector<double>> counts(na + 1, std::vector<double>(umax + 1, 0.0));
    counts[0][0] = 1;
    for (std::size_t m = 1; m <= na + nb; ++m) {
      for (std::size_t j = std::min(m, na); j >= 1; --j) {
        // element m in the subset adds (m - j) smaller non-members
        const std::size_t add = m - j;
        if (add > nb) continue;
        for (std::size_t s = umax; s + 1 > add; --s) counts[j][s] += counts[j - 1][s - add];
      }
    }
    const auto obs = static_cast<std::size_t>(std::lround(u));
    double lower = 0, upper = 0, all = 0;
    for (std::size_t s = 0; s <= umax; ++s) {
      all += counts[na][s];
      if (s <= obs) lower += counts[na][s];
      if (s >= obs) upper += counts[na][s];
    }
    r.p = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    r.exact = true;
  } else {
    const double mean = static_cast<double>(na * nb) / 2;
    const double var = rank_sum_null_variance(a, b, true);
    const double centred = u - mean;
    const double corrected = centred - (centred > 0 ? 0.5 : centred < 0 ? -0.5 : 0.0);
    r.p = var > 0 ? std::min(1.0, two_sided_normal_p(corrected / std::sqrt(var))) : 1.0;
  }
  return r;
}

}  // namespace ordreg
