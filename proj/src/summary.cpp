#include "ordreg/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ordreg {
namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double round_to(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

double round_significant(double x, int sig) {
  if (x == 0 || !std::isfinite(x)) return x;
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(x))));
  return round_to(x, sig - 1 - exponent);
}

/// Decimals needed to show `x` with up to `digits` significant digits,
/// dropping trailing zeros.
int needed_decimals(double x, int digits) {
  if (x == 0 || !std::isfinite(x)) return 0;
  const double target = round_significant(x, digits);
  int sig = digits;
  while (sig > 1 &&
         std::abs(round_significant(x, sig - 1) - target) <= 1e-12 * std::abs(target)) {
    --sig;
  }
  const double shown = round_significant(x, sig);
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(shown))));
  return std::max(0, sig - 1 - exponent);
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

/// Display width counting UTF-8 code points.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

struct Table {
  std::vector<std::string> headers;
  std::vector<std::string> row_names;
  std::vector<std::vector<std::string>> columns;
  std::vector<bool> right;
};

/// Character matrix print: row names left-aligned, one space between
/// columns, each column as wide as its widest cell.
std::string print_table(const Table& t, const std::string& lead = "") {
  std::size_t name_width = 0;
  for (const auto& n : t.row_names) name_width = std::max(name_width, display_width(n));
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    std::size_t w = display_width(t.headers[c]);
    for (const auto& cell : t.columns[c]) w = std::max(w, display_width(cell));
    widths.push_back(w);
  }
  auto cell = [&](const std::string& s, std::size_t c) {
    return t.right[c] ? pad_left(s, widths[c]) : pad_right(s, widths[c]);
  };
  std::ostringstream out;
  out << lead << std::string(name_width, ' ');
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << ' ' << cell(t.headers[c], c);
  out << '\n';
  for (std::size_t r = 0; r < t.row_names.size(); ++r) {
    out << lead << pad_right(t.row_names[r], name_width);
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << ' ' << cell(t.columns[c][r], c);
    out << '\n';
  }
  return out.str();
}

std::string coefficient_table(const std::vector<WaldRow>& rows, bool with_p) {
  Table t;
  std::vector<double> est, z, p;
  for (const auto& r : rows) {
    t.row_names.push_back(r.name);
    est.push_back(r.estimate);
    est.push_back(r.std_error);
    z.push_back(round_to(r.z, 3));
    p.push_back(r.p);
  }
  const auto joint = format_estimates(est, 4);
  std::vector<std::string> e, s;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    e.push_back(joint[2 * i]);
    s.push_back(joint[2 * i + 1]);
  }
  t.headers = {"Estimate", "Std. Error", "z value"};
  t.columns = {e, s, format_column(z, 4)};
  t.right = {true, true, true};
  bool stars = false;
  if (with_p) {
    t.headers.push_back("Pr(>|z|)");
    t.columns.push_back(format_p_values(p, 3));
    t.right.push_back(true);
    stars = std::any_of(p.begin(), p.end(), [](double v) { return v < 0.1; });
    if (stars) {
      std::vector<std::string> marks;
      std::size_t w = 0;
      for (double v : p) {
        marks.push_back(significance_stars(v));
        w = std::max(w, marks.back().size());
      }
      for (auto& m : marks) m = pad_right(m, w);
      t.headers.push_back("");
      t.columns.push_back(marks);
      t.right.push_back(false);
    }
  }
  std::string out = print_table(t);
  if (stars) {
    out += "---\nSignif. codes:  0 ‘***’ 0.001 ‘**’ 0.01 ‘*’ 0.05 "
           "‘.’ 0.1 ‘ ’ 1\n";
  }
  return out;
}

SummaryHeader header_for(const FittedClm& f) {
  SummaryHeader h;
  h.link = f.spec.link.name();
  h.nobs = f.n_obs;
  h.log_lik = f.log_lik;
  h.aic = f.aic;
  h.max_grad = f.convergence.max_abs_gradient;
  h.cond_h = f.convergence.condition_number;
  return h;
}

void split_rows(const FittedClm& f, ModelSummary& s) {
  const auto rows = wald_table(f);
  const auto& L = f.layout;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (j < L.thresholds) {
      s.thresholds.push_back(rows[j]);
    } else if (j < L.scale_offset()) {
      s.coefficients.push_back(rows[j]);
    } else if (j < L.nominal_offset()) {
      WaldRow r = rows[j];
      r.name = r.name.substr(std::string("scale.").size());
      s.scale_coefficients.push_back(r);
    } else {
      s.thresholds.push_back(rows[j]);
    }
  }
}

}  // namespace

std::vector<std::string> format_column(std::span<const double> values, int digits) {
  int decimals = 0;
  for (double v : values) decimals = std::max(decimals, needed_decimals(v, digits));
  std::vector<std::string> out;
  for (double v : values) {
    if (std::isnan(v)) {
      out.push_back("NA");
    } else if (std::isinf(v)) {
      out.push_back(v > 0 ? "Inf" : "-Inf");
    } else {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*f", decimals, v == 0 ? 0.0 : v);
      out.push_back(buf);
    }
  }
  return out;
}

std::vector<std::string> format_estimates(std::span<const double> values, int digits) {
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isfinite(v) && v != 0) smallest = std::min(smallest, std::abs(v));
  }
  std::vector<double> rounded(values.begin(), values.end());
  if (std::isfinite(smallest)) {
    const int magnitude = 1 + static_cast<int>(std::floor(std::log10(smallest)));
    const int decimals = std::max(1, digits - magnitude);
    for (auto& v : rounded) {
      if (std::isfinite(v)) v = round_to(v, decimals);
    }
  }
  return format_column(rounded, digits);
}

std::vector<std::string> format_p_values(std::span<const double> p, int digits) {
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> shown;
  for (double v : p) {
    if (v >= eps) shown.push_back(v);
  }
  const auto fixed = format_column(shown, digits);
  std::vector<std::string> out;
  std::size_t next = 0;
  for (double v : p) {
    out.push_back(v >= eps ? fixed[next++] : "<2e-16");
  }
  return out;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return " ";
}

ModelSummary summarize(const FittedClm& fitted, const std::string& data_name) {
  ModelSummary s;
  s.formula = fitted.spec.formula().to_string();
  s.data_name = data_name;
  s.header = header_for(fitted);
  s.header.niter = std::to_string(fitted.convergence.iterations) + "(" +
                   std::to_string(fitted.convergence.step_halvings) + ")";
  split_rows(fitted, s);
  s.warnings = fitted.warnings;
  return s;
}

ModelSummary summarize(const FittedClmm& fitted, const std::string& data_name) {
  ModelSummary s;
  const auto& f = fitted.fixed;
  s.formula = f.spec.formula().to_string();
  s.data_name = data_name;
  s.mixed = true;
  s.header = header_for(f);
  s.header.niter = std::to_string(f.convergence.iterations) + "(" +
                   std::to_string(f.convergence.inner_iterations) + ")";
  s.random_effects.push_back({fitted.group, "(Intercept)", fitted.variance(), fitted.sigma});
  s.group_count = fitted.group_count;
  split_rows(f, s);
  s.warnings = f.warnings;
  return s;
}

std::string render(const ModelSummary& s) {
  std::ostringstream out;
  out << "formula: " << s.formula << '\n';
  out << "data:    " << s.data_name << '\n';
  out << '\n';
  {
    Table t;
    t.headers = {"link", "threshold", "nobs", "logLik", "AIC", "niter", "max.grad", "cond.H"};
    const auto& h = s.header;
    const std::vector<std::string> values = {
        h.link, h.threshold, std::to_string(h.nobs), fmt("%.2f", h.log_lik), fmt("%.2f", h.aic),
        h.niter, fmt("%.2e", h.max_grad), fmt("%.1e", h.cond_h)};
    t.row_names = {""};
    for (const auto& v : values) t.columns.push_back({v});
    t.right.assign(values.size(), false);
    std::string block = print_table(t);
    if (!s.mixed) {
      // clm prints without the empty row-name column
      std::string trimmed;
      std::istringstream lines(block);
      for (std::string line; std::getline(lines, line);) trimmed += line.substr(1) + '\n';
      block = trimmed;
    }
    out << block;
  }
  if (s.mixed) {
    out << '\n' << "Random effects:\n";
    Table t;
    t.headers = {"Groups", "Name", "Variance", "Std.Dev."};
    t.row_names.assign(s.random_effects.size(), "");
    t.columns.resize(4);
    for (const auto& r : s.random_effects) {
      t.columns[0].push_back(r.group);
      t.columns[1].push_back(r.name);
      const double v[] = {r.variance};
      const double d[] = {r.std_dev};
      t.columns[2].push_back(format_column(v, 4)[0]);
      t.columns[3].push_back(format_column(d, 4)[0]);
    }
    t.right.assign(4, false);
    out << print_table(t);
    if (!s.random_effects.empty()) {
      out << "Number of groups:  " << s.random_effects.front().group << ' ' << s.group_count
          << " \n";
    }
  }
  if (!s.coefficients.empty()) {
    out << '\n' << "Coefficients:\n" << coefficient_table(s.coefficients, true);
  }
  if (!s.scale_coefficients.empty()) {
    out << '\n' << "log-scale coefficients:\n" << coefficient_table(s.scale_coefficients, true);
  }
  out << '\n' << "Threshold coefficients:\n" << coefficient_table(s.thresholds, false);
  for (const auto& w : s.warnings) out << "warning: " << w << '\n';
  return out.str();
}

}  // namespace ordreg
