#include "ordreg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ordreg/archive.hpp"
#include "ordreg/baselines.hpp"
#include "ordreg/clm.hpp"
#include "ordreg/clmm.hpp"
#include "ordreg/csv.hpp"
#include "ordreg/errors.hpp"
#include "ordreg/formula.hpp"
#include "ordreg/inference.hpp"
#include "ordreg/serve.hpp"
#include "ordreg/simulate.hpp"
#include "ordreg/summary.hpp"

namespace ordreg::cli {
namespace {

using nlohmann::json;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

char parse_delimiter(const std::string& text) {
  if (text == "tab" || text == "\\t") return '\t';
  if (text.size() != 1) throw ValidationError("--delim must be a single character or 'tab'");
  return text[0];
}

json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

void write_json(const std::string& path, const json& j, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write '" + path + "'");
  file << text;
}

/// Options shared by every command that fits a model.
struct ModelArgs {
  std::string data;
  std::string formula;
  std::string link = "probit";
  std::vector<std::string> refs;
  std::string scale;
  std::string nominal;
  int agq = 1;
  std::string levels;
  std::vector<std::string> numeric;
  std::vector<std::string> factor_levels;
  std::string delim = ",";

  void attach(CLI::App* cmd) {
    cmd->add_option("data", data, "Long-format CSV file")->required();
    cmd->add_option("formula", formula, "e.g. 'Usefulness ~ 1 + Condition'")->required();
    cmd->add_option("--link", link, "probit, logit or cloglog")->capture_default_str();
    cmd->add_option("--ref", refs, "Reference level, FACTOR=LEVEL (or LEVEL for the first factor)");
    cmd->add_option("--scale", scale, "Scale terms, e.g. 'Condition'");
    cmd->add_option("--nominal", nominal, "Nominal (threshold-varying) terms");
    cmd->add_option("--agq", agq, "Quadrature nodes for mixed models (1 = Laplace)")
        ->capture_default_str();
    cmd->add_option("--levels", levels, "Ordered response labels, comma separated");
    cmd->add_option("--numeric", numeric, "Predictors read as numbers")->delimiter(',');
    cmd->add_option("--factor-levels", factor_levels, "Level order, FACTOR=L1,L2,...");
    cmd->add_option("--delim", delim, "Field delimiter")->capture_default_str();
  }
};

struct LoadedModel {
  ModelSpec spec;
  Dataset data;
  std::string data_name;
};

LoadedModel load_model(const ModelArgs& a, std::ostream& err) {
  const FormulaSpec formula = parse_formula(a.formula);
  ModelSpec spec = ModelSpec::from_formula(formula, Link::parse(a.link), parse_term_list(a.scale),
                                           parse_term_list(a.nominal));
  CsvOptions options;
  options.response_column = spec.response;
  options.delimiter = parse_delimiter(a.delim);
  if (!a.levels.empty()) options.levels = split(a.levels, ',');
  options.group_column = spec.group;
  const std::set<std::string> numeric(a.numeric.begin(), a.numeric.end());
  std::set<std::string> seen;
  for (const auto* terms : {&spec.location, &spec.scale, &spec.nominal}) {
    for (const auto& t : *terms) {
      if (!seen.insert(t).second) continue;
      (numeric.count(t) ? options.numeric_columns : options.factor_columns).push_back(t);
    }
  }
  for (const auto& entry : a.factor_levels) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("--factor-levels expects FACTOR=L1,L2,... (got '" + entry + "')");
    }
    options.factor_levels[entry.substr(0, eq)] = split(entry.substr(eq + 1), ',');
  }
  LoadedDataset loaded = load_csv(std::filesystem::path(a.data), options);
  for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
  Dataset data = std::move(loaded.data);
  for (const auto& ref : a.refs) {
    const auto eq = ref.find('=');
    if (eq != std::string::npos) {
      data = data.relevel(ref.substr(0, eq), ref.substr(eq + 1));
    } else if (!options.factor_columns.empty()) {
      data = data.relevel(options.factor_columns.front(), ref);
    } else {
      throw ValidationError("--ref " + ref + ": the model has no factor");
    }
  }
  return {std::move(spec), std::move(data), std::filesystem::path(a.data).stem().string()};
}

ModelArchive fit_any(const LoadedModel& m, int nodes) {
  if (m.spec.group) {
    ClmmOptions options;
    options.nodes = nodes;
    return fit_clmm(m.spec, m.data, options);
  }
  return fit_clm(m.spec, m.data);
}

std::string first_factor(const FittedClm& f) {
  for (const auto& t : f.location_terms) {
    if (t.kind == TermKind::factor) return t.term;
  }
  throw ValidationError("the model has no location factor");
}

int cmd_fit(const ModelArgs& a, const std::string& json_path, std::ostream& out,
            std::ostream& err) {
  const LoadedModel m = load_model(a, err);
  const ModelArchive fitted = fit_any(m, a.agq);
  const ModelSummary summary = std::visit(
      [&](const auto& f) { return summarize(f, m.data_name); }, fitted);
  out << render(summary);
  out << "\nordreg " << kVersion << '\n';
  if (!json_path.empty()) {
    if (json_path == "-") {
      out << serialize_archive(fitted);
    } else {
      save_archive(json_path, fitted);
    }
  }
  return 0;
}

int cmd_contrast(const ModelArgs& a, std::string factor, const std::string& adjust,
                 const std::string& json_path, std::ostream& out, std::ostream& err) {
  const LoadedModel m = load_model(a, err);
  const ModelArchive fitted = fit_any(m, a.agq);
  const FittedClm& f = fixed_part(fitted);
  if (factor.empty()) factor = first_factor(f);
  const Adjustment adjustment = parse_adjustment(adjust);
  const auto rows = pairwise_contrasts(f, factor, adjustment);

  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.level_a.size() + r.level_b.size() + 3);
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %10s %10s %8s %9s %9s\n", static_cast<int>(width),
                "contrast", "estimate", "SE", "z", "p", "p.adj");
  out << "Pairwise latent contrasts for " << factor << " (" << f.spec.link.name()
      << " link, " << adjustment_name(adjustment) << " adjustment)\n"
      << line;
  json items = json::array();
  for (const auto& r : rows) {
    const std::string name = r.level_a + " - " + r.level_b;
    std::snprintf(line, sizeof line, "%-*s %10.5f %10.5f %8.3f %9.4g %9.4g\n",
                  static_cast<int>(width), name.c_str(), r.estimate, r.std_error, r.z, r.p_raw,
                  r.p_adjusted);
    out << line;
    items.push_back({{"level_a", r.level_a},
                     {"level_b", r.level_b},
                     {"estimate", json_number(r.estimate)},
                     {"std_error", json_number(r.std_error)},
                     {"z", json_number(r.z)},
                     {"p", json_number(r.p_raw)},
                     {"p_adjusted", json_number(r.p_adjusted)}});
  }
  if (!json_path.empty()) {
    write_json(json_path,
               {{"format_version", 1},
                {"factor", factor},
                {"link", f.spec.link.name()},
                {"adjustment", adjustment_name(adjustment)},
                {"contrasts", items}},
               out);
  }
  return 0;
}

int cmd_brant(const ModelArgs& a, const std::string& json_path, std::ostream& out,
              std::ostream& err) {
  const LoadedModel m = load_model(a, err);
  if (m.spec.group) throw ValidationError("brant: random terms are not supported");
  const FittedClm f = fit_clm(m.spec, m.data);
  const BrantResult r = brant_test(f, m.data);
  std::size_t width = 8;
  for (const auto& c : r.columns) width = std::max(width, c.column.size());
  char line[256];
  out << "Brant test of proportional odds (" << f.spec.link.name() << " link)\n";
  std::snprintf(line, sizeof line, "%-*s %10s %4s %10s\n", static_cast<int>(width), "term", "X2",
                "df", "p");
  out << line;
  json items = json::array();
  auto row = [&](const std::string& name, const TestStatistic& t) {
    std::snprintf(line, sizeof line, "%-*s %10.4f %4.0f %10.4g\n", static_cast<int>(width),
                  name.c_str(), t.statistic, t.df, t.p);
    out << line;
    items.push_back({{"term", name},
                     {"statistic", json_number(t.statistic)},
                     {"df", t.df},
                     {"p", json_number(t.p)}});
  };
  row("Omnibus", r.omnibus);
  for (const auto& c : r.columns) row(c.column, c.test);
  if (!json_path.empty()) {
    write_json(json_path, {{"format_version", 1}, {"tests", items}}, out);
  }
  return 0;
}

struct BootArgs {
  std::string factor;
  std::vector<std::string> pairs;
  std::size_t replicates = 2000;
  std::uint64_t seed = 1;
  double level = 0.95;
  unsigned threads = 1;
  std::vector<double> scores;
};

int cmd_boot(const ModelArgs& a, const BootArgs& b, const std::string& json_path,
             std::ostream& out, std::ostream& err) {
  const LoadedModel m = load_model(a, err);
  if (m.spec.group) throw ValidationError("boot-ci: random terms are not supported");
  std::string factor = b.factor;
  const FactorColumn* column = nullptr;
  if (factor.empty()) {
    for (const auto& t : m.spec.location) {
      if ((column = m.data.find_factor(t))) break;
    }
    if (!column) throw ValidationError("boot-ci: the model has no location factor");
    factor = column->factor.name();
  } else if (!(column = m.data.find_factor(factor))) {
    throw ValidationError("boot-ci: unknown factor '" + factor + "'");
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& p : b.pairs) {
    const auto parts = split(p, ',');
    if (parts.size() != 2) throw ValidationError("--pair expects A,B (got '" + p + "')");
    pairs.emplace_back(parts[0], parts[1]);
  }
  if (pairs.empty()) {
    const auto& levels = column->factor.levels();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      for (std::size_t j = i + 1; j < levels.size(); ++j) pairs.emplace_back(levels[j], levels[i]);
    }
  }
  BootstrapOptions options;
  options.replicates = b.replicates;
  options.seed = b.seed;
  options.level = b.level;
  options.threads = b.threads;
  options.scores = b.scores;
  const auto cis = bootstrap_response_scale_ci(m.spec, m.data, factor, pairs, options);
  out << "Bootstrap " << fmt("%g", 100 * b.level) << "% percentile intervals for expected-score "
      << "differences (B = " << b.replicates << ", seed = " << b.seed << ")\n";
  json items = json::array();
  for (const auto& c : cis) {
    out << c.level_a << " - " << c.level_b << ": " << fmt("%.4f", c.estimate) << " ["
        << fmt("%.4f", c.lower) << ", " << fmt("%.4f", c.upper) << "]";
    if (c.failures) out << " (" << c.failures << " failed replicates dropped)";
    out << '\n';
    items.push_back({{"level_a", c.level_a},
                     {"level_b", c.level_b},
                     {"estimate", json_number(c.estimate)},
                     {"lower", json_number(c.lower)},
                     {"upper", json_number(c.upper)},
                     {"level", c.level},
                     {"replicates", c.replicates},
                     {"failures", c.failures},
                     {"seed", c.seed}});
  }
  if (!json_path.empty()) {
    write_json(json_path, {{"format_version", 1}, {"factor", factor}, {"intervals", items}}, out);
  }
  return 0;
}

struct BaselineArgs {
  std::string data;
  std::string test;
  std::string response;
  std::string factor;
  std::string subject;
  std::string design;
  std::string input = "ordinal";
  std::string levels;
  std::vector<std::string> factor_levels;
  std::vector<std::string> pair;
  std::string delim = ",";
  bool list = false;
  ExactOptions exact;
};

void print_registry(std::ostream& out) {
  out << "id                   name                        designs        metric normal equal-var implemented\n";
  for (const auto& t : test_registry()) {
    std::string designs;
    for (auto d : t.designs) designs += (designs.empty() ? "" : "/") + design_name(d);
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %-27s %-14s %-6s %-6s %-9s %s\n", t.id.c_str(),
                  t.name.c_str(), designs.c_str(), t.flags.metric_data ? "yes" : "no",
                  t.flags.normality ? "yes" : "no", t.flags.equal_variance ? "yes" : "no",
                  t.implemented ? "yes" : "no");
    out << line;
  }
}

int cmd_baseline(const BaselineArgs& a, const std::string& json_path, std::ostream& out) {
  if (a.list) {
    print_registry(out);
    return 0;
  }
  if (a.data.empty() || a.test.empty() || a.response.empty() || a.factor.empty()) {
    throw ValidationError("baseline needs DATA, --test, --response and --factor (or --list)");
  }
  const TestInfo& info = registry_entry(a.test);
  if (!info.implemented) {
    throw ValidationError(info.name + " is listed in the registry but not implemented");
  }
  if (a.input != "ordinal" && a.input != "metric") {
    throw ValidationError("--input must be 'ordinal' or 'metric'");
  }
  const bool ordinal = a.input == "ordinal";
  std::optional<StudyDesign> declared;
  if (!a.design.empty()) declared = parse_design(a.design);
  const StudyDesign design = resolve_design(info, declared);

  CsvOptions options;
  options.response_column = a.response;
  options.delimiter = parse_delimiter(a.delim);
  options.factor_columns = {a.factor};
  if (!a.levels.empty()) options.levels = split(a.levels, ',');
  if (!a.subject.empty()) options.group_column = a.subject;
  for (const auto& entry : a.factor_levels) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ValidationError("--factor-levels expects FACTOR=L1,L2,...");
    options.factor_levels[entry.substr(0, eq)] = split(entry.substr(eq + 1), ',');
  }
  const LoadedDataset loaded = load_csv(std::filesystem::path(a.data), options);
  const Dataset& data = loaded.data;
  std::vector<double> values(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const std::size_t k = data.responses()[i];
    if (ordinal) {
      values[i] = static_cast<double>(k + 1);
    } else {
      const std::string& label = data.scale().label(k);
      char* end = nullptr;
      values[i] = std::strtod(label.c_str(), &end);
      if (end == label.c_str() || *end != '\0') {
        throw ValidationError("--input metric: response '" + label + "' is not a number");
      }
    }
  }
  const FactorColumn& cond = *data.find_factor(a.factor);
  const auto& levels = cond.factor.levels();

  auto pick_pair = [&]() -> std::pair<std::size_t, std::size_t> {
    if (a.pair.size() == 2) return {cond.factor.index_of(a.pair[0]), cond.factor.index_of(a.pair[1])};
    if (!a.pair.empty()) throw ValidationError("--pair expects exactly two levels");
    if (levels.size() != 2) {
      throw ValidationError(info.name + " compares two conditions; choose them with --pair A,B");
    }
    return {0, 1};
  };
  auto by_subject = [&](std::size_t n_conditions) {
    if (!data.group()) throw ValidationError(info.name + " needs --subject for paired data");
    const auto& g = *data.group();
    std::vector<std::vector<double>> blocks(
        g.factor.size(), std::vector<double>(n_conditions, std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t i = 0; i < data.rows(); ++i) {
      double& cell = blocks[g.codes[i]][cond.codes[i]];
      if (!std::isnan(cell)) {
        throw ValidationError("subject " + g.factor.levels()[g.codes[i]] +
                              " has several rows for condition " + levels[cond.codes[i]]);
      }
      cell = values[i];
    }
    return blocks;
  };

  TestResult result;
  if (info.id == "anova" || info.id == "kruskal-wallis") {
    std::vector<std::vector<double>> groups(levels.size());
    for (std::size_t i = 0; i < data.rows(); ++i) groups[cond.codes[i]].push_back(values[i]);
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    result = info.id == "anova" ? oneway_anova(groups) : kruskal_wallis(groups, a.exact);
  } else if (info.id == "friedman") {
    result = friedman(by_subject(levels.size()), data.group()->factor.levels(), a.exact);
  } else if (info.id == "rank-sum") {
    const auto [x, y] = pick_pair();
    std::vector<double> va, vb;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (cond.codes[i] == x) va.push_back(values[i]);
      if (cond.codes[i] == y) vb.push_back(values[i]);
    }
    result = wilcoxon_rank_sum(va, vb, a.exact);
  } else if (info.id == "signed-rank") {
    const auto [x, y] = pick_pair();
    const auto blocks = by_subject(levels.size());
    std::vector<double> va, vb;
    for (const auto& b : blocks) {
      if (std::isnan(b[x]) && std::isnan(b[y])) continue;
      if (std::isnan(b[x]) || std::isnan(b[y])) throw ValidationError("unpaired subject in signed-rank input");
      va.push_back(b[x]);
      vb.push_back(b[y]);
    }
    result = wilcoxon_signed_rank(va, vb, a.exact);
  } else {
    throw ValidationError("no runner for " + info.name);
  }
  result.design = design;

  out << "test:      " << info.name << '\n';
  out << "design:    " << design_name(design) << '\n';
  out << "statistic: " << fmt("%.6g", result.statistic) << '\n';
  if (!result.df.empty()) {
    out << "df:       ";
    for (double d : result.df) out << ' ' << fmt("%g", d);
    out << '\n';
  }
  out << "p-value:   " << fmt("%.6g", result.p) << (result.exact ? " (exact)" : " (asymptotic)")
      << '\n';
  std::vector<std::string> warnings = result.warnings;
  if (result.flags.metric_data && ordinal) {
    warnings.push_back("assumption warning: " + info.name +
                       " treats the responses as metric (equal spacing between categories), "
                       "but the input was declared ordinal");
  }
  for (const auto& w : warnings) out << w << '\n';
  if (!json_path.empty()) {
    write_json(json_path,
               {{"format_version", 1},
                {"test", result.test},
                {"name", info.name},
                {"design", design_name(design)},
                {"statistic", json_number(result.statistic)},
                {"df", result.df},
                {"p", json_number(result.p)},
                {"exact", result.exact},
                {"assumptions",
                 {{"metric_data", result.flags.metric_data},
                  {"normality", result.flags.normality},
                  {"equal_variance", result.flags.equal_variance}}},
                {"warnings", warnings}},
               out);
  }
  return 0;
}

struct SimulateArgs {
  std::vector<double> tau;
  std::vector<double> props;
  std::vector<std::string> conditions{"A"};
  std::vector<double> beta;
  double sigma_b = 0;
  std::size_t groups = 2;
  std::size_t reps = 1;
  std::string link = "probit";
  std::uint64_t seed = 1;
  std::string response = "response";
  std::string condition_name = "condition";
  std::string group_name = "participant_id";
  std::string output;
  std::string delim = ",";
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const Link link = Link::parse(a.link);
  HierarchicalDesign d;
  if (!a.tau.empty() == !a.props.empty()) throw ValidationError("simulate needs exactly one of --tau and --props");
  d.tau = a.tau.empty() ? cutpoints_from_proportions(a.props, link) : a.tau;
  d.conditions = a.conditions;
  d.beta = a.beta.empty() ? std::vector<double>(a.conditions.size(), 0.0) : a.beta;
  if (d.beta.size() != d.conditions.size()) {
    throw ValidationError("--beta needs one value per condition (" +
                          std::to_string(d.conditions.size()) + ")");
  }
  d.sigma_b = a.sigma_b;
  d.groups = a.groups;
  d.reps_per_cell = a.reps;
  d.link = link;
  d.condition_name = a.condition_name;
  d.group_name = a.group_name;
  const Dataset data = simulate_hierarchical(d, a.seed);
  const char delim = parse_delimiter(a.delim);
  if (a.output.empty() || a.output == "-") {
    write_csv(out, data, a.response, delim);
  } else {
    std::ofstream file(a.output, std::ios::binary);
    if (!file) throw ValidationError("cannot write '" + a.output + "'");
    write_csv(file, data, a.response, delim);
  }
  return 0;
}

int cmd_cutpoints(const std::vector<double>& props, const std::string& link_name,
                  const std::string& json_path, std::ostream& out) {
  const Link link = Link::parse(link_name);
  const auto tau = cutpoints_from_proportions(props, link);
  for (std::size_t k = 0; k < tau.size(); ++k) {
    out << (k + 1) << '|' << (k + 2) << ' ' << fmt("%.6f", tau[k]) << '\n';
  }
  if (!json_path.empty()) {
    write_json(json_path, {{"format_version", 1}, {"link", link.name()}, {"tau", tau}}, out);
  }
  return 0;
}

int cmd_report(const std::string& path, const std::string& term, const std::string& response,
               std::ostream& out) {
  const ModelArchive archive = load_archive(path);
  InterpretationContext context;
  if (!response.empty()) context.response = response;
  const Interpretation it = interpret_coefficient(fixed_part(archive), term, context);
  out << it.text << '\n';
  return 0;
}

serve::Server* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& bind, int port, const std::string& model_path,
              const std::string& static_dir, std::ostream& out) {
  serve::ServerOptions options;
  options.bind = bind;
  options.port = port;
  if (!model_path.empty()) {
    // re-serialize so the endpoint always returns canonical archive text
    options.archive_text = serialize_archive(load_archive(model_path));
  }
  if (!static_dir.empty()) options.static_dir = static_dir;
  serve::Server server(options);
  const int bound = server.bind();
  out << "serving on http://" << bind << ':' << bound << '\n' << std::flush;
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ordinal regression with cumulative link models"};
  app.name("ordreg");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string json_path;

  ModelArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a cumulative link (mixed) model and print its summary");
  fit_args.attach(fit);
  fit->add_option("--json", json_path, "Write the model archive here ('-' for stdout)");

  ModelArgs con_args;
  std::string con_factor, adjust = "holm";
  auto* con = app.add_subcommand("contrast", "Pairwise latent contrasts between factor levels");
  con_args.attach(con);
  con->add_option("--factor", con_factor, "Factor to contrast (default: first location factor)");
  con->add_option("--adjust", adjust, "none, bonferroni or holm")->capture_default_str();
  con->add_option("--json", json_path, "Write results as JSON");

  ModelArgs brant_args;
  auto* brant = app.add_subcommand("brant", "Brant test of the proportional-odds assumption");
  brant_args.attach(brant);
  brant->add_option("--json", json_path, "Write results as JSON");

  ModelArgs boot_args;
  BootArgs boot;
  auto* bootc = app.add_subcommand("boot-ci", "Bootstrap intervals for expected-score differences");
  boot_args.attach(bootc);
  bootc->add_option("--factor", boot.factor, "Factor whose levels are compared");
  bootc->add_option("--pair", boot.pairs, "Pair A,B (repeatable; default all pairs)");
  bootc->add_option("--B", boot.replicates, "Bootstrap replicates")->capture_default_str()->check(
      CLI::Range(std::size_t{100}, std::numeric_limits<std::size_t>::max()));
  bootc->add_option("--seed", boot.seed, "Random seed")->capture_default_str();
  bootc->add_option("--level", boot.level, "Interval level")->capture_default_str()->check(
      CLI::Range(0.5, 0.9999));
  bootc->add_option("--threads", boot.threads, "Worker threads")->capture_default_str();
  bootc->add_option("--scores", boot.scores, "Numeric score per category")->delimiter(',');
  bootc->add_option("--json", json_path, "Write results as JSON");

  BaselineArgs base;
  auto* basec = app.add_subcommand("baseline", "Classical baseline tests");
  basec->add_option("data", base.data, "Long-format CSV file");
  basec->add_option("--test", base.test, "Registry id, e.g. kruskal-wallis");
  basec->add_option("--response", base.response, "Response column");
  basec->add_option("--factor", base.factor, "Condition column");
  basec->add_option("--subject", base.subject, "Subject column (paired tests)");
  basec->add_option("--design", base.design, "between or within");
  basec->add_option("--input", base.input, "ordinal or metric")->capture_default_str();
  basec->add_option("--levels", base.levels, "Ordered response labels");
  basec->add_option("--factor-levels", base.factor_levels, "Level order, FACTOR=L1,L2,...");
  basec->add_option("--pair", base.pair, "Two levels for pairwise tests")->delimiter(',');
  basec->add_option("--delim", base.delim, "Field delimiter")->capture_default_str();
  basec->add_option("--exact-signed-rank-n", base.exact.signed_rank_max_n,
                    "Largest n for the exact signed-rank distribution")
      ->capture_default_str();
  basec->add_option("--exact-rank-sum-min", base.exact.rank_sum_max_min,
                    "Largest smaller-group size for the exact rank-sum distribution")
      ->capture_default_str();
  basec->add_option("--exact-permutations", base.exact.max_permutations,
                    "Largest permutation count enumerated exactly")
      ->capture_default_str();
  basec->add_flag("--list", base.list, "Print the assumption registry");
  basec->add_option("--json", json_path, "Write results as JSON");

  SimulateArgs sim;
  auto* simc = app.add_subcommand("simulate", "Simulate ordinal data as CSV");
  simc->add_option("--tau", sim.tau, "Thresholds")->delimiter(',');
  simc->add_option("--props", sim.props, "Baseline category proportions")->delimiter(',');
  simc->add_option("--conditions", sim.conditions, "Condition levels")->delimiter(',');
  simc->add_option("--beta", sim.beta, "Latent shift per condition")->delimiter(',');
  simc->add_option("--sigma-b", sim.sigma_b, "Random-intercept SD")->capture_default_str();
  simc->add_option("--groups", sim.groups, "Number of participants")->capture_default_str();
  simc->add_option("--reps", sim.reps, "Responses per participant and condition")
      ->capture_default_str();
  simc->add_option("--link", sim.link, "probit, logit or cloglog")->capture_default_str();
  simc->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simc->add_option("--response", sim.response, "Response column name")->capture_default_str();
  simc->add_option("--condition-name", sim.condition_name, "Condition column name");
  simc->add_option("--group-name", sim.group_name, "Participant column name");
  simc->add_option("--out", sim.output, "Output file (default stdout)");
  simc->add_option("--delim", sim.delim, "Field delimiter")->capture_default_str();

  std::vector<double> props;
  std::string cut_link = "probit";
  auto* cut = app.add_subcommand("cutpoints", "Thresholds reproducing given category proportions");
  cut->add_option("--props", props, "Category proportions")->delimiter(',')->required();
  cut->add_option("--link", cut_link, "probit, logit or cloglog")->capture_default_str();
  cut->add_option("--json", json_path, "Write results as JSON");

  std::string report_path, report_term, report_response;
  auto* report = app.add_subcommand("report", "Plain-language reading of a coefficient");
  report->add_option("model", report_path, "Model archive written by fit --json")->required();
  report->add_option("--term", report_term, "Coefficient name, e.g. ConditionSelf")->required();
  report->add_option("--response", report_response, "Wording for the response measure");

  std::string bind = "127.0.0.1", model_path, static_dir;
  int port = 8765;
  auto* serve = app.add_subcommand("serve", "Local HTTP backend for the explorer");
  serve->add_option("--bind", bind, "Address to bind")->capture_default_str();
  serve->add_option("--port", port, "Port (0 = any free port)")->capture_default_str();
  serve->add_option("--model", model_path, "Model archive to expose at /model");
  serve->add_option("--static", static_dir, "Directory of static assets to serve");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit) return cmd_fit(fit_args, json_path, out, err);
    if (*con) return cmd_contrast(con_args, con_factor, adjust, json_path, out, err);
    if (*brant) return cmd_brant(brant_args, json_path, out, err);
    if (*bootc) return cmd_boot(boot_args, boot, json_path, out, err);
    if (*basec) return cmd_baseline(base, json_path, out);
    if (*simc) return cmd_simulate(sim, out);
    if (*cut) return cmd_cutpoints(props, cut_link, json_path, out);
    if (*report) return cmd_report(report_path, report_term, report_response, out);
    if (*serve) return cmd_serve(bind, port, model_path, static_dir, out);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace ordreg::cli
