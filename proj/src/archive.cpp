#include "ordreg/archive.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "ordreg/errors.hpp"

namespace ordreg {
namespace {

using nlohmann::json;

// JSON has no non-finite numbers: NaN is stored as null, infinities as strings.
json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ValidationError("archive: bad number '" + s + "'");
  }
  if (!j.is_number()) throw ValidationError("archive: expected a number, got " + j.dump());
  return j.get<double>();
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::MatrixXd read_matrix(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError("archive: ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = read_number(row.at(static_cast<std::size_t>(c)));
  }
  return m;
}

json terms_json(const std::vector<TermCoding>& terms) {
  json out = json::array();
  for (const auto& t : terms) {
    out.push_back({{"term", t.term},
                   {"kind", t.kind == TermKind::factor ? "factor" : "numeric"},
                   {"levels", t.levels},
                   {"reference", t.reference}});
  }
  return out;
}

std::vector<TermCoding> read_terms(const json& j) {
  std::vector<TermCoding> out;
  for (const auto& t : j) {
    TermCoding c;
    c.term = t.at("term").get<std::string>();
    const auto kind = t.at("kind").get<std::string>();
    if (kind != "factor" && kind != "numeric") {
      throw ValidationError("archive: unknown term kind '" + kind + "'");
    }
    c.kind = kind == "factor" ? TermKind::factor : TermKind::numeric;
    c.levels = t.at("levels").get<std::vector<std::string>>();
    c.reference = t.at("reference").get<std::size_t>();
    out.push_back(std::move(c));
  }
  return out;
}

json clm_json(const FittedClm& f) {
  json spec = {{"response", f.spec.response},
               {"location", f.spec.location},
               {"scale", f.spec.scale},
               {"nominal", f.spec.nominal},
               {"link", f.spec.link.name()}};
  spec["group"] = f.spec.group ? json(*f.spec.group) : json(nullptr);

  json estimates = json::array();
  for (std::size_t j = 0; j < f.names.size(); ++j) {
    estimates.push_back({{"name", f.names[j]}, {"value", number(f.estimates(static_cast<Eigen::Index>(j)))}});
  }
  json trace = json::array();
  for (double v : f.convergence.trace) trace.push_back(number(v));
  const auto& c = f.convergence;
  return {
      {"format_version", kArchiveFormatVersion},
      {"spec", spec},
      {"scale_labels", f.scale.labels()},
      {"terms",
       {{"location", terms_json(f.location_terms)},
        {"scale", terms_json(f.scale_terms)},
        {"nominal", terms_json(f.nominal_terms)}}},
      {"layout",
       {{"thresholds", f.layout.thresholds},
        {"location", f.layout.location},
        {"scale", f.layout.scale},
        {"nominal", f.layout.nominal}}},
      {"estimates", estimates},
      {"covariance", matrix_json(f.covariance)},
      {"logLik", number(f.log_lik)},
      {"aic", number(f.aic)},
      {"n_obs", f.n_obs},
      {"convergence",
       {{"iterations", c.iterations},
        {"step_halvings", c.step_halvings},
        {"inner_iterations", c.inner_iterations},
        {"max_abs_gradient", number(c.max_abs_gradient)},
        {"condition_number", number(c.condition_number)},
        {"boundary", c.boundary},
        {"trace", trace}}},
      {"warnings", f.warnings},
  };
}

FittedClm read_clm(const json& j) {
  const auto& s = j.at("spec");
  ModelSpec spec;
  spec.response = s.at("response").get<std::string>();
  spec.location = s.at("location").get<std::vector<std::string>>();
  spec.scale = s.at("scale").get<std::vector<std::string>>();
  spec.nominal = s.at("nominal").get<std::vector<std::string>>();
  if (!s.at("group").is_null()) spec.group = s.at("group").get<std::string>();
  spec.link = Link::parse(s.at("link").get<std::string>());

  ParameterLayout layout;
  const auto& l = j.at("layout");
  layout.thresholds = l.at("thresholds").get<std::size_t>();
  layout.location = l.at("location").get<std::size_t>();
  layout.scale = l.at("scale").get<std::size_t>();
  layout.nominal = l.at("nominal").get<std::size_t>();

  const auto& est = j.at("estimates");
  std::vector<std::string> names;
  Eigen::VectorXd values(static_cast<Eigen::Index>(est.size()));
  for (std::size_t i = 0; i < est.size(); ++i) {
    names.push_back(est[i].at("name").get<std::string>());
    values(static_cast<Eigen::Index>(i)) = read_number(est[i].at("value"));
  }
  if (names.size() != layout.size()) {
    throw ValidationError("archive: " + std::to_string(names.size()) +
                          " estimates but the layout needs " + std::to_string(layout.size()));
  }

  const auto& t = j.at("terms");
  FittedClm f{spec,
              OrdinalScale(j.at("scale_labels").get<std::vector<std::string>>()),
              read_terms(t.at("location")),
              read_terms(t.at("scale")),
              read_terms(t.at("nominal")),
              layout,
              std::move(names),
              std::move(values),
              read_matrix(j.at("covariance")),
              read_number(j.at("logLik")),
              read_number(j.at("aic")),
              j.at("n_obs").get<std::size_t>()};
  if (f.scale.threshold_count() != layout.thresholds) {
    throw ValidationError("archive: scale labels do not match the threshold count");
  }
  const auto& c = j.at("convergence");
  f.convergence.iterations = c.at("iterations").get<int>();
  f.convergence.step_halvings = c.at("step_halvings").get<int>();
  f.convergence.inner_iterations = c.at("inner_iterations").get<long>();
  f.convergence.max_abs_gradient = read_number(c.at("max_abs_gradient"));
  f.convergence.condition_number = read_number(c.at("condition_number"));
  f.convergence.boundary = c.at("boundary").get<bool>();
  for (const auto& v : c.at("trace")) f.convergence.trace.push_back(read_number(v));
  f.warnings = j.at("warnings").get<std::vector<std::string>>();
  return f;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string serialize_archive(const FittedClm& fitted) {
  json j = clm_json(fitted);
  j["kind"] = "clm";
  return dump(j);
}

std::string serialize_archive(const FittedClmm& fitted) {
  json j = clm_json(fitted.fixed);
  j["kind"] = "clmm";
  json modes = json::array();
  for (double m : fitted.modes) modes.push_back(number(m));
  j["random_effect"] = {{"group", fitted.group},
                        {"levels", fitted.group_levels},
                        {"sigma", number(fitted.sigma)},
                        {"sigma_se", number(fitted.sigma_se)},
                        {"sigma_fixed", fitted.sigma_fixed},
                        {"variance", number(fitted.variance())},
                        {"full_covariance", matrix_json(fitted.full_covariance)},
                        {"modes", modes},
                        {"nodes", fitted.nodes},
                        {"group_count", fitted.group_count}};
  return dump(j);
}

std::string serialize_archive(const ModelArchive& archive) {
  return std::visit([](const auto& f) { return serialize_archive(f); }, archive);
}

ModelArchive parse_archive(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("archive: invalid JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) throw ValidationError("archive: top level must be an object");
    const int version = j.at("format_version").get<int>();
    if (version != kArchiveFormatVersion) {
      throw ValidationError("archive: unsupported format_version " + std::to_string(version));
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "clm") return read_clm(j);
    if (kind != "clmm") throw ValidationError("archive: unknown kind '" + kind + "'");
    const auto& r = j.at("random_effect");
    FittedClmm m{read_clm(j)};
    m.group = r.at("group").get<std::string>();
    m.group_levels = r.at("levels").get<std::vector<std::string>>();
    m.sigma = read_number(r.at("sigma"));
    m.sigma_se = read_number(r.at("sigma_se"));
    m.sigma_fixed = r.at("sigma_fixed").get<bool>();
    m.full_covariance = read_matrix(r.at("full_covariance"));
    for (const auto& v : r.at("modes")) m.modes.push_back(read_number(v));
    m.nodes = r.at("nodes").get<int>();
    m.group_count = r.at("group_count").get<std::size_t>();
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("archive: ") + e.what());
  }
}

void save_archive(const std::filesystem::path& path, const ModelArchive& archive) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << serialize_archive(archive);
  if (!out) throw ValidationError("failed writing " + path.string());
}

ModelArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_archive(text.str());
}

const FittedClm& fixed_part(const ModelArchive& archive) {
  if (const auto* m = std::get_if<FittedClmm>(&archive)) return m->fixed;
  return std::get<FittedClm>(archive);
}

}  // namespace ordreg
