#include "ordreg/design.hpp"

#include <algorithm>
#include <charconv>

#include "ordreg/errors.hpp"

namespace ordreg {

ModelSpec ModelSpec::from_formula(const FormulaSpec& formula, Link link,
                                  std::vector<std::string> scale_terms,
                                  std::vector<std::string> nominal_terms) {
  ModelSpec spec;
  spec.response = formula.response;
  spec.location = formula.location;
  spec.group = formula.random_group;
  spec.scale = std::move(scale_terms);
  spec.nominal = std::move(nominal_terms);
  spec.link = link;
  return spec;
}

FormulaSpec ModelSpec::formula() const { return FormulaSpec{response, location, group}; }

std::vector<std::string> TermCoding::column_names() const {
  if (kind == TermKind::numeric) return {term};
  std::vector<std::string> names;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (l != reference) names.push_back(term + levels[l]);
  }
  return names;
}

TermCoding code_term(const Dataset& data, const std::string& term) {
  if (const FactorColumn* f = data.find_factor(term)) {
    return TermCoding{term, TermKind::factor, f->factor.levels(), f->factor.reference_index()};
  }
  if (data.find_numeric(term)) return TermCoding{term, TermKind::numeric, {}, 0};
  if (data.group() && data.group()->factor.name() == term) {
    throw ValidationError("grouping factor '" + term + "' cannot be used as a fixed term");
  }
  throw ValidationError("unknown term '" + term + "': no factor or numeric column of that name");
}

DesignBlock build_block(const Dataset& data, const std::vector<std::string>& terms) {
  DesignBlock block;
  for (const auto& t : terms) {
    block.terms.push_back(code_term(data, t));
    for (auto& c : block.terms.back().column_names()) block.columns.push_back(std::move(c));
  }
  const auto n = static_cast<Eigen::Index>(data.rows());
  block.matrix = Eigen::MatrixXd::Zero(n, block.size());
  Eigen::Index col = 0;
  for (const auto& coding : block.terms) {
    if (coding.kind == TermKind::numeric) {
      const auto& values = data.find_numeric(coding.term)->values;
      for (Eigen::Index i = 0; i < n; ++i) block.matrix(i, col) = values[static_cast<std::size_t>(i)];
      ++col;
      continue;
    }
    const auto& codes = data.find_factor(coding.term)->codes;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t level = codes[static_cast<std::size_t>(i)];
      if (level == coding.reference) continue;
      const auto offset = static_cast<Eigen::Index>(level < coding.reference ? level : level - 1);
      block.matrix(i, col + offset) = 1.0;
    }
    col += static_cast<Eigen::Index>(coding.levels.size() - 1);
  }
  return block;
}

void require_full_rank(const Eigen::MatrixXd& matrix, const std::vector<std::string>& names,
                       const std::string& what) {
  if (matrix.cols() == 0) return;
  const Eigen::Index n = matrix.rows();
  Eigen::MatrixXd current = Eigen::MatrixXd::Ones(n, 1);
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    Eigen::MatrixXd next(n, current.cols() + 1);
    next << current, matrix.col(j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(next);
    qr.setThreshold(1e-10);
    if (qr.rank() < next.cols()) {
      std::string others;
      for (Eigen::Index k = 0; k < j; ++k) others += (k ? ", " : "") + names[static_cast<std::size_t>(k)];
      throw ValidationError(what + " design is rank deficient: column '" +
                            names[static_cast<std::size_t>(j)] +
                            "' is collinear with the thresholds" +
                            (others.empty() ? std::string() : " and {" + others + "}") +
                            " (an unobserved factor level or a constant covariate?)");
    }
    current = std::move(next);
  }
}

Design build_design(const ModelSpec& spec, const Dataset& data) {
  for (const auto& t : spec.nominal) {
    if (std::find(spec.location.begin(), spec.location.end(), t) != spec.location.end()) {
      throw ValidationError("term '" + t +
                            "' appears in both the location and nominal parts; they are aliased");
    }
  }
  if (spec.group) {
    if (!data.group() || data.group()->factor.name() != *spec.group) {
      throw ValidationError("grouping factor '" + *spec.group + "' is not a group column");
    }
  }
  Design design{build_block(data, spec.location), build_block(data, spec.scale),
                build_block(data, spec.nominal)};
  require_full_rank(design.location.matrix, design.location.columns, "location");
  require_full_rank(design.scale.matrix, design.scale.columns, "scale");
  require_full_rank(design.nominal.matrix, design.nominal.columns, "nominal");
  if (design.nominal.size() > 0 && design.location.size() > 0) {
    Eigen::MatrixXd both(design.location.matrix.rows(),
                         design.location.size() + design.nominal.size());
    both << design.location.matrix, design.nominal.matrix;
    auto names = design.location.columns;
    names.insert(names.end(), design.nominal.columns.begin(), design.nominal.columns.end());
    require_full_rank(both, names, "combined location and nominal");
  }
  return design;
}

Eigen::VectorXd encode_setting(const std::vector<TermCoding>& terms,
                               const CovariateSetting& setting) {
  for (const auto& [name, _] : setting) {
    (void)_;
    bool known = std::any_of(terms.begin(), terms.end(),
                             [&](const TermCoding& t) { return t.term == name; });
    if (!known) throw ValidationError("setting names unknown term '" + name + "'");
  }
  std::size_t width = 0;
  for (const auto& t : terms) width += t.column_names().size();
  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width));
  Eigen::Index col = 0;
  for (const auto& t : terms) {
    auto it = setting.find(t.term);
    if (t.kind == TermKind::numeric) {
      if (it != setting.end()) {
        double v = 0;
        const auto& s = it->second;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
          throw ValidationError("value '" + s + "' for numeric term '" + t.term +
                                "' is not a number");
        }
        row(col) = v;
      }
      ++col;
      continue;
    }
    if (it != setting.end()) {
      auto lv = std::find(t.levels.begin(), t.levels.end(), it->second);
      if (lv == t.levels.end()) {
        throw ValidationError("unknown level '" + it->second + "' for factor '" + t.term + "'");
      }
      const auto level = static_cast<std::size_t>(lv - t.levels.begin());
      if (level != t.reference) {
        row(col + static_cast<Eigen::Index>(level < t.reference ? level : level - 1)) = 1.0;
      }
    }
    col += static_cast<Eigen::Index>(t.levels.size() - 1);
  }
  return row;
}

}  // namespace ordreg
