#include "ordreg/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ordreg/errors.hpp"

namespace ordreg {
namespace {

bool is_missing(const std::string& field) {
  return field.empty() || field == "NA" || field == "na" || field == "NaN";
}

std::optional<double> parse_double(const std::string& text) {
  double value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::string quote_if_needed(const std::string& field, char delimiter) {
  if (field.find_first_of(std::string("\"\r\n") + delimiter) == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::istream& in, char delimiter) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char c;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    // A blank line is not a record.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw ValidationError("unterminated quoted field in CSV input");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

LoadedDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return load_csv(in, options);
}

LoadedDataset load_csv(std::istream& in, const CsvOptions& options) {
  auto records = parse_csv(in, options.delimiter);
  if (records.empty()) throw ValidationError("CSV input has no header row");
  const auto& header = records.front();
  {
    std::set<std::string_view> seen;
    for (const auto& h : header) {
      if (!seen.insert(h).second) throw ValidationError("duplicate header name '" + h + "'");
    }
  }
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("CSV has no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t response_col = column(options.response_column);
  std::vector<std::size_t> used = {response_col};
  std::vector<std::size_t> factor_cols, numeric_cols;
  for (const auto& f : options.factor_columns) used.push_back(factor_cols.emplace_back(column(f)));
  for (const auto& n : options.numeric_columns) used.push_back(numeric_cols.emplace_back(column(n)));
  std::optional<std::size_t> group_col;
  if (options.group_column) used.push_back(*(group_col = column(*options.group_column)));

  std::vector<std::string> warnings;
  std::size_t dropped = 0;
  std::vector<const std::vector<std::string>*> kept;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw ValidationError("CSV row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                            " fields, header has " + std::to_string(header.size()));
    }
    bool missing = std::any_of(used.begin(), used.end(),
                               [&](std::size_t c) { return is_missing(rec[c]); });
    if (missing) {
      ++dropped;
      continue;
    }
    kept.push_back(&rec);
  }
  if (dropped > 0) {
    warnings.push_back(std::to_string(dropped) +
                              " row(s) with missing values dropped (listwise deletion)");
  }
  if (kept.empty()) warnings.push_back("dataset has no rows");

  std::vector<std::string> levels;
  if (options.levels) {
    levels = *options.levels;
  } else {
    std::set<std::string> distinct;
    for (const auto* rec : kept) distinct.insert((*rec)[response_col]);
    levels.assign(distinct.begin(), distinct.end());
    warnings.push_back(
        "response levels were not declared; inferred by lexicographic sort as [" +
        [&] {
          std::string s;
          for (std::size_t i = 0; i < levels.size(); ++i) s += (i ? "," : "") + levels[i];
          return s;
        }() +
        "]. Declare them with --levels to avoid misordering tokens like 10 and 2");
  }
  OrdinalScale scale(levels);

  std::vector<std::size_t> responses;
  responses.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& token = (*kept[i])[response_col];
    auto k = scale.find(token);
    if (!k) {
      throw ValidationError("row " + std::to_string(i + 1) + ": response '" + token +
                            "' is not one of the declared levels");
    }
    responses.push_back(*k);
  }

  auto make_factor = [&](const std::string& name, std::size_t col) {
    std::vector<std::string> lv;
    if (auto it = options.factor_levels.find(name); it != options.factor_levels.end()) {
      lv = it->second;
    } else {
      std::set<std::string> distinct;
      for (const auto* rec : kept) distinct.insert((*rec)[col]);
      lv.assign(distinct.begin(), distinct.end());
    }
    if (lv.empty()) lv.push_back("(none)");
    Factor factor(name, lv);
    std::vector<std::size_t> codes;
    codes.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const auto& v = (*kept[i])[col];
      auto k = factor.find(v);
      if (!k) {
        throw ValidationError("row " + std::to_string(i + 1) + ": value '" + v +
                              "' is not a level of '" + name + "'");
      }
      codes.push_back(*k);
    }
    return FactorColumn{std::move(factor), std::move(codes)};
  };

  std::vector<FactorColumn> factors;
  for (std::size_t j = 0; j < factor_cols.size(); ++j) {
    factors.push_back(make_factor(options.factor_columns[j], factor_cols[j]));
  }
  std::vector<NumericColumn> numerics;
  for (std::size_t j = 0; j < numeric_cols.size(); ++j) {
    NumericColumn col{options.numeric_columns[j], {}};
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const auto& v = (*kept[i])[numeric_cols[j]];
      auto d = parse_double(v);
      if (!d) {
        throw ValidationError("row " + std::to_string(i + 1) + ": '" + v +
                              "' in numeric column '" + col.name + "' is not a number");
      }
      col.values.push_back(*d);
    }
    numerics.push_back(std::move(col));
  }
  std::optional<FactorColumn> group;
  if (group_col) group = make_factor(*options.group_column, *group_col);

  return {Dataset(std::move(scale), std::move(responses), std::move(factors),
                  std::move(numerics), std::move(group)),
          std::move(warnings), dropped};
}

void write_csv(std::ostream& out, const Dataset& data, const std::string& response_column,
               char delimiter) {
  std::vector<std::string> header;
  if (data.group()) header.push_back(data.group()->factor.name());
  for (const auto& f : data.factors()) header.push_back(f.factor.name());
  for (const auto& n : data.numerics()) header.push_back(n.name);
  header.push_back(response_column);
  for (std::size_t j = 0; j < header.size(); ++j) {
    out << (j ? std::string(1, delimiter) : "") << quote_if_needed(header[j], delimiter);
  }
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    std::vector<std::string> fields;
    if (data.group()) fields.push_back(data.group()->factor.levels()[data.group()->codes[i]]);
    for (const auto& f : data.factors()) fields.push_back(f.factor.levels()[f.codes[i]]);
    for (const auto& n : data.numerics()) {
      std::ostringstream s;
      s.precision(17);
      s << n.values[i];
      fields.push_back(s.str());
    }
    fields.push_back(data.scale().label(data.responses()[i]));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      out << (j ? std::string(1, delimiter) : "") << quote_if_needed(fields[j], delimiter);
    }
    out << '\n';
  }
}

}  // namespace ordreg
