#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ordreg/scale.hpp"

namespace ordreg {

/// Splits RFC-4180 style text into records (quoted fields, doubled quotes,
/// CRLF or LF line endings).
std::vector<std::vector<std::string>> parse_csv(std::istream& in, char delimiter = ',');

struct CsvOptions {
  std::string response_column;
  /// Ordered response labels; inferred by lexicographic sort when absent.
  std::optional<std::vector<std::string>> levels;
  std::vector<std::string> factor_columns;
  std::vector<std::string> numeric_columns;
  std::optional<std::string> group_column;
  /// Explicit level order per factor; otherwise levels are sorted.
  std::map<std::string, std::vector<std::string>> factor_levels;
  char delimiter = ',';
};

struct LoadedDataset {
  Dataset data;
  std::vector<std::string> warnings;
  std::size_t dropped_rows = 0;
};

/// Reads a long-format table. Rows with a missing value in any used column
/// are dropped (listwise deletion) and counted in the warnings.
LoadedDataset load_csv(const std::filesystem::path& path, const CsvOptions& options);
LoadedDataset load_csv(std::istream& in, const CsvOptions& options);

/// Writes `data` in the format load_csv reads back.
void write_csv(std::ostream& out, const Dataset& data, const std::string& response_column,
               char delimiter = ',');

}  // namespace ordreg
