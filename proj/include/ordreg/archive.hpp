#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "ordreg/clm.hpp"
#include "ordreg/clmm.hpp"

namespace ordreg {

inline constexpr int kArchiveFormatVersion = 1;

/// A fitted model as stored on disk: either a plain or a mixed fit.
using ModelArchive = std::variant<FittedClm, FittedClmm>;

/// JSON text with sorted keys and shortest round-trip number formatting, so
/// serialize(parse(text)) == text for any text this function produced.
std::string serialize_archive(const FittedClm& fitted);
std::string serialize_archive(const FittedClmm& fitted);
std::string serialize_archive(const ModelArchive& archive);

/// Throws ValidationError on malformed documents or unsupported versions.
ModelArchive parse_archive(std::string_view text);

void save_archive(const std::filesystem::path& path, const ModelArchive& archive);
ModelArchive load_archive(const std::filesystem::path& path);

/// The fixed-effect part of either kind of archive.
const FittedClm& fixed_part(const ModelArchive& archive);

}  // namespace ordreg
