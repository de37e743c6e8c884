#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "metric_lab/field.hpp"
#include "metric_lab/kernel.hpp"
#include "metric_lab/space.hpp"
#include "metric_lab/verify.hpp"

namespace metric_lab {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kCacheEnvVar = "METRIC_LAB_CACHE";

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// {"points": [[...]], "weights": [...], "adjacency": [[i, j]],
///  "metric": "euclidean" | "graph" | "explicit", "distances": [[...]]}.
/// Weights default to 1/N. "explicit" takes the distances matrix and makes
/// points optional.
Space space_from_json(const nlohmann::json& doc);
nlohmann::ordered_json space_to_json(const Space& space);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Row-major N x N little-endian float64.
void write_distance_matrix(const std::filesystem::path& path, std::span<const double> distances);
std::optional<std::vector<double>> read_distance_matrix(const std::filesystem::path& path, std::size_t n);

/// Directory named by METRIC_LAB_CACHE, if set and non-empty.
std::optional<std::filesystem::path> cache_directory();

/// Builds the space via `build`, reusing a cached distance matrix keyed by
/// `key` when the cache directory is configured and N <= 4096.
Space with_distance_cache(const std::string& key, const std::function<Space()>& build);

/// Binary matrix (NaN diagonal) plus `<path>.json` sidecar.
void write_kernel(const std::filesystem::path& path, const RoughKernelMatrix& kernel);

/// JSON array of numbers, or {"values": [...]}.
ScalarField field_from_json(const Space& space, const nlohmann::json& doc);
/// CSV with header `point_id,value` (any order of rows, every id once).
ScalarField field_from_csv(const Space& space, const std::string& text);
ScalarField read_field_file(const Space& space, const std::filesystem::path& path);
std::string field_to_csv(const ScalarField& f);

nlohmann::ordered_json report_to_json(const InequalityReport& report);
InequalityReport report_from_json(const nlohmann::json& doc);
/// point_id,lhs,rhs,ratio
std::string report_to_csv(const InequalityReport& report);
/// One line: id, constant, window, condition status, skipped/violations.
std::string report_summary_line(const std::string& name, const InequalityReport& report);

/// Shortest round-trip representation.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace metric_lab
