#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace metric_lab {

inline constexpr int kConfigSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitViolations = 2 };

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<double> tolerance_scale;
  std::optional<std::filesystem::path> output_dir;
};

/// Parses `text` (line/column diagnostics on syntax errors), validates the
/// whole config, runs every check in memory and writes the bundle only when
/// all of them completed. Diagnostics go to `err`.
int run_experiment(const std::string& text, const std::filesystem::path& base_dir, const RunOverrides& overrides,
                   std::ostream& out, std::ostream& err);
int run_experiment_file(const std::filesystem::path& config, const RunOverrides& overrides, std::ostream& out,
                        std::ostream& err);

/// format: json | csv | summary-text.
int emit_report(const std::filesystem::path& bundle, const std::string& format, std::ostream& out, std::ostream& err);

struct CertifyOptions {
  bool all_centers = false;
  std::optional<double> r_min;
  std::optional<double> r_max;
  std::size_t triples = 10000;
  std::uint64_t seed = 0;
};

/// Certificate, doubling, constant condition and metric audit for a space
/// file, printed as JSON.
int certify_space_file(const std::filesystem::path& space, const CertifyOptions& options, std::ostream& out,
                       std::ostream& err);

}  // namespace metric_lab
