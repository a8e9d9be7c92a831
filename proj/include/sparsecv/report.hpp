#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sparsecv {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// One row of the long-format CSV table.
struct CsvRow {
  std::string method;
  long long n = 0;
  long long d = 0;
  std::string metric;
  std::optional<double> value;
  /// Seed as text; aggregate rows use "median".
  std::string seed;
};

struct RunReport {
  /// Structured body: config echo, per-seed results, aggregates.
  nlohmann::json body = nlohmann::json::object();
  std::vector<CsvRow> rows;
  /// Set to false for byte-identical reruns; timings then become null.
  bool include_timings = true;
};

/// A finite number, or null. The reason lands in a sibling "<key>_reason".
void put_number(nlohmann::json& obj, const std::string& key, std::optional<double> value,
                const std::string& reason_if_missing = "not-computed");

/// Wall time respecting report.include_timings.
void put_timing(const RunReport& report, nlohmann::json& obj, const std::string& key,
                double seconds);

/// Writes `path` (JSON, sorted keys, plus a generated_at timestamp and the
/// artifact version) and `path` with its extension replaced by ".csv".
void emit_report(const RunReport& report, const std::string& path);

/// The CSV companion path for a report path.
std::string csv_path_for(const std::string& path);

using SeedLabel = std::variant<std::string, long long>;

/// Stable hash of (master, labels...). Returns master for an empty list.
std::uint64_t derive_seed(std::uint64_t master, const std::vector<SeedLabel>& labels);

/// Median of the finite entries; empty when none.
std::optional<double> median(std::vector<double> values);

}  // namespace sparsecv
