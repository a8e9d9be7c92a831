#include "sparsecv/report.hpp"

#include "sparsecv/error.hpp"
#include "sparsecv/random.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace sparsecv {

namespace {

std::string csv_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

void put_number(nlohmann::json& obj, const std::string& key, std::optional<double> value,
                const std::string& reason_if_missing) {
  if (value && std::isfinite(*value)) {
    obj[key] = *value;
    obj.erase(key + "_reason");
  } else {
    obj[key] = nullptr;
    obj[key + "_reason"] = value ? (std::isnan(*value) ? "nan" : "infinite") : reason_if_missing;
  }
}

void put_timing(const RunReport& report, nlohmann::json& obj, const std::string& key,
                double seconds) {
  if (report.include_timings) {
    put_number(obj, key, seconds);
  } else {
    put_number(obj, key, std::nullopt, "timing-disabled");
  }
}

std::string csv_path_for(const std::string& path) {
  std::filesystem::path p(path);
  p.replace_extension(".csv");
  return p.string();
}

void emit_report(const RunReport& report, const std::string& path) {
  nlohmann::json doc = report.body;
  doc["artifact_version"] = kArtifactVersion;
  doc["generated_at"] = utc_timestamp();
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path);
  }
  const std::string csv = csv_path_for(path);
  std::ofstream out(csv, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + csv + " for writing");
  out << "method,N,D,metric,value,seed\n";
  for (const CsvRow& r : report.rows) {
    out << csv_field(r.method) << ',' << r.n << ',' << r.d << ',' << csv_field(r.metric) << ','
        << (r.value && std::isfinite(*r.value) ? csv_number(*r.value) : std::string()) << ','
        << csv_field(r.seed) << '\n';
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + csv);
}

std::uint64_t derive_seed(std::uint64_t master, const std::vector<SeedLabel>& labels) {
  std::uint64_t h = master;
  for (const SeedLabel& label : labels) {
    std::uint64_t part = 0;
    if (const auto* s = std::get_if<std::string>(&label)) {
      part = splitmix64(fnv1a(*s) ^ 0x5354524EULL);
    } else {
      part = splitmix64(static_cast<std::uint64_t>(std::get<long long>(label)) ^ 0x494E5447ULL);
    }
    h = splitmix64(h ^ part) + 0x9E3779B97F4A7C15ULL;
  }
  return h;
}

std::optional<double> median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

}  // namespace sparsecv
