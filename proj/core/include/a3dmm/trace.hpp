#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace a3dmm {

struct TraceRecord {
  int k = 0;
  double norm_v = 0.0;
  std::optional<double> cos_theta;
  std::optional<double> dist_z;
  std::optional<double> dist_x;
  std::optional<double> objective;
  bool extrapolated = false;
  /// Cumulative wall time since the start of the run.
  double ms = 0.0;
  /// |z_bar - z| applied after this iteration (not persisted).
  double perturbation = 0.0;

  /// Field-wise equality ignoring timing.
  bool same_values(const TraceRecord& other) const;
};

struct Trace {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<TraceRecord> records;

  void set_meta(const std::string& key, const std::string& value);
  std::optional<std::string> meta(const std::string& key) const;

  /// First k with dist_x <= tol (or dist_z with `use_z`), if any.
  std::optional<int> first_below(double tol, bool use_z = false) const;
  bool same_values(const Trace& other) const;
};

inline constexpr const char* kTraceHeader =
    "k,norm_v,cos_theta,dist_z,dist_x,objective,extrapolated,ms";

/// Shortest round-trip decimal representation.
std::string format_double(double x);
double parse_double(const std::string& text);

void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::filesystem::path& path);

}  // namespace a3dmm
