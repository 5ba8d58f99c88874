#include "a3dmm/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "a3dmm/error.hpp"

namespace a3dmm {

bool TraceRecord::same_values(const TraceRecord& o) const {
  return k == o.k && norm_v == o.norm_v && cos_theta == o.cos_theta &&
         dist_z == o.dist_z && dist_x == o.dist_x && objective == o.objective &&
         extrapolated == o.extrapolated;
}

void Trace::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = value;
      return;
    }
  }
  metadata.emplace_back(key, value);
}

std::optional<std::string> Trace::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::optional<int> Trace::first_below(double tol, bool use_z) const {
  for (const auto& r : records) {
    const auto& d = use_z ? r.dist_z : r.dist_x;
    if (d && *d <= tol) return r.k;
  }
  return std::nullopt;
}

bool Trace::same_values(const Trace& other) const {
  if (records.size() != other.records.size()) return false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].same_values(other.records[i])) return false;
  }
  return true;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(Errc::ParseError, "not a number: '" + text + "'");
  }
  return x;
}

namespace {

void put_optional(std::ostream& out, const std::optional<double>& x) {
  if (x && std::isfinite(*x)) out << format_double(*x);
}

std::optional<double> get_optional(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return parse_double(cell);
}

}  // namespace

void write_trace_csv(const Trace& trace, std::ostream& out) {
  for (const auto& [k, v] : trace.metadata) out << "# " << k << '=' << v << '\n';
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.k << ',' << format_double(r.norm_v) << ',';
    put_optional(out, r.cos_theta);
    out << ',';
    put_optional(out, r.dist_z);
    out << ',';
    put_optional(out, r.dist_x);
    out << ',';
    put_optional(out, r.objective);
    out << ',' << (r.extrapolated ? 1 : 0) << ',' << format_double(r.ms)
        << '\n';
  }
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string());
  write_trace_csv(trace, out);
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

Trace read_trace_csv(std::istream& in) {
  Trace trace;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(Errc::ParseError, "line " + std::to_string(line_no) +
                                          ": metadata without '='");
      }
      trace.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!header) {
      if (line != kTraceHeader) {
        throw Error(Errc::ParseError,
                    "line " + std::to_string(line_no) + ": unexpected header");
      }
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 8) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) +
                                        ": expected 8 cells");
    }
    try {
      TraceRecord r;
      r.k = std::stoi(cells[0]);
      r.norm_v = parse_double(cells[1]);
      r.cos_theta = get_optional(cells[2]);
      r.dist_z = get_optional(cells[3]);
      r.dist_x = get_optional(cells[4]);
      r.objective = get_optional(cells[5]);
      r.extrapolated = cells[6] == "1";
      r.ms = parse_double(cells[7]);
      trace.records.push_back(r);
    } catch (const std::invalid_argument&) {
      throw Error(Errc::ParseError,
                  "line " + std::to_string(line_no) + ": bad integer");
    } catch (const Error& e) {
      throw Error(Errc::ParseError,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header) throw Error(Errc::ParseError, "missing header");
  return trace;
}

Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  return read_trace_csv(in);
}

}  // namespace a3dmm
