#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "a3dmm/bench.hpp"
#include "a3dmm/error.hpp"

namespace a3dmm {

PlotQuantity parse_quantity(const std::string& text) {
  if (text == "norm_v") return PlotQuantity::NormV;
  if (text == "cos_theta") return PlotQuantity::CosTheta;
  if (text == "one_minus_cos") return PlotQuantity::OneMinusCos;
  if (text == "dist_z") return PlotQuantity::DistZ;
  if (text == "dist_x") return PlotQuantity::DistX;
  if (text == "objective") return PlotQuantity::Objective;
  throw Error(Errc::ConfigError, "unknown plot quantity '" + text + "'");
}

std::string to_string(PlotQuantity q) {
  switch (q) {
    case PlotQuantity::NormV: return "norm_v";
    case PlotQuantity::CosTheta: return "cos_theta";
    case PlotQuantity::OneMinusCos: return "one_minus_cos";
    case PlotQuantity::DistZ: return "dist_z";
    case PlotQuantity::DistX: return "dist_x";
    case PlotQuantity::Objective: return "objective";
  }
  return "norm_v";
}

namespace {

bool log_scale(PlotQuantity q) {
  return q == PlotQuantity::NormV || q == PlotQuantity::OneMinusCos ||
         q == PlotQuantity::DistZ || q == PlotQuantity::DistX;
}

std::optional<double> pick(const TraceRecord& r, PlotQuantity q) {
  switch (q) {
    case PlotQuantity::NormV: return r.norm_v;
    case PlotQuantity::CosTheta: return r.cos_theta;
    case PlotQuantity::OneMinusCos:
      if (r.cos_theta) return 1.0 - *r.cos_theta;
      return std::nullopt;
    case PlotQuantity::DistZ: return r.dist_z;
    case PlotQuantity::DistX: return r.dist_x;
    case PlotQuantity::Objective: return r.objective;
  }
  return std::nullopt;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b",
                                    "#e377c2", "#17becf"};

}  // namespace

std::string render_plot_svg(const std::vector<Trace>& traces,
                            PlotQuantity quantity) {
  const bool logy = log_scale(quantity);
  struct Series {
    std::string label;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  double xmax = 1.0;
  double ymin = INFINITY;
  double ymax = -INFINITY;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    Series s;
    s.label = traces[i].meta("solver").value_or("run " + std::to_string(i));
    for (const auto& r : traces[i].records) {
      auto y = pick(r, quantity);
      if (!y || !std::isfinite(*y)) continue;
      if (logy) {
        if (*y <= 0.0) continue;
        *y = std::log10(*y);
      }
      s.pts.emplace_back(double(r.k), *y);
      xmax = std::max(xmax, double(r.k));
      ymin = std::min(ymin, *y);
      ymax = std::max(ymax, *y);
    }
    if (!s.pts.empty()) series.push_back(std::move(s));
  }
  if (series.empty()) {
    throw Error(Errc::EmptySelection,
                "no trace has values for " + to_string(quantity));
  }
  if (logy) {
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }

  const double w = 720, h = 480, left = 70, right = 160, top = 30, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  auto sx = [&](double x) { return left + pw * x / xmax; };
  auto sy = [&](double y) { return top + ph * (1.0 - (y - ymin) / (ymax - ymin)); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

  // y ticks: integer decades on log axes, five even steps otherwise.
  std::vector<double> yticks;
  if (logy) {
    const double step = std::max(1.0, std::ceil((ymax - ymin) / 8.0));
    for (double y = ymin; y <= ymax + 1e-9; y += step) yticks.push_back(y);
  } else {
    for (int i = 0; i <= 4; ++i) yticks.push_back(ymin + (ymax - ymin) * i / 4);
  }
  for (double y : yticks) {
    const std::string label = logy ? "1e" + std::to_string(int(std::lround(y)))
                                   : num(y);
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(sy(y)) << "\" x2=\""
        << num(left + pw) << "\" y2=\"" << num(sy(y))
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy(y) + 4)
        << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double x = xmax * i / 4;
    out << "<text x=\"" << num(sx(x)) << "\" y=\"" << num(top + ph + 18)
        << "\" text-anchor=\"middle\">" << std::lround(x) << "</text>\n";
  }
  out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(h - 10)
      << "\" text-anchor=\"middle\">k</text>\n";
  out << "<text x=\"16\" y=\"" << num(top + ph / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(top + ph / 2) << ")\">" << to_string(quantity) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof kPalette / sizeof *kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < series[i].pts.size(); ++j) {
      if (j) out << ' ';
      out << num(sx(series[i].pts[j].first)) << ','
          << num(sy(series[i].pts[j].second));
    }
    out << "\"/>\n";
    const double ly = top + 14 + 18 * double(i);
    out << "<line x1=\"" << num(left + pw + 10) << "\" y1=\"" << num(ly - 4)
        << "\" x2=\"" << num(left + pw + 30) << "\" y2=\"" << num(ly - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(left + pw + 36) << "\" y=\"" << num(ly) << "\">"
        << escape(series[i].label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_plot_svg(const std::vector<Trace>& traces, PlotQuantity quantity,
                   const std::filesystem::path& path) {
  if (traces.empty()) throw Error(Errc::EmptySelection, "no traces to plot");
  const std::string svg = render_plot_svg(traces, quantity);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string());
  out << svg;
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace a3dmm
