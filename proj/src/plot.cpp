#include "rgnet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rgnet/errors.hpp"

namespace rgnet {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool to_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw DataError(DataErrorKind::Parse, "csv row has " + std::to_string(cells.size()) + " cells, header has " +
                                                std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw DataError(DataErrorKind::EmptyInput, "csv has no header");
  return table;
}

std::string render_sweep_svg(const CsvTable& table, const std::string& title) {
  const auto xcol = std::find(table.header.begin(), table.header.end(), "value") - table.header.begin();
  if (xcol == static_cast<std::ptrdiff_t>(table.header.size())) {
    throw DataError(DataErrorKind::Parse, "csv has no 'value' column");
  }
  struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
  };
  std::vector<Series> series;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) == xcol) continue;
    Series s{table.header[c], {}};
    bool numeric = !table.rows.empty();
    for (const auto& row : table.rows) {
      double x, y;
      if (!to_number(row[static_cast<std::size_t>(xcol)], x) || !to_number(row[c], y) || !std::isfinite(y)) {
        numeric = false;
        break;
      }
      s.points.emplace_back(x, y);
    }
    if (numeric) series.push_back(std::move(s));
  }

  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 100;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        x_lo = x_hi = x;
        first = false;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi == x_lo) {
    x_lo -= 1;
    x_hi += 1;
  }

  const double w = 640, h = 400, left = 60, right = 170, top = 40, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return top + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << escape(title)
      << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = y_lo + (y_hi - y_lo) * i / 4.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(y) + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  std::vector<double> xs;
  for (const auto& s : series) {
    for (const auto& p : s.points) xs.push_back(p.first);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs) {
    svg << "<text x=\"" << sx(x) << "\" y=\"" << top + ph + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto* color = kColors[i % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : series[i].points) svg << sx(x) << ',' << sy(y) << ' ';
    svg << "\"/>\n";
    for (const auto& [x, y] : series[i].points) {
      svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 14.0 * static_cast<double>(i);
    svg << "<text x=\"" << left + pw + 12 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << color << "\">" << escape(series[i].name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rgnet
