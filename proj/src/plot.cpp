#include "mgdlrc/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mgdlrc {

int MetricsCsv::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

MetricsCsv read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);
  MetricsCsv csv;
  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (csv.columns.empty()) {
      csv.columns = std::move(fields);
      continue;
    }
    if (fields.size() != csv.columns.size()) fail("wrong field count");
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const char* begin = fields[i].data();
      const char* end = begin + fields[i].size();
      auto [ptr, ec] = std::from_chars(begin, end, row[i]);
      if (ec != std::errc() || ptr != end) fail("bad number '" + fields[i] + "'");
    }
    csv.rows.push_back(std::move(row));
  }
  if (csv.columns.empty()) throw std::runtime_error(path + ": empty metrics file");
  if (csv.rows.empty()) throw std::runtime_error(path + ": no data rows");
  return csv;
}

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  if (ec != std::errc()) throw std::runtime_error("plot number formatting failed");
  return {buf, ptr};
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("plot number formatting failed");
  return {buf, ptr};
}

}  // namespace

std::string render_gap_svg(const std::vector<MetricsCsv>& runs, bool log_x) {
  if (runs.empty()) throw std::invalid_argument("render_gap_svg: no runs");
  const int round_col = runs.front().column("round");
  const int gap_col = runs.front().column("gap_raw");
  if (round_col < 0 || gap_col < 0)
    throw std::runtime_error("render_gap_svg: runs must carry round and gap_raw columns");
  const std::size_t points = runs.front().rows.size();
  for (const MetricsCsv& run : runs) {
    if (run.rows.size() != points)
      throw std::runtime_error("render_gap_svg: runs disagree on recorded rounds");
    if (run.column("round") != round_col || run.column("gap_raw") != gap_col)
      throw std::runtime_error("render_gap_svg: runs disagree on column layout");
  }

  std::vector<double> round(points), mean(points), sd(points);
  for (std::size_t p = 0; p < points; ++p) {
    round[p] = runs.front().rows[p][round_col];
    double sum = 0.0;
    for (const MetricsCsv& run : runs) {
      if (run.rows[p][round_col] != round[p])
        throw std::runtime_error("render_gap_svg: runs disagree on recorded rounds");
      sum += run.rows[p][gap_col];
    }
    mean[p] = sum / runs.size();
    double ss = 0.0;
    for (const MetricsCsv& run : runs) {
      const double d = run.rows[p][gap_col] - mean[p];
      ss += d * d;
    }
    sd[p] = runs.size() > 1 ? std::sqrt(ss / (runs.size() - 1)) : 0.0;
  }

  auto x_of = [&](double r) { return log_x ? std::log10(std::max(r, 1.0)) : r; };
  double x_lo = x_of(round.front()), x_hi = x_of(round.back());
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  double y_lo = 0.0, y_hi = 0.0;
  for (std::size_t p = 0; p < points; ++p) y_hi = std::max(y_hi, mean[p] + sd[p]);
  if (y_hi <= y_lo) y_hi = 1.0;
  y_hi *= 1.05;

  const double width = 800, height = 520;
  const double ml = 70, mr = 20, mt = 20, mb = 50;
  auto px = [&](double r) { return ml + (x_of(r) - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
  auto py = [&](double v) { return height - mb - (v - y_lo) / (y_hi - y_lo) * (height - mt - mb); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
         fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + " " + fixed(height, 0) +
         "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fixed(width, 0) + "\" height=\"" + fixed(height, 0) +
         "\" fill=\"white\"/>\n";

  // Axes.
  svg += "<line x1=\"" + fixed(ml) + "\" y1=\"" + fixed(height - mb) + "\" x2=\"" +
         fixed(width - mr) + "\" y2=\"" + fixed(height - mb) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fixed(ml) + "\" y1=\"" + fixed(mt) + "\" x2=\"" + fixed(ml) + "\" y2=\"" +
         fixed(height - mb) + "\" stroke=\"black\"/>\n";

  // X ticks: decades when logarithmic, five uniform ticks otherwise.
  if (log_x) {
    for (int e = static_cast<int>(std::floor(x_lo)); e <= static_cast<int>(std::ceil(x_hi)); ++e) {
      const double r = std::pow(10.0, e);
      if (x_of(r) < x_lo - 1e-9 || x_of(r) > x_hi + 1e-9) continue;
      svg += "<line x1=\"" + fixed(px(r)) + "\" y1=\"" + fixed(height - mb) + "\" x2=\"" +
             fixed(px(r)) + "\" y2=\"" + fixed(height - mb + 6) + "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + fixed(px(r)) + "\" y=\"" + fixed(height - mb + 22) +
             "\" font-size=\"13\" text-anchor=\"middle\">1e" + std::to_string(e) + "</text>\n";
    }
  } else {
    for (int k = 0; k <= 4; ++k) {
      const double r = round.front() + (round.back() - round.front()) * k / 4.0;
      svg += "<line x1=\"" + fixed(px(r)) + "\" y1=\"" + fixed(height - mb) + "\" x2=\"" +
             fixed(px(r)) + "\" y2=\"" + fixed(height - mb + 6) + "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + fixed(px(r)) + "\" y=\"" + fixed(height - mb + 22) +
             "\" font-size=\"13\" text-anchor=\"middle\">" + shortest(std::round(r)) + "</text>\n";
    }
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = y_lo + (y_hi - y_lo) * k / 4.0;
    svg += "<line x1=\"" + fixed(ml - 6) + "\" y1=\"" + fixed(py(v)) + "\" x2=\"" + fixed(ml) +
           "\" y2=\"" + fixed(py(v)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fixed(ml - 10) + "\" y=\"" + fixed(py(v) + 4) +
           "\" font-size=\"13\" text-anchor=\"end\">" + fixed(v, 4) + "</text>\n";
  }
  svg += "<text x=\"" + fixed((ml + width - mr) / 2) + "\" y=\"" + fixed(height - 10) +
         "\" font-size=\"14\" text-anchor=\"middle\">round" +
         std::string(log_x ? " (log scale)" : "") + "</text>\n";
  svg += "<text x=\"16\" y=\"" + fixed((mt + height - mb) / 2) +
         "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fixed((mt + height - mb) / 2) + ")\">CCE gap</text>\n";

  if (runs.size() > 1) {
    std::string band = "<polygon fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\" points=\"";
    for (std::size_t p = 0; p < points; ++p)
      band += fixed(px(round[p])) + "," + fixed(py(mean[p] + sd[p])) + " ";
    for (std::size_t p = points; p-- > 0;)
      band += fixed(px(round[p])) + "," + fixed(py(std::max(y_lo, mean[p] - sd[p]))) + " ";
    band += "\"/>\n";
    svg += band;
  }

  std::string line = "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t p = 0; p < points; ++p)
    line += fixed(px(round[p])) + "," + fixed(py(mean[p])) + " ";
  line += "\"/>\n";
  svg += line;
  svg += "</svg>\n";
  return svg;
}

}  // namespace mgdlrc
