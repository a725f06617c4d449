#pragma once

#include <string>
#include <vector>

namespace mgdlrc {

struct MetricsCsv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

// Parses a metrics CSV (comment lines start with '#').  Malformed input
// raises std::runtime_error naming the offending line.
MetricsCsv read_metrics_csv(const std::string& path);

// Line chart of the mean gap across runs with a +-1 standard deviation band
// (band omitted for a single run).  Self-contained SVG text, byte-for-byte
// deterministic for identical inputs.  Runs must share the same recorded
// round set.
std::string render_gap_svg(const std::vector<MetricsCsv>& runs, bool log_x);

}  // namespace mgdlrc
