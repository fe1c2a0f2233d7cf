#pragma once

#include <string>
#include <vector>

namespace eoslab {

// Minimal self-contained SVG polyline chart with optional log axes. Intended
// for diagnostic trajectory plots; no external assets.
class LineChart {
 public:
  LineChart(std::string title, std::string x_label, std::string y_label,
            bool log_x, bool log_y);

  void add_series(const std::string& name, const std::vector<double>& xs,
                  const std::vector<double>& ys);

  // Rendered document; empty charts produce an axes-only frame.
  std::string render() const;
  void write(const std::string& path) const;

 private:
  struct SeriesData {
    std::string name;
    std::vector<double> xs, ys;
  };

  std::string title_, x_label_, y_label_;
  bool log_x_, log_y_;
  std::vector<SeriesData> series_;
};

}  // namespace eoslab
