#include "eoslab/svg.hpp"

#include "eoslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace eoslab {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

LineChart::LineChart(std::string title, std::string x_label,
                     std::string y_label, bool log_x, bool log_y)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      log_x_(log_x),
      log_y_(log_y) {}

void LineChart::add_series(const std::string& name,
                           const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("LineChart: size mismatch");
  series_.push_back({name, xs, ys});
}

std::string LineChart::render() const {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  auto usable = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    if (log_x_ && x <= 0.0) return false;
    if (log_y_ && y <= 0.0) return false;
    return true;
  };
  for (const auto& s : series_)
    for (size_t i = 0; i < s.xs.size(); ++i)
      if (usable(s.xs[i], s.ys[i])) {
        xmin = std::min(xmin, s.xs[i]);
        xmax = std::max(xmax, s.xs[i]);
        ymin = std::min(ymin, s.ys[i]);
        ymax = std::max(ymax, s.ys[i]);
      }
  if (!(xmin < xmax)) { xmin = log_x_ ? 1.0 : 0.0; xmax = xmin + 1.0; }
  if (!(ymin < ymax)) { ymin = log_y_ ? 1.0 : 0.0; ymax = ymin + 1.0; }

  auto tx = [&](double x) {
    const double a = log_x_ ? std::log10(x) : x;
    const double lo = log_x_ ? std::log10(xmin) : xmin;
    const double hi = log_x_ ? std::log10(xmax) : xmax;
    return kMarginLeft +
           (a - lo) / (hi - lo) * (kWidth - kMarginLeft - kMarginRight);
  };
  auto ty = [&](double y) {
    const double a = log_y_ ? std::log10(y) : y;
    const double lo = log_y_ ? std::log10(ymin) : ymin;
    const double hi = log_y_ ? std::log10(ymax) : ymax;
    return kHeight - kMarginBottom -
           (a - lo) / (hi - lo) * (kHeight - kMarginTop - kMarginBottom);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title_
      << "</text>\n";

  // frame
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
      << kWidth - kMarginLeft - kMarginRight << "\" height=\""
      << kHeight - kMarginTop - kMarginBottom
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  auto ticks = [&](double lo, double hi, bool log_axis) {
    std::vector<double> ts;
    if (log_axis) {
      const int d0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
      const int d1 = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
      const int stride = std::max(1, (d1 - d0) / 8);
      for (int d = d0; d <= d1; d += stride) ts.push_back(std::pow(10.0, d));
    } else {
      const double span = hi - lo;
      const double step = std::pow(10.0, std::floor(std::log10(span / 4)));
      double v = std::ceil(lo / step) * step;
      for (; v <= hi + 1e-12 * span && ts.size() < 12; v += step)
        ts.push_back(v);
    }
    return ts;
  };

  for (double v : ticks(xmin, xmax, log_x_)) {
    const double x = tx(v);
    out << "<line x1=\"" << x << "\" y1=\"" << kHeight - kMarginBottom
        << "\" x2=\"" << x << "\" y2=\"" << kHeight - kMarginBottom + 5
        << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << kHeight - kMarginBottom + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" << fmt(v) << "</text>\n";
  }
  for (double v : ticks(ymin, ymax, log_y_)) {
    const double y = ty(v);
    out << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << y << "\" x2=\""
        << kMarginLeft << "\" y2=\"" << y << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" << fmt(v) << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">" << x_label_ << "</text>\n";
  out << "<text x=\"18\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 " << kHeight / 2 << ")\">"
      << y_label_ << "</text>\n";

  size_t color = 0;
  double legend_y = kMarginTop + 14;
  for (const auto& s : series_) {
    const char* stroke = kPalette[color % (sizeof(kPalette) / sizeof(*kPalette))];
    ++color;
    out << "<polyline fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"1.2\" points=\"";
    bool open = false;
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if (!usable(s.xs[i], s.ys[i])) continue;
      out << (open ? " " : "") << fmt(tx(s.xs[i])) << "," << fmt(ty(s.ys[i]));
      open = true;
    }
    out << "\"/>\n";
    out << "<text x=\"" << kWidth - kMarginRight - 8 << "\" y=\"" << legend_y
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
        << "fill=\"" << stroke << "\">" << s.name << "</text>\n";
    legend_y += 14;
  }
  out << "</svg>\n";
  return out.str();
}

void LineChart::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("LineChart: cannot open " + path);
  out << render();
  if (!out) throw NumericalError("LineChart: write failed for " + path);
}

}  // namespace eoslab
