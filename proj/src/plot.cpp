#include "rggloc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace rggloc {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axes {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
    return;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

void header(std::ostream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
     << "</text>\n";
}

void frame(std::ostream& os, const Axes& ax, const std::string& xlabel, const std::string& ylabel) {
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
     << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = ax.x0 + (ax.x1 - ax.x0) * i / 4.0;
    const double yv = ax.y0 + (ax.y1 - ax.y0) * i / 4.0;
    os << "<text x=\"" << num(ax.px(xv)) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
       << num(xv) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(ax.py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << escape(xlabel)
     << "</text>\n";
  if (!ylabel.empty()) {
    os << "<text transform=\"translate(16," << kHeight / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(ylabel) << "</text>\n";
  }
}

}  // namespace

void write_histogram_svg(std::ostream& os, const std::string& title, const std::string& xlabel,
                         const std::vector<double>& values, int bins) {
  bins = std::max(bins, 1);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (values.empty()) lo = 0.0, hi = 1.0;
  if (!(hi > lo)) lo -= 0.5, hi += 0.5;
  std::vector<double> counts(bins, 0.0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    counts[std::clamp(b, 0, bins - 1)] += 1.0;
  }
  const double top = std::max(1.0, *std::max_element(counts.begin(), counts.end()));
  Axes ax{lo, hi, 0.0, top * 1.05};
  header(os, title);
  frame(os, ax, xlabel, "count");
  const double bw = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    const double x0 = ax.px(lo + b * bw), x1 = ax.px(lo + (b + 1) * bw);
    const double y = ax.py(counts[b]);
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(x1 - x0) << "\" height=\""
       << num(ax.py(0.0) - y) << "\" fill=\"" << kPalette[0] << "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  os << "</svg>\n";
}

void write_line_plot_svg(std::ostream& os, const std::string& title, const std::string& xlabel,
                         const std::string& ylabel, const std::vector<Series>& series,
                         const std::optional<ReferenceLine>& reference) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double e = s.y_err.empty() ? 0.0 : s.y_err[i];
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i] - e);
      y1 = std::max(y1, s.y[i] + e);
    }
  }
  if (reference) {
    y0 = std::min(y0, reference->y);
    y1 = std::max(y1, reference->y);
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  pad(x0, x1);
  pad(y0, y1);
  Axes ax{x0, x1, y0, y1};
  header(os, title);
  frame(os, ax, xlabel, ylabel);
  if (reference) {
    os << "<line x1=\"" << num(ax.px(x0)) << "\" x2=\"" << num(ax.px(x1)) << "\" y1=\"" << num(ax.py(reference->y))
       << "\" y2=\"" << num(ax.py(reference->y)) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
    os << "<text x=\"" << num(ax.px(x1) - 4) << "\" y=\"" << num(ax.py(reference->y) - 6)
       << "\" text-anchor=\"end\" fill=\"gray\">" << escape(reference->label) << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << num(ax.px(s.x[i])) << ',' << num(ax.py(s.y[i])) << ' ';
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << "<circle cx=\"" << num(ax.px(s.x[i])) << "\" cy=\"" << num(ax.py(s.y[i])) << "\" r=\"3\" fill=\"" << colour
         << "\"/>\n";
      if (!s.y_err.empty() && s.y_err[i] > 0.0) {
        os << "<line x1=\"" << num(ax.px(s.x[i])) << "\" x2=\"" << num(ax.px(s.x[i])) << "\" y1=\""
           << num(ax.py(s.y[i] - s.y_err[i])) << "\" y2=\"" << num(ax.py(s.y[i] + s.y_err[i])) << "\" stroke=\""
           << colour << "\"/>\n";
      }
    }
    os << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 16 + 14 * k << "\" fill=\"" << colour << "\">"
       << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
}

void write_heatmap_svg(std::ostream& os, const std::string& title, int cols, int rows,
                       const std::vector<double>& values, const std::vector<bool>& outline) {
  const double top = values.empty() ? 1.0 : std::max(1e-300, *std::max_element(values.begin(), values.end()));
  const double cell = std::min((kWidth - kLeft - kRight) / cols, (kHeight - kTop - kBottom) / rows);
  header(os, title);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      const double v = values[i];
      if (v <= 0.0 && !outline[i]) continue;
      const int shade = 255 - static_cast<int>(std::lround(255.0 * std::clamp(v / top, 0.0, 1.0)));
      os << "<rect x=\"" << num(kLeft + c * cell) << "\" y=\"" << num(kTop + r * cell) << "\" width=\"" << num(cell)
         << "\" height=\"" << num(cell) << "\" fill=\"rgb(255," << shade << ',' << shade << ")\"";
      if (outline[i]) os << " stroke=\"black\" stroke-width=\"" << num(std::max(0.5, cell / 8)) << "\"";
      os << "/>\n";
    }
  }
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(cols * cell) << "\" height=\""
     << num(rows * cell) << "\" fill=\"none\" stroke=\"gray\"/>\n";
  os << "</svg>\n";
}

}  // namespace rggloc
