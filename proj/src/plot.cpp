#include "dbalign/harness.hpp"

#include "dbalign/error.hpp"
#include "dbalign/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dbalign {

namespace {

/*
 * Chart geometry, SVG convention (origin top-left, y grows downward):
 *
 *   <------------- kWidth -------------->
 *   | kLeft |<------ plot area ----->| kRight
 *   kTop above the plot, kBottom below it (x-axis labels).
 */
constexpr double kWidth = 680.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 56.0;

struct Series {
  std::string name;
  std::string color;
  struct Point {
    double x, y, half;
  };
  std::vector<Point> points;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

class Frame {
 public:
  Frame(double x_max, double y_max) : x_max_(x_max), y_max_(y_max) {}

  double px(double x) const { return kLeft + x / x_max_ * (kWidth - kLeft - kRight); }
  double py(double y) const {
    const double clamped = std::clamp(y, 0.0, y_max_);
    return kTop + (1.0 - clamped / y_max_) * (kHeight - kTop - kBottom);
  }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }

 private:
  double x_max_;
  double y_max_;
};

double nice_ceiling(double v) {
  if (!(v > 0.0)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (m * mag >= v) return m * mag;
  }
  return 10.0 * mag;
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& y_label, double y_step) {
  const double x0 = f.px(0.0), x1 = f.px(f.x_max());
  const double y0 = f.py(0.0), y1 = f.py(f.y_max());
  svg << "<g class=\"axes\" stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
  svg << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x1) << "\" y2=\"" << fmt(y0)
      << "\"/>\n";
  svg << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0) << "\" y2=\"" << fmt(y1)
      << "\"/>\n</g>\n";

  svg << "<g class=\"xticks\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
  const int x_ticks = static_cast<int>(std::round(f.x_max() / 0.5));
  for (int k = 0; k <= x_ticks; ++k) {
    const double x = 0.5 * k;
    svg << "<line x1=\"" << fmt(f.px(x)) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(f.px(x)) << "\" y2=\""
        << fmt(y0 + 5) << "\" stroke=\"#333\"/>";
    svg << "<text x=\"" << fmt(f.px(x)) << "\" y=\"" << fmt(y0 + 18) << "\">" << fmt(x) << "</text>\n";
  }
  svg << "</g>\n";

  svg << "<g class=\"yticks\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">\n";
  const int y_ticks = static_cast<int>(std::round(f.y_max() / y_step));
  for (int k = 0; k <= y_ticks; ++k) {
    const double y = y_step * k;
    svg << "<line x1=\"" << fmt(x0 - 5) << "\" y1=\"" << fmt(f.py(y)) << "\" x2=\"" << fmt(x0) << "\" y2=\""
        << fmt(f.py(y)) << "\" stroke=\"#333\"/>";
    svg << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(f.py(y) + 4) << "\">" << io::format_double(y)
        << "</text>\n";
  }
  svg << "</g>\n";

  svg << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(kHeight - 14)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">I / ln n</text>\n";
  svg << "<text transform=\"translate(18," << fmt((y0 + y1) / 2)
      << ") rotate(-90)\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << y_label
      << "</text>\n";

  // Partial-recovery (I = ln n) and exact-recovery (I = 2 ln n) thresholds.
  for (double x : {1.0, 2.0}) {
    svg << "<line class=\"reference\" x1=\"" << fmt(f.px(x)) << "\" y1=\"" << fmt(y0) << "\" x2=\""
        << fmt(f.px(x)) << "\" y2=\"" << fmt(y1) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
}

void draw_series(std::ostringstream& svg, const Frame& f, Series s) {
  std::sort(s.points.begin(), s.points.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  svg << "<g class=\"series\" data-name=\"" << s.name << "\" stroke=\"" << s.color << "\" fill=\"" << s.color
      << "\">\n";
  if (s.points.size() > 1) {
    svg << "<polyline fill=\"none\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      svg << (i ? " " : "") << fmt(f.px(s.points[i].x)) << ',' << fmt(f.py(s.points[i].y));
    }
    svg << "\"/>\n";
  }
  for (const auto& p : s.points) {
    const double x = f.px(p.x);
    if (p.half > 0.0) {
      svg << "<line class=\"ci\" x1=\"" << fmt(x) << "\" y1=\"" << fmt(f.py(p.y - p.half)) << "\" x2=\"" << fmt(x)
          << "\" y2=\"" << fmt(f.py(p.y + p.half)) << "\"/>";
    }
    svg << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(f.py(p.y)) << "\" r=\"3\"/>\n";
  }
  svg << "</g>\n";
}

}  // namespace

std::string render_plot(const std::vector<SweepCell>& cells, PlotKind kind) {
  if (cells.empty()) throw Error(ErrorKind::InvalidArgument, "cannot plot an empty sweep");

  std::vector<Series> series;
  std::string y_label;
  if (kind == PlotKind::SuccessVsInformation) {
    y_label = "exact recovery rate";
    Series s{"map_success_rate", "#1f77b4", {}};
    for (const auto& c : cells) {
      if (std::isfinite(c.info_ratio) && std::isfinite(c.map_success_rate)) {
        s.points.push_back({c.info_ratio, c.map_success_rate, c.map_success_halfwidth});
      }
    }
    series.push_back(std::move(s));
  } else {
    y_label = "mean errors per trial";
    Series fn{"bht_mean_fn", "#d62728", {}};
    Series fp{"bht_mean_fp", "#2ca02c", {}};
    for (const auto& c : cells) {
      if (!std::isfinite(c.info_ratio)) continue;
      if (std::isfinite(c.bht_mean_fn)) {
        fn.points.push_back({c.info_ratio, c.bht_mean_fn, std::isfinite(c.bht_fn_halfwidth) ? c.bht_fn_halfwidth : 0.0});
      }
      if (std::isfinite(c.bht_mean_fp)) {
        fp.points.push_back({c.info_ratio, c.bht_mean_fp, std::isfinite(c.bht_fp_halfwidth) ? c.bht_fp_halfwidth : 0.0});
      }
    }
    series.push_back(std::move(fn));
    series.push_back(std::move(fp));
  }

  double x_hi = 2.5;
  double y_hi = 0.0;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      x_hi = std::max(x_hi, p.x);
      y_hi = std::max(y_hi, p.y + p.half);
    }
  }
  x_hi = std::ceil(x_hi * 2.0 + 1e-9) / 2.0;
  const bool rates = kind == PlotKind::SuccessVsInformation;
  const double y_max = rates ? 1.0 : nice_ceiling(y_hi);
  const double y_step = rates ? 0.25 : y_max / 5.0;
  const Frame frame(x_hi, y_max);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "<metadata id=\"cells\"><![CDATA[\n" << cells_to_csv(cells) << "]]></metadata>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  axes(svg, frame, y_label, y_step);
  for (auto& s : series) draw_series(svg, frame, std::move(s));
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::vector<SweepCell>& cells, PlotKind kind, const std::filesystem::path& path) {
  io::write_text(path, render_plot(cells, kind));
}

}  // namespace dbalign
