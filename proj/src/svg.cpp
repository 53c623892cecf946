#include "rlvm/svg.hpp"

#include <algorithm>
#include <cmath>

#include "rlvm/util.hpp"

namespace rlvm {

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 60;

const char* kPalette[] = {"#4c78a8", "#f58518", "#54a24b", "#e45756",
                          "#72b7b2", "#b279a2", "#9d755d", "#bab0ac"};

std::string coord(double v) { return fmt_g(v, 6); }

struct Scale {
  double lo = 0.0, hi = 1.0;
  double px0 = 0.0, px1 = 1.0;
  double to_px(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

// Round axis bound up to one significant step so tick labels stay short.
double nice_ceil(double v) {
  if (v <= 0.0) return 1.0;
  double mag = std::pow(10.0, std::floor(std::log10(v)));
  double norm = v / mag;
  double step = norm <= 1.0 ? 1.0 : norm <= 2.0 ? 2.0 : norm <= 5.0 ? 5.0 : 10.0;
  return step * mag;
}

void append_text(std::string& out, double x, double y, const std::string& text,
                 const std::string& anchor, int size, const std::string& extra = "") {
  out += "<text x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" font-size=\"" +
         std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\"" +
         extra + ">" + text + "</text>\n";
}

void append_axes(std::string& out, const std::string& title, const std::string& x_label,
                 const std::string& y_label, const Scale& ys) {
  append_text(out, kWidth / 2.0, 22, title, "middle", 15);
  append_text(out, kWidth / 2.0, kHeight - 12, x_label, "middle", 12);
  append_text(out, 16, (kMarginTop + kHeight - kMarginBottom) / 2.0, y_label, "middle", 12,
              " transform=\"rotate(-90 16 " +
                  coord((kMarginTop + kHeight - kMarginBottom) / 2.0) + ")\"");
  out += "<line x1=\"" + coord(kMarginLeft) + "\" y1=\"" + coord(kHeight - kMarginBottom) +
         "\" x2=\"" + coord(kWidth - kMarginRight) + "\" y2=\"" +
         coord(kHeight - kMarginBottom) + "\" stroke=\"#333\"/>\n";
  out += "<line x1=\"" + coord(kMarginLeft) + "\" y1=\"" + coord(kMarginTop) + "\" x2=\"" +
         coord(kMarginLeft) + "\" y2=\"" + coord(kHeight - kMarginBottom) +
         "\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double v = ys.lo + (ys.hi - ys.lo) * k / 4.0;
    double y = ys.to_px(v);
    out += "<line x1=\"" + coord(kMarginLeft - 4) + "\" y1=\"" + coord(y) + "\" x2=\"" +
           coord(kMarginLeft) + "\" y2=\"" + coord(y) + "\" stroke=\"#333\"/>\n";
    append_text(out, kMarginLeft - 8, y + 4, fmt_g(v, 4), "end", 10);
  }
}

void append_legend(std::string& out, const std::vector<std::string>& series) {
  double x = kMarginLeft + 8;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    out += "<rect x=\"" + coord(x) + "\" y=\"" + coord(kMarginTop - 12) +
           "\" width=\"10\" height=\"10\" fill=\"" + std::string(color) + "\"/>\n";
    append_text(out, x + 14, kMarginTop - 3, series[s], "start", 11);
    x += 14.0 + 7.0 * static_cast<double>(series[s].size()) + 18.0;
  }
}

std::string svg_open() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
         std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& series,
                            const std::vector<BarGroup>& groups) {
  double max_v = 0.0;
  for (const BarGroup& g : groups)
    for (double v : g.values)
      if (std::isfinite(v)) max_v = std::max(max_v, v);
  Scale ys{0.0, nice_ceil(max_v), static_cast<double>(kHeight - kMarginBottom),
           static_cast<double>(kMarginTop)};

  std::string out = svg_open();
  append_axes(out, title, "", y_label, ys);
  append_legend(out, series);

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double group_w = groups.empty() ? plot_w : plot_w / static_cast<double>(groups.size());
  const double bar_w =
      series.empty() ? group_w : group_w * 0.8 / static_cast<double>(series.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double gx = kMarginLeft + group_w * static_cast<double>(g) + group_w * 0.1;
    for (std::size_t s = 0; s < groups[g].values.size(); ++s) {
      double v = groups[g].values[s];
      if (!std::isfinite(v)) continue;
      double y = ys.to_px(v);
      double h = static_cast<double>(kHeight - kMarginBottom) - y;
      const char* color = kPalette[s % std::size(kPalette)];
      out += "<rect x=\"" + coord(gx + bar_w * static_cast<double>(s)) + "\" y=\"" + coord(y) +
             "\" width=\"" + coord(bar_w * 0.92) + "\" height=\"" + coord(h) + "\" fill=\"" +
             std::string(color) + "\"/>\n";
    }
    append_text(out, gx + group_w * 0.4, kHeight - kMarginBottom + 16, groups[g].label,
                "middle", 11);
  }
  out += "</svg>\n";
  return out;
}

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<LineSeries>& series) {
  double max_v = 0.0;
  std::size_t max_n = 1;
  for (const LineSeries& s : series) {
    max_n = std::max(max_n, s.y.size());
    for (double v : s.y)
      if (std::isfinite(v)) max_v = std::max(max_v, v);
  }
  Scale ys{0.0, nice_ceil(max_v), static_cast<double>(kHeight - kMarginBottom),
           static_cast<double>(kMarginTop)};
  Scale xs{0.0, static_cast<double>(max_n > 1 ? max_n - 1 : 1),
           static_cast<double>(kMarginLeft), static_cast<double>(kWidth - kMarginRight)};

  std::string out = svg_open();
  append_axes(out, title, x_label, y_label, ys);
  std::vector<std::string> names;
  for (const LineSeries& s : series) names.push_back(s.name);
  append_legend(out, names);

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < series[s].y.size(); ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      points += coord(xs.to_px(static_cast<double>(i))) + ',' +
                coord(ys.to_px(series[s].y[i])) + ' ';
    }
    if (!points.empty()) points.pop_back();
    out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.2\"/>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    double v = xs.lo + (xs.hi - xs.lo) * k / 4.0;
    append_text(out, xs.to_px(v), kHeight - kMarginBottom + 16, fmt_g(v, 4), "middle", 10);
  }
  out += "</svg>\n";
  return out;
}

void write_svg(const std::filesystem::path& path, const std::string& svg) {
  write_file_atomic(path, svg);
}

}  // namespace rlvm
