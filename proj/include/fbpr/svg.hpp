#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fbpr::svg {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

struct Box {
  double x;
  double q1, median, q3, whisker_lo, whisker_hi;
};

namespace detail {

inline const char* color(std::size_t k) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return palette[k % (sizeof palette / sizeof *palette)];
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Step of 1, 2 or 5 times a power of ten giving about `target` intervals.
inline double nice_step(double span, int target = 6) {
  if (!(span > 0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

class Frame {
 public:
  Frame(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (x1_ <= x0_) x1_ = x0_ + 1;
    if (y1_ <= y0_) y1_ = y0_ + 1;
  }
  static constexpr double W = 760, H = 500, L = 70, R = 150, T = 40, B = 60;
  double px(double x) const { return L + (x - x0_) / (x1_ - x0_) * (W - L - R); }
  double py(double y) const { return H - B - (y - y0_) / (y1_ - y0_) * (H - T - B); }

  std::string open(const std::string& title, const std::string& xlabel, const std::string& ylabel) const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n"
       << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << escape(xlabel)
       << "</text>\n"
       << "<text transform=\"translate(18," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(ylabel) << "</text>\n";
    return os.str();
  }

  std::string axes() const {
    std::ostringstream os;
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double sx = nice_step(x1_ - x0_), sy = nice_step(y1_ - y0_);
    for (double v = std::ceil(x0_ / sx) * sx; v <= x1_ + 1e-9; v += sx)
      os << "<line x1=\"" << px(v) << "\" y1=\"" << H - B << "\" x2=\"" << px(v) << "\" y2=\"" << H - B + 5
         << "\" stroke=\"black\"/><text x=\"" << px(v) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
         << num(v) << "</text>\n";
    for (double v = std::ceil(y0_ / sy) * sy; v <= y1_ + 1e-9; v += sy)
      os << "<line x1=\"" << L - 5 << "\" y1=\"" << py(v) << "\" x2=\"" << L << "\" y2=\"" << py(v)
         << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">"
         << num(v) << "</text>\n";
    return os.str();
  }

  std::string polyline(const Series& s, std::size_t k) const {
    std::ostringstream os;
    os << "<polyline fill=\"none\" stroke=\"" << color(k) << "\" stroke-width=\"2\""
       << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (const auto& [x, y] : s.points) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    for (const auto& [x, y] : s.points)
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"2.5\" fill=\"" << color(k) << "\"/>\n";
    return os.str();
  }

  std::string legend(const std::vector<Series>& series, std::size_t color_offset = 0) const {
    std::ostringstream os;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double y = T + 12 + 18 * static_cast<double>(k);
      os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << y << "\" x2=\"" << W - R + 36 << "\" y2=\"" << y
         << "\" stroke=\"" << color(k + color_offset) << "\" stroke-width=\"2\""
         << (series[k].dashed ? " stroke-dasharray=\"6,4\"" : "") << "/><text x=\"" << W - R + 42 << "\" y=\""
         << y + 4 << "\">" << escape(series[k].name) << "</text>\n";
    }
    return os.str();
  }

 private:
  double x0_, x1_, y0_, y1_;
};

inline std::pair<double, double> extent(const std::vector<Series>& series, bool ys) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      const double v = ys ? p.second : p.first;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(lo <= hi)) return {0.0, 1.0};
  return {lo, hi};
}

}  // namespace detail

inline std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& series) {
  const auto [x0, x1] = detail::extent(series, false);
  auto [y0, y1] = detail::extent(series, true);
  y0 = std::min(y0, 0.0);
  y1 += 0.05 * (y1 - y0);
  const detail::Frame f(x0, x1, y0, y1);
  std::string out = f.open(title, xlabel, ylabel) + f.axes();
  for (std::size_t k = 0; k < series.size(); ++k) out += f.polyline(series[k], k);
  return out + f.legend(series) + "</svg>\n";
}

// Grey-scale cells with value(x, y) in [0, vmax]; absent cells stay light grey.
inline std::string heatmap(const std::string& title, const std::string& xlabel, const std::string& ylabel, int x0,
                           int x1, int y0, int y1, const std::function<std::optional<double>(int, int)>& value,
                           double vmax, const std::vector<Series>& overlays) {
  const detail::Frame f(x0 - 0.5, x1 + 0.5, y0 - 0.5, y1 + 0.5);
  std::ostringstream os;
  os << f.open(title, xlabel, ylabel);
  for (int x = x0; x <= x1; ++x)
    for (int y = y0; y <= y1; ++y) {
      const auto v = value(x, y);
      const double px0 = f.px(x - 0.5), px1 = f.px(x + 0.5), py0 = f.py(y + 0.5), py1 = f.py(y - 0.5);
      std::string fill = "#f4f4f4";
      if (v) {
        const int g = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(*v / vmax, 0.0, 1.0))));
        std::ostringstream c;
        c << "rgb(" << g << ',' << g << ',' << g << ')';
        fill = c.str();
      }
      os << "<rect x=\"" << px0 << "\" y=\"" << py0 << "\" width=\"" << px1 - px0 << "\" height=\"" << py1 - py0
         << "\" fill=\"" << fill << "\"/>\n";
    }
  os << f.axes();
  for (std::size_t k = 0; k < overlays.size(); ++k) os << f.polyline(overlays[k], k + 1);
  // Color bar.
  const double bx = detail::Frame::W - detail::Frame::R + 100, top = detail::Frame::T + 80, h = 200;
  for (int k = 0; k < 20; ++k) {
    const int g = static_cast<int>(std::lround(255.0 * (1.0 - k / 19.0)));
    os << "<rect x=\"" << bx << "\" y=\"" << top + h - (k + 1) * h / 20 << "\" width=\"16\" height=\"" << h / 20 + 0.5
       << "\" fill=\"rgb(" << g << ',' << g << ',' << g << ")\"/>\n";
  }
  os << "<text x=\"" << bx + 20 << "\" y=\"" << top + 4 << "\">" << detail::num(vmax) << "</text><text x=\""
     << bx + 20 << "\" y=\"" << top + h + 4 << "\">0</text>\n";
  return os.str() + f.legend(overlays, 1) + "</svg>\n";
}

inline std::string boxplot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<Box>& boxes) {
  double xlo = INFINITY, xhi = -INFINITY, yhi = 0;
  for (const auto& b : boxes) {
    xlo = std::min(xlo, b.x);
    xhi = std::max(xhi, b.x);
    yhi = std::max(yhi, b.whisker_hi);
  }
  if (boxes.empty()) xlo = 0, xhi = 1;
  const detail::Frame f(xlo - 1, xhi + 1, 0, yhi * 1.05 + 1e-9);
  std::ostringstream os;
  os << f.open(title, xlabel, ylabel) << f.axes();
  const double half = 0.3 * (f.px(1) - f.px(0));
  for (const auto& b : boxes) {
    const double cx = f.px(b.x);
    os << "<line x1=\"" << cx << "\" y1=\"" << f.py(b.whisker_lo) << "\" x2=\"" << cx << "\" y2=\"" << f.py(b.q1)
       << "\" stroke=\"black\" stroke-dasharray=\"3,2\"/>\n"
       << "<line x1=\"" << cx << "\" y1=\"" << f.py(b.q3) << "\" x2=\"" << cx << "\" y2=\"" << f.py(b.whisker_hi)
       << "\" stroke=\"black\" stroke-dasharray=\"3,2\"/>\n"
       << "<line x1=\"" << cx - half / 2 << "\" y1=\"" << f.py(b.whisker_lo) << "\" x2=\"" << cx + half / 2
       << "\" y2=\"" << f.py(b.whisker_lo) << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << cx - half / 2 << "\" y1=\"" << f.py(b.whisker_hi) << "\" x2=\"" << cx + half / 2
       << "\" y2=\"" << f.py(b.whisker_hi) << "\" stroke=\"black\"/>\n"
       << "<rect x=\"" << cx - half << "\" y=\"" << f.py(b.q3) << "\" width=\"" << 2 * half << "\" height=\""
       << f.py(b.q1) - f.py(b.q3) << "\" fill=\"#cfe0f3\" stroke=\"#1f77b4\"/>\n"
       << "<circle cx=\"" << cx << "\" cy=\"" << f.py(b.median) << "\" r=\"3\" fill=\"#d62728\"/>\n";
  }
  return os.str() + "</svg>\n";
}

}  // namespace fbpr::svg
