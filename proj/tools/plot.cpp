#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace metastab::cli {

namespace {

struct Row {
  std::string figure;
  double m = 0, n = 0, mean = 0, se = 0;
};

struct Point {
  double x, y, se;
};

struct Series {
  std::string label;
  std::vector<Point> points;
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
constexpr double kWidth = 640, kHeight = 420, kLeft = 80, kRight = 130, kTop = 40, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::vector<Row> parse(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "figure,m,n,error_mean,error_se") {
    throw std::runtime_error("sweep CSV must start with `figure,m,n,error_mean,error_se`");
  }
  std::vector<Row> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> f;
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 5) throw std::runtime_error("sweep CSV line " + std::to_string(number) + ": expected 5 fields");
    try {
      rows.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
    } catch (const std::exception&) {
      throw std::runtime_error("sweep CSV line " + std::to_string(number) + ": invalid number");
    }
  }
  return rows;
}

class Axis {
 public:
  Axis(double lo, double hi, bool log, double from, double to) : log_(log), from_(from), to_(to) {
    lo_ = log ? std::log10(lo) : lo;
    hi_ = log ? std::log10(hi) : hi;
    if (hi_ - lo_ < 1e-12) {
      lo_ -= 0.5;
      hi_ += 0.5;
    }
  }
  double operator()(double v) const {
    const double t = ((log_ ? std::log10(v) : v) - lo_) / (hi_ - lo_);
    return from_ + t * (to_ - from_);
  }
  bool log() const { return log_; }

 private:
  bool log_;
  double lo_, hi_, from_, to_;
};

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo > 0 ? hi - lo : 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double s : {1.0, 2.0, 5.0, 10.0}) {
    if (s * mag >= raw) {
      step = s * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  return out;
}

std::string chart(const std::string& title, const std::string& xlabel, const std::vector<Series>& series) {
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  std::vector<double> xs;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y - 2 * p.se);
      yhi = std::max(yhi, p.y + 2 * p.se);
      xs.push_back(p.x);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  const bool log_x = xlo > 0 && xhi / xlo >= 4;
  const bool log_y = ylo > 0 && yhi / ylo >= 10;
  if (!log_y) {
    const double pad = 0.05 * (yhi - ylo > 0 ? yhi - ylo : 1.0);
    ylo -= pad;
    yhi += pad;
  }
  const Axis ax(xlo, xhi, log_x, kLeft, kWidth - kRight);
  const Axis ay(ylo, yhi, log_y, kHeight - kBottom, kTop);

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << coord(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
    << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double x : xs) {
    o << "<line x1=\"" << coord(ax(x)) << "\" y1=\"" << coord(kHeight - kBottom) << "\" x2=\"" << coord(ax(x))
      << "\" y2=\"" << coord(kHeight - kBottom + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << coord(ax(x)) << "\" y=\"" << coord(kHeight - kBottom + 18) << "\" text-anchor=\"middle\">"
      << num(x) << "</text>\n";
  }
  std::vector<double> yticks;
  if (log_y) {
    for (double e = std::floor(std::log10(ylo)); e <= std::ceil(std::log10(yhi)); e += 1.0) {
      const double v = std::pow(10.0, e);
      if (v >= ylo && v <= yhi) yticks.push_back(v);
    }
    if (yticks.size() < 2) yticks = {ylo, yhi};
  } else {
    yticks = linear_ticks(ylo, yhi);
  }
  for (double y : yticks) {
    o << "<line x1=\"" << coord(kLeft - 5) << "\" y1=\"" << coord(ay(y)) << "\" x2=\"" << coord(kWidth - kRight)
      << "\" y2=\"" << coord(ay(y)) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << coord(kLeft - 8) << "\" y=\"" << coord(ay(y) + 4) << "\" text-anchor=\"end\">" << num(y)
      << "</text>\n";
  }
  o << "<text x=\"" << coord((kLeft + kWidth - kRight) / 2) << "\" y=\"" << coord(kHeight - 18)
    << "\" text-anchor=\"middle\">" << xlabel << (log_x ? " (log)" : "") << "</text>\n";
  o << "<text transform=\"translate(18," << coord((kTop + kHeight - kBottom) / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">test error" << (log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    const auto& s = series[i];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      o << (j ? " " : "") << coord(ax(s.points[j].x)) << "," << coord(ay(s.points[j].y));
    }
    o << "\"/>\n";
    for (const auto& p : s.points) {
      const double lo = log_y ? std::max(p.y - 2 * p.se, ylo) : p.y - 2 * p.se;
      o << "<line x1=\"" << coord(ax(p.x)) << "\" y1=\"" << coord(ay(lo)) << "\" x2=\"" << coord(ax(p.x)) << "\" y2=\""
        << coord(ay(p.y + 2 * p.se)) << "\" stroke=\"" << color << "\"/>\n";
      o << "<circle cx=\"" << coord(ax(p.x)) << "\" cy=\"" << coord(ay(p.y)) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    }
    const double ly = kTop + 12 + 18 * static_cast<double>(i);
    o << "<line x1=\"" << coord(kWidth - kRight + 12) << "\" y1=\"" << coord(ly) << "\" x2=\""
      << coord(kWidth - kRight + 32) << "\" y2=\"" << coord(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << coord(kWidth - kRight + 38) << "\" y=\"" << coord(ly + 4) << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<Series> group(const std::vector<Row>& rows, bool by_m) {
  std::map<double, Series> out;
  for (const auto& r : rows) {
    const double key = by_m ? r.m : r.n;
    Series& s = out[key];
    s.label = std::string(by_m ? "m = " : "n = ") + num(key);
    s.points.push_back({by_m ? r.n : r.m, r.mean, r.se});
  }
  std::vector<Series> series;
  for (auto& [key, s] : out) {
    std::sort(s.points.begin(), s.points.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    series.push_back(std::move(s));
  }
  return series;
}

}  // namespace

std::map<std::string, std::string> sweep_charts(const std::string& csv) {
  std::map<std::string, std::vector<Row>> by_figure;
  for (auto& r : parse(csv)) by_figure[r.figure].push_back(r);
  std::map<std::string, std::string> out;
  for (const auto& [figure, rows] : by_figure) {
    out[figure + "_vs_n.svg"] = chart(figure + ": test error vs n", "n", group(rows, true));
    out[figure + "_vs_m.svg"] = chart(figure + ": test error vs m", "m", group(rows, false));
  }
  return out;
}

}  // namespace metastab::cli
