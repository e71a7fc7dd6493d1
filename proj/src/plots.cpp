#include "resilient/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "resilient/error.hpp"

namespace resilient {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 190.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string fmt(double v) {
  // Fixed precision keeps the SVG stable and compact.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
};

// Pads the range and widens degenerate ones.
Range finish_range(Range r, const std::string& axis, std::vector<std::string>& warnings) {
  if (!r.valid()) {
    warnings.push_back(axis + " axis has no finite data; using [-1, 1]");
    return {-1.0, 1.0};
  }
  if (r.hi - r.lo <= 1e-12 * std::max(1.0, std::abs(r.hi))) {
    warnings.push_back(axis + " axis has zero extent; auto-ranged");
    const double pad = std::max(1e-3, 0.1 * std::abs(r.hi));
    return {r.lo - pad, r.hi + pad};
  }
  const double pad = 0.05 * (r.hi - r.lo);
  return {r.lo - pad, r.hi + pad};
}

double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return mag * (f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0);
}

class Canvas {
 public:
  Canvas(Range x, Range y) : x_(x), y_(y) {}

  double px(double v) const { return kLeft + (v - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
  double py(double v) const { return kTop + (y_.hi - v) / (y_.hi - y_.lo) * plot_h(); }
  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }

  void header(const std::string& title) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
         << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
         << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         << "<text x=\"" << fmt(kLeft + plot_w() / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         << "font-size=\"15\">" << escape(title) << "</text>\n"
         << "<defs><clipPath id=\"plot\"><rect x=\"" << kLeft << "\" y=\"" << kTop
         << "\" width=\"" << fmt(plot_w()) << "\" height=\"" << fmt(plot_h())
         << "\"/></clipPath></defs>\n";
  }

  void axes(const std::string& x_label, const std::string& y_label) {
    out_ << "<g stroke=\"#ccc\" stroke-width=\"0.5\">\n";
    const double xs = nice_step(x_.hi - x_.lo);
    const double ys = nice_step(y_.hi - y_.lo);
    std::ostringstream labels;
    for (long k = std::lround(std::ceil(x_.lo / xs)); k * xs <= x_.hi; ++k) {
      const double v = static_cast<double>(k) * xs;
      out_ << "<line x1=\"" << fmt(px(v)) << "\" y1=\"" << kTop << "\" x2=\"" << fmt(px(v))
           << "\" y2=\"" << fmt(kTop + plot_h()) << "\"/>\n";
      labels << "<text x=\"" << fmt(px(v)) << "\" y=\"" << fmt(kTop + plot_h() + 16)
             << "\" text-anchor=\"middle\">" << tick_label(k == 0 ? 0.0 : v)
             << "</text>\n";
    }
    for (long k = std::lround(std::ceil(y_.lo / ys)); k * ys <= y_.hi; ++k) {
      const double v = static_cast<double>(k) * ys;
      out_ << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(py(v)) << "\" x2=\""
           << fmt(kLeft + plot_w()) << "\" y2=\"" << fmt(py(v)) << "\"/>\n";
      labels << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py(v) + 4)
             << "\" text-anchor=\"end\">" << tick_label(k == 0 ? 0.0 : v)
             << "</text>\n";
    }
    out_ << "</g>\n" << labels.str();
    out_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << fmt(plot_w())
         << "\" height=\"" << fmt(plot_h()) << "\" fill=\"none\" stroke=\"black\"/>\n";
    out_ << "<text x=\"" << fmt(kLeft + plot_w() / 2) << "\" y=\"" << fmt(kHeight - 16)
         << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
    out_ << "<text transform=\"translate(20," << fmt(kTop + plot_h() / 2)
         << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  }

  void polyline(const std::vector<double>& x, const std::vector<double>& y, const char* color,
                const char* extra = "") {
    out_ << "<polyline clip-path=\"url(#plot)\" fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.5\" " << extra << " points=\"";
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (!std::isfinite(x[k]) || !std::isfinite(y[k])) continue;
      out_ << fmt(px(x[k])) << ',' << fmt(py(y[k])) << ' ';
    }
    out_ << "\"/>\n";
  }

  void polygon(const std::vector<Eigen::Vector2d>& pts, const char* fill, const char* stroke,
               double opacity) {
    out_ << "<polygon clip-path=\"url(#plot)\" fill=\"" << fill << "\" fill-opacity=\""
         << fmt(opacity) << "\" stroke=\"" << stroke << "\" points=\"";
    for (const auto& p : pts) out_ << fmt(px(p.x())) << ',' << fmt(py(p.y())) << ' ';
    out_ << "\"/>\n";
  }

  void dot(double x, double y, const char* color) {
    out_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"1.2\" fill=\""
         << color << "\"/>\n";
  }

  void legend(int index, const std::string& label, const char* color) {
    const double y = kTop + 10 + 18 * index;
    const double x = kWidth - kRight + 12;
    out_ << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(x + 20)
         << "\" y2=\"" << fmt(y) << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n"
         << "<text x=\"" << fmt(x + 26) << "\" y=\"" << fmt(y + 4) << "\">" << escape(label)
         << "</text>\n";
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  Range x_, y_;
  std::ostringstream out_;
};

// Clips a convex polygon to {p : c^T p >= g}.
std::vector<Eigen::Vector2d> clip(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& c,
                                  double g) {
  std::vector<Eigen::Vector2d> out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % poly.size()];
    const double da = c.dot(a) - g;
    const double db = c.dot(b) - g;
    if (da >= 0) out.push_back(a);
    if ((da >= 0) != (db >= 0)) out.push_back(a + (b - a) * (da / (da - db)));
  }
  return out;
}

}  // namespace

Eigen::Matrix2d project_shape(const Eigen::MatrixXd& w, int i, int j) {
  if (i < 0 || j < 0 || i >= w.rows() || j >= w.rows() || i == j) {
    throw ConfigError("projection axes out of range");
  }
  Eigen::Matrix2d s;
  s << w(i, i), w(i, j), w(j, i), w(j, j);
  return s;
}

std::vector<Eigen::Vector2d> ellipse_boundary(const Eigen::Matrix2d& shape, int points) {
  // x = S^{1/2} (cos t, sin t) traces x^T S^-1 x = 1; a PSD square root also
  // handles a rank-deficient shadow.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (shape + shape.transpose()));
  const Eigen::Matrix2d root = eig.eigenvectors() *
                               eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                               eig.eigenvectors().transpose();
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double t = 2.0 * std::numbers::pi * k / points;
    out.push_back(root * Eigen::Vector2d(std::cos(t), std::sin(t)));
  }
  return out;
}

SvgDocument render_line_plot(const LinePlot& plot) {
  SvgDocument doc;
  Range xr, yr;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw ConfigError("series '" + s.label + "' has mismatched lengths");
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  for (double v : plot.reference_lines) yr.add(v);
  if (plot.series.empty()) doc.warnings.push_back("line plot has no series");
  xr = finish_range(xr, "x", doc.warnings);
  yr = finish_range(yr, "y", doc.warnings);
  Canvas c(xr, yr);
  c.header(plot.title);
  c.axes(plot.x_label, plot.y_label);
  for (double v : plot.reference_lines) {
    c.polyline({xr.lo, xr.hi}, {v, v}, "#555", "stroke-dasharray=\"6,4\"");
  }
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const char* color = kPalette[s % kPalette.size()];
    c.polyline(plot.series[s].x, plot.series[s].y, color);
    c.legend(static_cast<int>(s), plot.series[s].label, color);
  }
  doc.text = c.finish();
  return doc;
}

SvgDocument render_ellipse_plot(const EllipsePlot& plot) {
  SvgDocument doc;
  const Eigen::Matrix2d shape = project_shape(plot.w, plot.axis_x, plot.axis_y);
  const auto boundary = ellipse_boundary(shape);
  Range xr, yr;
  for (const auto& p : boundary) {
    xr.add(p.x());
    yr.add(p.y());
  }
  const int n = static_cast<int>(plot.w.rows());
  if (plot.samples.size() > 0 && plot.samples.rows() != n) {
    throw ConfigError("sample dimension does not match W");
  }
  for (Eigen::Index k = 0; k < plot.samples.cols(); ++k) {
    xr.add(plot.samples(plot.axis_x, k));
    yr.add(plot.samples(plot.axis_y, k));
  }
  // Keep the unsafe boundaries in view.
  std::vector<std::pair<Eigen::Vector2d, double>> planar;
  for (const auto& h : plot.unsafe) {
    Eigen::VectorXd rest = h.normal;
    rest(plot.axis_x) = 0.0;
    rest(plot.axis_y) = 0.0;
    if (rest.norm() > 0.0) {
      doc.warnings.push_back("unsafe half-space involves other coordinates; not drawn");
      continue;
    }
    const Eigen::Vector2d c(h.normal(plot.axis_x), h.normal(plot.axis_y));
    const double scale = h.offset / c.squaredNorm();
    xr.add(1.15 * c.x() * scale);
    yr.add(1.15 * c.y() * scale);
    planar.emplace_back(c, h.offset);
  }
  xr = finish_range(xr, "x", doc.warnings);
  yr = finish_range(yr, "y", doc.warnings);

  Canvas canvas(xr, yr);
  canvas.header(plot.title);
  canvas.axes(plot.x_label, plot.y_label);
  const std::vector<Eigen::Vector2d> box = {
      {xr.lo, yr.lo}, {xr.hi, yr.lo}, {xr.hi, yr.hi}, {xr.lo, yr.hi}};
  for (const auto& [c, g] : planar) {
    const auto region = clip(box, c, g);
    if (region.size() >= 3) canvas.polygon(region, "#d62728", "none", 0.18);
  }
  for (Eigen::Index k = 0; k < plot.samples.cols(); ++k) {
    canvas.dot(plot.samples(plot.axis_x, k), plot.samples(plot.axis_y, k), "#2ca02c");
  }
  canvas.polygon(boundary, "none", "#1f77b4", 0.0);
  canvas.legend(0, "ellipsoid shadow", "#1f77b4");
  if (!planar.empty()) canvas.legend(1, "unsafe region", "#d62728");
  if (plot.samples.cols() > 0) canvas.legend(planar.empty() ? 1 : 2, "sampled states", "#2ca02c");
  doc.text = canvas.finish();
  return doc;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace resilient
