#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilient/reachability.hpp"

namespace resilient {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<double> reference_lines;  // dashed horizontal lines, e.g. +-0.2 Hz
};

/// Shadow of {x : x^T W^-1 x <= 1} on coordinates (i, j): the 2x2 submatrix
/// of W at rows/columns (i, j).
Eigen::Matrix2d project_shape(const Eigen::MatrixXd& w, int i, int j);

/// Boundary of the projected ellipse, `points` samples counter-clockwise.
std::vector<Eigen::Vector2d> ellipse_boundary(const Eigen::Matrix2d& shape, int points = 256);

struct EllipsePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  Eigen::MatrixXd w;
  int axis_x = 0;
  int axis_y = 1;
  std::vector<HalfSpace> unsafe;  // only half-spaces confined to the two axes are drawn
  Eigen::MatrixXd samples;        // n x K states to overlay; may be empty
};

struct SvgDocument {
  std::string text;
  std::vector<std::string> warnings;
};

SvgDocument render_line_plot(const LinePlot& plot);
SvgDocument render_ellipse_plot(const EllipsePlot& plot);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace resilient
