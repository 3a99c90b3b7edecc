#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ovdet {

// Minimal dense row-major double matrix for loss plumbing and scores.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), d(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

}  // namespace ovdet
