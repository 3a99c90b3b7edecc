#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ovdet/core/image.hpp"
#include "ovdet/train/eval.hpp"

namespace ovdet {

namespace detail {

inline void draw_line(Image& img, double x0, double y0, double x1, double y1,
                      const std::array<double, 3>& color) {
  int steps = static_cast<int>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) * 2 + 1;
  for (int i = 0; i <= steps; ++i) {
    double t = static_cast<double>(i) / steps;
    int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    if (x < 0 || x >= img.width || y < 0 || y >= img.height) continue;
    for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[c];
  }
}

}  // namespace detail

// Static precision-recall figure: one polyline per concept on a unit
// square with light gridlines.
inline void save_pr_plot(const EvalReport& report, const std::string& path, int size = 420) {
  Image img(size, size, 3, 1.0);
  const int margin = 30;
  const int plot = size - 2 * margin;
  auto px = [&](double recall) { return margin + recall * plot; };
  auto py = [&](double precision) { return size - margin - precision * plot; };

  for (int i = 0; i <= 10; ++i) {
    double v = i / 10.0;
    detail::draw_line(img, px(v), py(0), px(v), py(1), {0.9, 0.9, 0.9});
    detail::draw_line(img, px(0), py(v), px(1), py(v), {0.9, 0.9, 0.9});
  }
  detail::draw_line(img, px(0), py(0), px(1), py(0), {0, 0, 0});
  detail::draw_line(img, px(0), py(0), px(0), py(1), {0, 0, 0});

  const std::vector<std::array<double, 3>> palette = {
      {0.85, 0.1, 0.1}, {0.1, 0.2, 0.85}, {0.1, 0.6, 0.15}, {0.9, 0.6, 0.05},
      {0.55, 0.1, 0.7}, {0.05, 0.7, 0.75}, {0.8, 0.1, 0.6}, {0.4, 0.4, 0.4},
  };
  size_t ci = 0;
  for (const auto& [name, pts] : report.pr_points) {
    const auto& color = palette[ci++ % palette.size()];
    double prev_r = 0.0, prev_p = pts.empty() ? 0.0 : pts.front().second;
    for (const auto& [r, p] : pts) {
      detail::draw_line(img, px(prev_r), py(prev_p), px(r), py(p), color);
      prev_r = r;
      prev_p = p;
    }
  }
  save_png(path, img);
}

}  // namespace ovdet
