#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ovdet/core/image.hpp"
#include "ovdet/core/jsonl.hpp"
#include "ovdet/data/boxes.hpp"

namespace ovdet {

struct Proposal {
  BBox box;
  double objectness = 0.0;
};

// Keep proposals with objectness >= objectness_threshold and area >=
// min_area ("below" filters strictly, so equality is kept). Order is
// preserved; applying the filter twice is a no-op.
inline std::vector<Proposal> filter_proposals(const std::vector<Proposal>& proposals,
                                              double objectness_threshold = 0.3,
                                              double min_area = 6000.0) {
  std::vector<Proposal> out;
  out.reserve(proposals.size());
  for (const auto& p : proposals)
    if (p.objectness >= objectness_threshold && p.box.area() >= min_area) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------
// Proposal JSONL: {"image_id", "box":[x1,y1,x2,y2], "objectness"}
// ---------------------------------------------------------------------------

inline std::map<std::string, std::vector<Proposal>> load_proposals(const std::string& path) {
  std::map<std::string, std::vector<Proposal>> by_image;
  for_each_jsonl(path, [&](size_t lineno, const json& j) {
    if (!j.is_object() || !j.contains("image_id") || !j.contains("box") ||
        !j.contains("objectness"))
      throw std::runtime_error(path + ": malformed line " + std::to_string(lineno));
    Proposal p;
    p.box = box_from_json(j.at("box"));
    p.objectness = j.at("objectness").get<double>();
    by_image[j.at("image_id").get<std::string>()].push_back(p);
  });
  return by_image;
}

inline void append_proposals(JsonlWriter& out, const std::string& image_id,
                             const std::vector<Proposal>& proposals) {
  for (const auto& p : proposals) {
    json j;
    j["image_id"] = image_id;
    j["box"] = box_to_json(p.box);
    j["objectness"] = p.objectness;
    out.write(j);
  }
}

// ---------------------------------------------------------------------------
// Sliding-window proposal stub
// ---------------------------------------------------------------------------

// Class-agnostic proposal generator for tests and demos: square windows
// at a few scales; objectness is the fraction of window pixels that
// differ from the dominant border color (a cheap foreground measure).
inline std::vector<Proposal> sliding_window_proposals(const Image& img,
                                                      const std::vector<int>& window_sizes,
                                                      double min_objectness = 0.05) {
  // background estimate: mean of the 1px border
  std::vector<double> bg(img.channels, 0.0);
  int count = 0;
  for (int x = 0; x < img.width; ++x)
    for (int y : {0, img.height - 1}) {
      for (int c = 0; c < img.channels; ++c) bg[c] += img.at(y, x, c);
      ++count;
    }
  for (int y = 1; y + 1 < img.height; ++y)
    for (int x : {0, img.width - 1}) {
      for (int c = 0; c < img.channels; ++c) bg[c] += img.at(y, x, c);
      ++count;
    }
  for (double& v : bg) v /= std::max(1, count);

  auto foreground = [&](int y, int x) {
    double diff = 0;
    for (int c = 0; c < img.channels; ++c) diff += std::abs(img.at(y, x, c) - bg[c]);
    return diff > 0.15;
  };

  std::vector<Proposal> out;
  for (int win : window_sizes) {
    if (win > img.width || win > img.height) continue;
    int step = std::max(1, win / 2);
    for (int y = 0; y + win <= img.height; y += step)
      for (int x = 0; x + win <= img.width; x += step) {
        int fg = 0;
        for (int yy = y; yy < y + win; ++yy)
          for (int xx = x; xx < x + win; ++xx) fg += foreground(yy, xx) ? 1 : 0;
        double obj = static_cast<double>(fg) / (win * win);
        if (obj >= min_objectness)
          out.push_back({BBox{static_cast<double>(x), static_cast<double>(y),
                              static_cast<double>(x + win), static_cast<double>(y + win)},
                         obj});
      }
  }
  return out;
}

}  // namespace ovdet
