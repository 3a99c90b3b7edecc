#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovdet/concepts/dictionary.hpp"
#include "ovdet/core/image.hpp"
#include "ovdet/core/jsonl.hpp"
#include "ovdet/core/rng.hpp"
#include "ovdet/data/records.hpp"

namespace ovdet {

struct PaletteConcept {
  std::string name;
  std::string definition;
  std::string shape;  // circle|square|triangle|ring|cross|diamond|star
  std::array<double, 3> color{0.5, 0.5, 0.5};
  bool holdout = false;
};

struct SyntheticSpec {
  int num_images = 500;
  int image_size = 96;  // square; must divide by the coarsest stride
  std::vector<PaletteConcept> palette;
  std::vector<PaletteConcept> distractors;  // dictionary-only concepts
  double detection_ratio = 0.7;
  double grounding_ratio = 0.15;  // remainder becomes imagetext
  int max_objects = 4;
  // sized against the default anchor ladder (48px and 96px at 96px images)
  double min_half_size = 0.16;  // fraction of image size
  double max_half_size = 0.30;
  bool include_holdout = false;  // allow holdout concepts as objects
  uint64_t seed = 0;

  json to_json() const;
  static SyntheticSpec from_json(const json& j);
};

inline json palette_concept_to_json(const PaletteConcept& p) {
  json j;
  j["name"] = p.name;
  j["definition"] = p.definition;
  j["shape"] = p.shape;
  j["color"] = p.color;
  j["holdout"] = p.holdout;
  return j;
}

inline PaletteConcept palette_concept_from_json(const json& j) {
  PaletteConcept p;
  p.name = j.at("name").get<std::string>();
  p.definition = j.value("definition", "");
  p.shape = j.value("shape", "circle");
  if (j.contains("color")) {
    auto c = j.at("color").get<std::vector<double>>();
    if (c.size() != 3) throw std::runtime_error("palette color must have 3 components");
    p.color = {c[0], c[1], c[2]};
  }
  p.holdout = j.value("holdout", false);
  return p;
}

inline std::vector<PaletteConcept> default_palette();
inline std::vector<PaletteConcept> default_distractors();

inline json SyntheticSpec::to_json() const {
  json j;
  j["num_images"] = num_images;
  j["image_size"] = image_size;
  j["detection_ratio"] = detection_ratio;
  j["grounding_ratio"] = grounding_ratio;
  j["max_objects"] = max_objects;
  j["min_half_size"] = min_half_size;
  j["max_half_size"] = max_half_size;
  j["include_holdout"] = include_holdout;
  j["seed"] = seed;
  json pal = json::array(), dis = json::array();
  for (const auto& p : palette) pal.push_back(palette_concept_to_json(p));
  for (const auto& p : distractors) dis.push_back(palette_concept_to_json(p));
  j["palette"] = pal;
  j["distractors"] = dis;
  return j;
}

inline SyntheticSpec SyntheticSpec::from_json(const json& j) {
  SyntheticSpec s;
  s.num_images = j.value("num_images", s.num_images);
  s.image_size = j.value("image_size", s.image_size);
  s.detection_ratio = j.value("detection_ratio", s.detection_ratio);
  s.grounding_ratio = j.value("grounding_ratio", s.grounding_ratio);
  s.max_objects = j.value("max_objects", s.max_objects);
  s.min_half_size = j.value("min_half_size", s.min_half_size);
  s.max_half_size = j.value("max_half_size", s.max_half_size);
  s.include_holdout = j.value("include_holdout", s.include_holdout);
  s.seed = j.value("seed", s.seed);
  if (j.contains("palette"))
    for (const auto& p : j.at("palette")) s.palette.push_back(palette_concept_from_json(p));
  else
    s.palette = default_palette();
  if (j.contains("distractors"))
    for (const auto& p : j.at("distractors")) s.distractors.push_back(palette_concept_from_json(p));
  else
    s.distractors = default_distractors();
  return s;
}

// The bundled 12-concept palette: 8 training concepts plus 4 held-out
// ones built from the same color and shape vocabulary, so the text side
// can compose them zero-shot.
inline std::vector<PaletteConcept> default_palette() {
  return {
      {"red circle", "a solid round red disc", "circle", {0.85, 0.10, 0.10}, false},
      {"blue square", "a solid blue box with four equal straight sides", "square",
       {0.10, 0.20, 0.85}, false},
      {"green triangle", "a solid green shape with three straight sides", "triangle",
       {0.10, 0.70, 0.15}, false},
      {"yellow ring", "a hollow yellow circle drawn as a thick round band", "ring",
       {0.90, 0.85, 0.10}, false},
      {"purple cross", "two thick purple bars crossing at right angles", "cross",
       {0.55, 0.10, 0.75}, false},
      {"orange diamond", "a solid orange square standing on one corner", "diamond",
       {0.95, 0.55, 0.05}, false},
      {"cyan star", "a cyan shape with pointed arms radiating from the center", "star",
       {0.05, 0.75, 0.80}, false},
      {"magenta circle", "a solid round magenta disc", "circle", {0.90, 0.25, 0.90}, false},
      {"blue circle", "a solid round blue disc", "circle", {0.10, 0.20, 0.85}, true},
      {"red square", "a solid red box with four equal straight sides", "square",
       {0.85, 0.10, 0.10}, true},
      {"green ring", "a hollow green circle drawn as a thick round band", "ring",
       {0.10, 0.70, 0.15}, true},
      {"yellow triangle", "a solid yellow shape with three straight sides", "triangle",
       {0.90, 0.85, 0.10}, true},
  };
}

// Dictionary-only concepts. They never render; they exist so negative
// sampling has a pool well beyond the palette.
inline std::vector<PaletteConcept> default_distractors() {
  return {
      {"gray oval", "a solid gray rounded elongated shape", "circle", {0.5, 0.5, 0.5}, false},
      {"brown rectangle", "a solid brown box longer than it is tall", "square",
       {0.45, 0.30, 0.15}, false},
      {"white dot", "a very small solid white disc", "circle", {1.0, 1.0, 1.0}, false},
      {"black cross", "two thick black bars crossing at right angles", "cross",
       {0.05, 0.05, 0.05}, false},
      {"pink diamond", "a solid pink square standing on one corner", "diamond",
       {0.95, 0.60, 0.70}, false},
      {"olive star", "an olive shape with pointed arms radiating from the center", "star",
       {0.45, 0.50, 0.10}, false},
      {"teal square", "a solid teal box with four equal straight sides", "square",
       {0.10, 0.50, 0.50}, false},
      {"navy ring", "a hollow navy circle drawn as a thick round band", "ring",
       {0.05, 0.05, 0.45}, false},
      {"maroon triangle", "a solid maroon shape with three straight sides", "triangle",
       {0.50, 0.05, 0.10}, false},
      {"gold star", "a gold shape with pointed arms radiating from the center", "star",
       {0.85, 0.70, 0.10}, false},
      {"silver circle", "a solid round silver disc", "circle", {0.75, 0.75, 0.78}, false},
      {"beige square", "a solid beige box with four equal straight sides", "square",
       {0.90, 0.85, 0.70}, false},
      {"coral ring", "a hollow coral circle drawn as a thick round band", "ring",
       {1.00, 0.50, 0.40}, false},
      {"indigo cross", "two thick indigo bars crossing at right angles", "cross",
       {0.30, 0.00, 0.50}, false},
      {"lime triangle", "a solid lime shape with three straight sides", "triangle",
       {0.55, 0.90, 0.10}, false},
      {"violet diamond", "a solid violet square standing on one corner", "diamond",
       {0.55, 0.30, 0.85}, false},
      {"tan oval", "a solid tan rounded elongated shape", "circle", {0.80, 0.65, 0.45}, false},
      {"turquoise band", "a hollow turquoise circle drawn as a thick round band", "ring",
       {0.25, 0.85, 0.80}, false},
      {"amber disc", "a solid round amber disc", "circle", {1.00, 0.75, 0.00}, false},
      {"ivory plus", "two thick ivory bars crossing at right angles", "cross",
       {1.00, 1.00, 0.90}, false},
      {"bronze star", "a bronze shape with pointed arms radiating from the center", "star",
       {0.80, 0.50, 0.20}, false},
      {"ruby ring", "a hollow ruby circle drawn as a thick round band", "ring",
       {0.88, 0.07, 0.25}, false},
      {"sapphire square", "a solid sapphire box with four equal straight sides", "square",
       {0.06, 0.32, 0.73}, false},
      {"charcoal dot", "a very small solid charcoal disc", "circle", {0.20, 0.20, 0.20}, false},
  };
}

inline SyntheticSpec default_synthetic_spec() {
  SyntheticSpec s;
  s.palette = default_palette();
  s.distractors = default_distractors();
  return s;
}

// ---------------------------------------------------------------------------
// Shape rasterizers
// ---------------------------------------------------------------------------

namespace detail {

// membership test for a point relative to the shape center, half size r
inline bool in_shape(const std::string& shape, double dx, double dy, double r) {
  double ax = std::abs(dx), ay = std::abs(dy);
  if (shape == "circle") return dx * dx + dy * dy <= r * r;
  if (shape == "square") return ax <= r && ay <= r;
  if (shape == "triangle") {
    if (dy < -r || dy > r) return false;
    double t = (dy + r) / (2 * r);  // 0 at apex, 1 at base
    return ax <= t * r;
  }
  if (shape == "ring") {
    double d2 = dx * dx + dy * dy;
    return d2 <= r * r && d2 >= (0.55 * r) * (0.55 * r);
  }
  if (shape == "cross") return (ax <= 0.32 * r && ay <= r) || (ay <= 0.32 * r && ax <= r);
  if (shape == "diamond") return ax + ay <= r;
  if (shape == "star") {
    if (dx * dx + dy * dy > r * r) return false;
    double arm = 0.22 * r;
    double d1 = std::abs(dx - dy) / std::sqrt(2.0);
    double d2 = std::abs(dx + dy) / std::sqrt(2.0);
    return ax <= arm || ay <= arm || d1 <= arm || d2 <= arm;
  }
  throw std::runtime_error("unknown shape renderer: " + shape);
}

}  // namespace detail

// Paints the shape and returns the tight bounding box of painted pixels.
inline BBox render_shape(Image& img, const PaletteConcept& concept_def, double cx, double cy,
                         double half_size, double brightness) {
  int x_min = img.width, x_max = -1, y_min = img.height, y_max = -1;
  int y0 = std::max(0, static_cast<int>(std::floor(cy - half_size)) - 1);
  int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + half_size)) + 1);
  int x0 = std::max(0, static_cast<int>(std::floor(cx - half_size)) - 1);
  int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + half_size)) + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      if (!detail::in_shape(concept_def.shape, x + 0.5 - cx, y + 0.5 - cy, half_size)) continue;
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = std::clamp(concept_def.color[c] * brightness, 0.0, 1.0);
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  if (x_max < 0) throw std::runtime_error("shape rendered no pixels");
  return BBox{static_cast<double>(x_min), static_cast<double>(y_min),
              static_cast<double>(x_max + 1), static_cast<double>(y_max + 1)};
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

struct SyntheticDataset {
  std::vector<UnifiedRecord> records;  // images held inline
  ConceptDictionary dictionary;        // palette + distractors with definitions
  std::vector<std::string> train_concepts;
  std::vector<std::string> holdout_concepts;
  int placement_failures = 0;
};

// Deterministic per seed. Every image gets 1..max_objects objects with
// pairwise IoU < 0.3 and exact raster-tight boxes; kinds are drawn per
// the spec ratios. Holdout concepts are excluded from object placement
// unless include_holdout is set.
inline SyntheticDataset generate_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.palette.empty()) throw std::runtime_error("palette must be nonempty");

  SyntheticDataset ds;
  std::vector<const PaletteConcept*> placeable;
  for (const auto& p : spec.palette) {
    if (p.holdout)
      ds.holdout_concepts.push_back(normalize_name(p.name));
    else
      ds.train_concepts.push_back(normalize_name(p.name));
    if (!p.holdout || spec.include_holdout) placeable.push_back(&p);
  }

  // companion dictionary: palette as detection concepts, distractors as
  // curated object-list concepts
  std::map<std::string, int64_t> freq;
  Rng rng(child_seed(spec.seed, "data"));

  for (int i = 0; i < spec.num_images; ++i) {
    UnifiedRecord rec;
    rec.image_id = "synth-" + std::to_string(i);
    rec.image_height = rec.image_width = spec.image_size;
    rec.image = Image(spec.image_size, spec.image_size, 3, 0.92);
    // faint background texture
    for (double& v : rec.image.data) v += uniform_real(rng, -0.02, 0.02);

    double u = uniform_real(rng, 0.0, 1.0);
    rec.kind = u < spec.detection_ratio ? RecordKind::detection
               : u < spec.detection_ratio + spec.grounding_ratio ? RecordKind::grounding
                                                                 : RecordKind::imagetext;

    int want = uniform_int(rng, 1, spec.max_objects);
    std::vector<BBox> placed;
    std::vector<const PaletteConcept*> placed_concepts;
    for (int o = 0; o < want; ++o) {
      bool ok = false;
      for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
        double half = uniform_real(rng, spec.min_half_size, spec.max_half_size) * spec.image_size;
        double cx = uniform_real(rng, half + 2, spec.image_size - half - 2);
        double cy = uniform_real(rng, half + 2, spec.image_size - half - 2);
        BBox candidate{cx - half, cy - half, cx + half, cy + half};
        // margin under the IoU < 0.3 contract: raster-tight boxes can
        // wobble a pixel against the sampled candidate
        bool clash = false;
        for (const auto& b : placed)
          if (iou(candidate, b) >= 0.25) clash = true;
        if (clash) continue;
        const PaletteConcept* pc = placeable[uniform_below(rng, placeable.size())];
        double brightness = uniform_real(rng, 0.9, 1.05);
        BBox tight = render_shape(rec.image, *pc, cx, cy, half, brightness);
        placed.push_back(tight);
        placed_concepts.push_back(pc);
        ok = true;
      }
      if (!ok) ds.placement_failures++;
    }

    // annotate per kind
    std::vector<std::string> phrases;
    for (size_t o = 0; o < placed.size(); ++o) {
      const std::string name = normalize_name(placed_concepts[o]->name);
      freq[name]++;
      switch (rec.kind) {
        case RecordKind::detection:
          rec.objects.push_back({placed[o], name});
          break;
        case RecordKind::grounding:
          rec.objects.push_back({placed[o], "a " + name});  // determiner kept
          phrases.push_back("a " + name);
          break;
        case RecordKind::imagetext:
          phrases.push_back("a " + name);
          break;
      }
    }
    if (rec.kind == RecordKind::grounding || rec.kind == RecordKind::imagetext) {
      std::string caption;
      for (size_t o = 0; o < phrases.size(); ++o) {
        if (o > 0) caption += o + 1 == phrases.size() ? " and " : ", ";
        caption += phrases[o];
      }
      caption += " on a plain background";
      rec.caption = caption;
    }
    ds.records.push_back(std::move(rec));
  }

  for (const auto& p : spec.palette) {
    std::string name = normalize_name(p.name);
    ds.dictionary.entries[name] =
        ConceptEntry{name, p.definition.empty() ? std::nullopt : std::optional(p.definition),
                     ConceptSource::detection, freq.count(name) ? freq[name] : 0};
  }
  for (const auto& p : spec.distractors) {
    std::string name = normalize_name(p.name);
    if (ds.dictionary.entries.count(name)) continue;
    ds.dictionary.entries[name] =
        ConceptEntry{name, p.definition.empty() ? std::nullopt : std::optional(p.definition),
                     ConceptSource::things, 0};
  }
  return ds;
}

// Writes images as NPY under <dir>/images plus per-kind JSONL manifests
// and the companion dictionary.
inline void save_synthetic_dataset(SyntheticDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(std::filesystem::path(dir) / "images");
  std::vector<UnifiedRecord> det, grd, imt;
  for (auto& rec : ds.records) {
    rec.image_path = (std::filesystem::path(dir) / "images" / (rec.image_id + ".npy")).string();
    save_npy(rec.image_path, rec.image);
    switch (rec.kind) {
      case RecordKind::detection: det.push_back(rec); break;
      case RecordKind::grounding: grd.push_back(rec); break;
      case RecordKind::imagetext: imt.push_back(rec); break;
    }
  }
  save_records(det, (std::filesystem::path(dir) / "detection.jsonl").string());
  save_records(grd, (std::filesystem::path(dir) / "grounding.jsonl").string());
  save_records(imt, (std::filesystem::path(dir) / "imagetext.jsonl").string());
  save_dictionary(ds.dictionary, (std::filesystem::path(dir) / "dict.jsonl").string());

  json meta;
  meta["train_concepts"] = ds.train_concepts;
  meta["holdout_concepts"] = ds.holdout_concepts;
  meta["placement_failures"] = ds.placement_failures;
  write_file((std::filesystem::path(dir) / "meta.json").string(), meta.dump(2) + "\n");
}

}  // namespace ovdet
