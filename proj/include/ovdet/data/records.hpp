#pragma once

#include <string>
#include <vector>

#include "ovdet/core/image.hpp"
#include "ovdet/core/jsonl.hpp"
#include "ovdet/data/boxes.hpp"

namespace ovdet {

enum class RecordKind { detection, grounding, imagetext };

inline std::string to_string(RecordKind k) {
  switch (k) {
    case RecordKind::detection: return "detection";
    case RecordKind::grounding: return "grounding";
    case RecordKind::imagetext: return "imagetext";
  }
  return "detection";
}

inline RecordKind record_kind_from_string(const std::string& s) {
  if (s == "detection") return RecordKind::detection;
  if (s == "grounding") return RecordKind::grounding;
  if (s == "imagetext") return RecordKind::imagetext;
  throw std::runtime_error("unknown record kind: " + s);
}

struct AnnotatedObject {
  BBox box;
  std::string concept_name;
};

// One image with its objects, normalized across the three data kinds.
struct UnifiedRecord {
  std::string image_id;
  std::string image_path;  // lazily loaded; may be empty when image is inline
  Image image;             // may be empty until load_record_image
  int image_height = 0;
  int image_width = 0;
  std::vector<AnnotatedObject> objects;
  RecordKind kind = RecordKind::detection;
  std::string caption;  // kept for imagetext records (pseudo labeling input)
};

inline void load_record_image(UnifiedRecord& rec) {
  if (!rec.image.empty()) return;
  rec.image = load_image(rec.image_path);
  rec.image_height = rec.image.height;
  rec.image_width = rec.image.width;
}

// ---------------------------------------------------------------------------
// Raw source-specific records (JSONL wire formats)
// ---------------------------------------------------------------------------

struct DetectionRaw {
  std::string image_id;
  std::string image_path;
  std::vector<BBox> boxes;
  std::vector<std::string> classes;
};

struct PhraseBox {
  std::string phrase;
  BBox box;
};

struct GroundingRaw {
  std::string image_id;
  std::string image_path;
  std::string caption;
  std::vector<PhraseBox> phrase_boxes;
};

struct ImageTextRaw {
  std::string image_id;
  std::string image_path;
  std::string caption;
};

inline BBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::runtime_error("box must be [x1,y1,x2,y2]");
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline json box_to_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

struct NormalizeStats {
  int clipped_boxes = 0;
  int dropped_boxes = 0;  // degenerate after clipping
};

// Detection: one category name per box. Grounding: the annotated phrase
// per box, caption dropped. Imagetext: no objects (filled later by the
// pseudo labeler). Boxes outside the image are clipped; boxes degenerate
// after clipping are dropped and counted.
inline UnifiedRecord normalize_record(const DetectionRaw& raw, int image_h, int image_w,
                                      NormalizeStats* stats = nullptr) {
  if (raw.boxes.size() != raw.classes.size())
    throw std::runtime_error("detection record " + raw.image_id +
                             ": boxes/classes length mismatch");
  UnifiedRecord rec;
  rec.image_id = raw.image_id;
  rec.image_path = raw.image_path;
  rec.image_height = image_h;
  rec.image_width = image_w;
  rec.kind = RecordKind::detection;
  for (size_t i = 0; i < raw.boxes.size(); ++i) {
    if (!raw.boxes[i].valid()) throw std::runtime_error("invalid box in " + raw.image_id);
    BBox b = clip_box(raw.boxes[i], image_w, image_h);
    if (b != raw.boxes[i] && stats) stats->clipped_boxes++;
    if (!b.valid()) {
      if (stats) stats->dropped_boxes++;
      continue;
    }
    if (raw.classes[i].empty()) throw std::runtime_error("empty concept name in " + raw.image_id);
    rec.objects.push_back({b, raw.classes[i]});
  }
  return rec;
}

inline UnifiedRecord normalize_record(const GroundingRaw& raw, int image_h, int image_w,
                                      NormalizeStats* stats = nullptr) {
  UnifiedRecord rec;
  rec.image_id = raw.image_id;
  rec.image_path = raw.image_path;
  rec.image_height = image_h;
  rec.image_width = image_w;
  rec.kind = RecordKind::grounding;
  for (const auto& pb : raw.phrase_boxes) {
    if (!pb.box.valid()) throw std::runtime_error("invalid box in " + raw.image_id);
    BBox b = clip_box(pb.box, image_w, image_h);
    if (b != pb.box && stats) stats->clipped_boxes++;
    if (!b.valid()) {
      if (stats) stats->dropped_boxes++;
      continue;
    }
    if (pb.phrase.empty()) throw std::runtime_error("empty phrase in " + raw.image_id);
    rec.objects.push_back({b, pb.phrase});  // determiners kept verbatim
  }
  return rec;
}

inline UnifiedRecord normalize_record(const ImageTextRaw& raw, int image_h, int image_w,
                                      NormalizeStats* = nullptr) {
  UnifiedRecord rec;
  rec.image_id = raw.image_id;
  rec.image_path = raw.image_path;
  rec.image_height = image_h;
  rec.image_width = image_w;
  rec.kind = RecordKind::imagetext;
  rec.caption = raw.caption;
  return rec;
}

// ---------------------------------------------------------------------------
// JSONL readers. Image sizes come from the manifest when present, else
// from loading the image lazily.
// ---------------------------------------------------------------------------

inline std::vector<UnifiedRecord> load_records(const std::string& path, RecordKind kind,
                                               NormalizeStats* stats = nullptr) {
  std::vector<UnifiedRecord> records;
  for_each_jsonl(path, [&](size_t lineno, const json& j) {
    try {
      int h = j.value("height", 0);
      int w = j.value("width", 0);
      UnifiedRecord rec;
      switch (kind) {
        case RecordKind::detection: {
          DetectionRaw raw;
          raw.image_id = j.at("image_id").get<std::string>();
          raw.image_path = j.value("image_path", "");
          for (const auto& b : j.at("boxes")) raw.boxes.push_back(box_from_json(b));
          raw.classes = j.at("classes").get<std::vector<std::string>>();
          if (h == 0 || w == 0) throw std::runtime_error("missing height/width");
          rec = normalize_record(raw, h, w, stats);
          break;
        }
        case RecordKind::grounding: {
          GroundingRaw raw;
          raw.image_id = j.at("image_id").get<std::string>();
          raw.image_path = j.value("image_path", "");
          raw.caption = j.value("caption", "");
          for (const auto& pb : j.at("phrase_boxes")) {
            raw.phrase_boxes.push_back(
                {pb.at("phrase").get<std::string>(), box_from_json(pb.at("box"))});
          }
          if (h == 0 || w == 0) throw std::runtime_error("missing height/width");
          rec = normalize_record(raw, h, w, stats);
          break;
        }
        case RecordKind::imagetext: {
          ImageTextRaw raw;
          raw.image_id = j.at("image_id").get<std::string>();
          raw.image_path = j.value("image_path", "");
          raw.caption = j.value("caption", "");
          rec = normalize_record(raw, h, w);
          break;
        }
      }
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  });
  return records;
}

inline void save_records(const std::vector<UnifiedRecord>& records, const std::string& path) {
  JsonlWriter out(path);
  for (const auto& rec : records) {
    json j;
    j["image_id"] = rec.image_id;
    j["image_path"] = rec.image_path;
    j["height"] = rec.image_height;
    j["width"] = rec.image_width;
    switch (rec.kind) {
      case RecordKind::detection: {
        json boxes = json::array(), classes = json::array();
        for (const auto& obj : rec.objects) {
          boxes.push_back(box_to_json(obj.box));
          classes.push_back(obj.concept_name);
        }
        j["boxes"] = boxes;
        j["classes"] = classes;
        break;
      }
      case RecordKind::grounding: {
        j["caption"] = rec.caption;
        json pbs = json::array();
        for (const auto& obj : rec.objects) {
          pbs.push_back({{"phrase", obj.concept_name}, {"box", box_to_json(obj.box)}});
        }
        j["phrase_boxes"] = pbs;
        break;
      }
      case RecordKind::imagetext: {
        j["caption"] = rec.caption;
        break;
      }
    }
    out.write(j);
  }
}

}  // namespace ovdet
