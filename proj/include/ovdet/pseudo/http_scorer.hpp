#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <httplib.h>

// glibc resolv.h leaks a "_res" macro through httplib's includes; it
// collides with Eigen parameter names when Eigen is parsed afterwards.
#ifdef _res
#undef _res
#endif

#include "ovdet/pseudo/scorer.hpp"

namespace ovdet {

// Remote dual-encoder client. Text side shares the embedding provider
// wire shape; the image side posts the crop as a dense array.
//   POST /embed_text  {"texts":[...]}            -> {"vectors":[[...],...]}
//   POST /embed_image {"height","width","channels","data":[...]} -> {"vector":[...]}
class HttpScorer final : public RegionScorer {
 public:
  HttpScorer(const std::string& base_url, size_t dim, int timeout_seconds = 10)
      : base_url_(base_url), dim_(dim), timeout_(timeout_seconds) {}

  std::vector<double> embed_text(const std::string& prompt) override {
    json body;
    body["texts"] = std::vector<std::string>{prompt};
    json parsed = post("/embed_text", body);
    if (!parsed.contains("vectors") || parsed.at("vectors").size() != 1)
      throw std::runtime_error("scorer returned malformed body");
    auto v = parsed.at("vectors")[0].get<std::vector<double>>();
    check_dim(v);
    l2_normalize(v);
    return v;
  }

  std::vector<double> embed_image_region(const Image& crop) override {
    json body;
    body["height"] = crop.height;
    body["width"] = crop.width;
    body["channels"] = crop.channels;
    body["data"] = crop.data;
    json parsed = post("/embed_image", body);
    if (!parsed.contains("vector")) throw std::runtime_error("scorer returned malformed body");
    auto v = parsed.at("vector").get<std::vector<double>>();
    check_dim(v);
    l2_normalize(v);
    return v;
  }

  size_t dim() const override { return dim_; }
  std::string id() const override { return "http-" + hash_hex(fnv1a(base_url_)); }

 private:
  json post(const std::string& route, const json& body) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_, 0);
    client.set_read_timeout(timeout_, 0);
    auto res = client.Post(route, body.dump(), "application/json");
    if (!res) throw std::runtime_error("scorer unreachable: " + base_url_);
    if (res->status != 200)
      throw std::runtime_error("scorer error: HTTP " + std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw std::runtime_error("scorer returned malformed body");
    return parsed;
  }

  void check_dim(const std::vector<double>& v) const {
    if (v.size() != dim_) throw std::runtime_error("scorer returned wrong dimension");
  }

  std::string base_url_;
  size_t dim_;
  int timeout_;
};

}  // namespace ovdet
