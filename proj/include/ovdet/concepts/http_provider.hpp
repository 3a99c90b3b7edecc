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

#include "ovdet/concepts/embedding.hpp"

namespace ovdet {

// Client for a remote text-embedding service.
// POST /embed_text {"texts":[...]} -> {"vectors":[[...],...]}
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(const std::string& base_url, size_t dim,
                                 int timeout_seconds = 5)
      : base_url_(base_url), dim_(dim), timeout_(timeout_seconds) {}

  std::vector<double> embed(const std::string& text) const override {
    auto vectors = embed_batch({text});
    return vectors.at(0);
  }

  std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const {
    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_, 0);
    client.set_read_timeout(timeout_, 0);
    json body;
    body["texts"] = texts;
    auto res = client.Post("/embed_text", body.dump(), "application/json");
    if (!res)
      throw std::runtime_error("embedding provider unreachable: " + base_url_);
    if (res->status != 200)
      throw std::runtime_error("embedding provider error: HTTP " +
                               std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("vectors"))
      throw std::runtime_error("embedding provider returned malformed body");
    auto vectors = parsed.at("vectors").get<std::vector<std::vector<double>>>();
    if (vectors.size() != texts.size())
      throw std::runtime_error("embedding provider returned wrong vector count");
    for (auto& v : vectors) {
      if (v.size() != dim_)
        throw std::runtime_error("embedding provider returned wrong dimension");
      l2_normalize(v);
    }
    return vectors;
  }

  size_t dim() const override { return dim_; }
  std::string id() const override { return "http-" + hash_hex(fnv1a(base_url_)); }

 private:
  std::string base_url_;
  size_t dim_;
  int timeout_;
};

}  // namespace ovdet
