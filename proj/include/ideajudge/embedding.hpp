#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ideajudge/http.hpp"

namespace ideajudge {

enum class EmbeddingKind { deterministic_hash, http_embedding };

std::string_view to_string(EmbeddingKind k);
EmbeddingKind parse_embedding_kind(std::string_view s);

struct EmbeddingConfig {
  EmbeddingKind kind = EmbeddingKind::deterministic_hash;
  std::size_t dimension = 512;  // hash buckets; checked against http responses when nonzero

  std::string endpoint;
  std::string path = "/v1/embeddings";
  std::string model;
  std::string api_key_env = "IDEAJUDGE_API_KEY";
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int backoff_ms = 500;

  nlohmann::ordered_json to_json() const;
  static EmbeddingConfig from_json(const nlohmann::json& j);
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string id() const = 0;
  /// Identical text always yields an identical vector.
  virtual std::vector<double> embed(std::string_view text) = 0;
};

/// Bag of hashed tokens (FNV-1a modulo `dimension`), L2-normalized. Empty
/// text maps to the zero vector.
class HashEmbedding : public EmbeddingBackend {
 public:
  explicit HashEmbedding(std::size_t dimension = 512);
  std::string id() const override;
  std::vector<double> embed(std::string_view text) override;

 private:
  std::size_t dimension_;
};

/// OpenAI-style embeddings endpoint. Vectors are memoized per text, so a
/// repeated text never triggers a second request.
class HttpEmbedding : public EmbeddingBackend {
 public:
  explicit HttpEmbedding(EmbeddingConfig config, HttpTransport transport = default_http_transport());
  std::string id() const override { return "http_embedding:" + config_.model; }
  std::vector<double> embed(std::string_view text) override;

 private:
  EmbeddingConfig config_;
  HttpTransport transport_;
  std::mutex mu_;
  std::unordered_map<std::string, std::vector<double>> memo_;
};

std::unique_ptr<EmbeddingBackend> make_embedding(const EmbeddingConfig& config,
                                                 HttpTransport transport = default_http_transport());

}  // namespace ideajudge
