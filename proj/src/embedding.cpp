#include "ideajudge/embedding.hpp"

#include <cmath>

#include "ideajudge/errors.hpp"
#include "ideajudge/rng.hpp"
#include "ideajudge/text.hpp"

namespace ideajudge {

std::string_view to_string(EmbeddingKind k) {
  return k == EmbeddingKind::deterministic_hash ? "deterministic_hash" : "http_embedding";
}

EmbeddingKind parse_embedding_kind(std::string_view s) {
  if (s == "deterministic_hash") return EmbeddingKind::deterministic_hash;
  if (s == "http_embedding") return EmbeddingKind::http_embedding;
  throw ConfigError("unknown embedding backend '" + std::string(s) +
                    "' (expected deterministic_hash or http_embedding)");
}

nlohmann::ordered_json EmbeddingConfig::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  j["dimension"] = dimension;
  if (kind == EmbeddingKind::http_embedding) {
    j["endpoint"] = endpoint;
    j["path"] = path;
    j["model"] = model;
    j["api_key_env"] = api_key_env;
  }
  return j;
}

EmbeddingConfig EmbeddingConfig::from_json(const nlohmann::json& j) {
  EmbeddingConfig c;
  if (j.contains("kind")) c.kind = parse_embedding_kind(j.at("kind").get<std::string>());
  c.dimension = j.value("dimension", c.dimension);
  c.endpoint = j.value("endpoint", c.endpoint);
  c.path = j.value("path", c.path);
  c.model = j.value("model", c.model);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
  return c;
}

HashEmbedding::HashEmbedding(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
}

std::string HashEmbedding::id() const {
  return "deterministic_hash:" + std::to_string(dimension_);
}

std::vector<double> HashEmbedding::embed(std::string_view text) {
  std::vector<double> v(dimension_, 0.0);
  for (const auto& tok : tokenize(text)) v[fnv1a64(tok) % dimension_] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

HttpEmbedding::HttpEmbedding(EmbeddingConfig config, HttpTransport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (config_.endpoint.empty()) throw ConfigError("http_embedding needs an endpoint");
  if (config_.model.empty()) throw ConfigError("http_embedding needs a model name");
}

std::vector<double> HttpEmbedding::embed(std::string_view text) {
  std::string key(text);
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  nlohmann::json body{{"model", config_.model}, {"input", nlohmann::json::array({key})}};
  HttpRequest req{config_.endpoint, config_.path, bearer_headers(config_.api_key_env),
                  body.dump(), config_.timeout_seconds};
  req.headers.emplace_back("Content-Type", "application/json");
  auto res = post_with_retries(transport_, req,
                               {config_.max_retries, std::chrono::milliseconds(config_.backoff_ms)});
  auto doc = nlohmann::json::parse(res.body, nullptr, false);
  if (!doc.is_object() || !doc.contains("data") || !doc["data"].is_array() ||
      doc["data"].empty() || !doc["data"][0].contains("embedding")) {
    throw TransportError("malformed embedding response from " + config_.endpoint);
  }
  std::vector<double> v;
  try {
    v = doc["data"][0]["embedding"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError("embedding response holds a non-numeric vector");
  }
  if (config_.dimension != 0 && v.size() != config_.dimension) {
    throw TransportError("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                         std::to_string(config_.dimension));
  }
  std::lock_guard lock(mu_);
  return memo_.emplace(std::move(key), std::move(v)).first->second;
}

std::unique_ptr<EmbeddingBackend> make_embedding(const EmbeddingConfig& config,
                                                 HttpTransport transport) {
  if (config.kind == EmbeddingKind::deterministic_hash) {
    return std::make_unique<HashEmbedding>(config.dimension);
  }
  return std::make_unique<HttpEmbedding>(config, std::move(transport));
}

}  // namespace ideajudge
