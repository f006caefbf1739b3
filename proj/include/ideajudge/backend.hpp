#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "ideajudge/conditioning.hpp"
#include "ideajudge/corpus.hpp"
#include "ideajudge/http.hpp"
#include "ideajudge/prompt.hpp"

namespace ideajudge {

enum class BackendKind { mock_knn, replay, http_chat };

std::string_view to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

struct BackendConfig {
  BackendKind kind = BackendKind::mock_knn;

  // http_chat
  std::string endpoint;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env = "IDEAJUDGE_API_KEY";
  double temperature = 0.0;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int backoff_ms = 500;

  /// Append-only response cache. Required for replay; optional otherwise
  /// (a mock run with a cache records responses for later replay).
  std::filesystem::path cache_path;
  /// Backend id whose cached responses a replay backend serves.
  std::string replay_source = "mock_knn";

  std::size_t mock_neighbors = 3;

  nlohmann::ordered_json to_json() const;
  /// Missing keys keep their defaults.
  static BackendConfig from_json(const nlohmann::json& j);
};

/// What a backend may look at for one call. Remote backends use only the
/// bundle; the offline mock reads the structured inputs.
struct JudgeRequest {
  const Corpus& corpus;
  const TargetInstance& target;
  const ConditioningSet& conditioning;
  const PromptBundle& bundle;
};

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual std::string id() const = 0;
  /// False when calls must not overlap; the runner then serializes.
  virtual bool concurrent() const { return true; }
  /// Raw completion text. Throws BackendError subclasses.
  virtual std::string invoke(const JudgeRequest& request) = 0;
};

/// Append-only line-delimited JSON store of raw completions:
/// {"key", "backend_id", "raw", "timestamp"} per line. Reads are concurrent;
/// each append writes one whole line under an exclusive lock.
class ResponseCache {
 public:
  /// In-memory only.
  ResponseCache() = default;
  /// Loads any existing entries; the file is created on the first put.
  explicit ResponseCache(std::filesystem::path path);

  static std::string make_key(std::string_view backend_id, const PromptBundle& bundle);

  std::optional<std::string> get(const std::string& key) const;
  /// First write for a key wins; later writes for the same key are ignored.
  void put(const std::string& key, const std::string& backend_id, const std::string& raw);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
};

/// Deterministic offline judge: similarity-weighted k-nearest-neighbour vote
/// over the conditioning examples, using token overlap between idea texts.
/// Zero-shot answers the scale midpoint. Always reports confidence 95.
std::string mock_predict(const Corpus& corpus, const ConditioningSet& conditioning,
                         const TargetInstance& target, std::size_t neighbors = 3);

inline constexpr int kMockConfidence = 95;

class MockKnnBackend : public JudgeBackend {
 public:
  explicit MockKnnBackend(std::size_t neighbors = 3) : neighbors_(neighbors) {}
  std::string id() const override { return "mock_knn"; }
  std::string invoke(const JudgeRequest& request) override;

 private:
  const std::set<std::string>& tokens(const Corpus& corpus, const std::string& idea_id);

  std::size_t neighbors_;
  std::shared_mutex mu_;
  std::unordered_map<std::string, std::set<std::string>> memo_;
};

/// Serves responses recorded under `source_id`; misses raise ReplayMissError.
class ReplayBackend : public JudgeBackend {
 public:
  ReplayBackend(std::shared_ptr<const ResponseCache> cache, std::string source_id);
  std::string id() const override { return source_id_; }
  std::string invoke(const JudgeRequest& request) override;

 private:
  std::shared_ptr<const ResponseCache> cache_;
  std::string source_id_;
};

/// OpenAI-style chat completion endpoint.
class HttpChatBackend : public JudgeBackend {
 public:
  explicit HttpChatBackend(BackendConfig config, HttpTransport transport = default_http_transport());
  std::string id() const override { return "http_chat:" + config_.model; }
  std::string invoke(const JudgeRequest& request) override;

  /// Request body for a prompt.
  nlohmann::json request_body(const PromptBundle& bundle) const;

 private:
  BackendConfig config_;
  HttpTransport transport_;
};

/// Consults the cache before delegating and records every fresh response.
class CachingBackend : public JudgeBackend {
 public:
  CachingBackend(std::unique_ptr<JudgeBackend> inner, std::shared_ptr<ResponseCache> cache);
  std::string id() const override { return inner_->id(); }
  bool concurrent() const override { return inner_->concurrent(); }
  std::string invoke(const JudgeRequest& request) override;

 private:
  std::unique_ptr<JudgeBackend> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

/// Builds the configured backend. http_chat responses are always cached (in
/// memory when no cache path is set). Throws ConfigError on bad settings,
/// including a replay backend without a populated cache.
std::unique_ptr<JudgeBackend> make_backend(const BackendConfig& config,
                                           HttpTransport transport = default_http_transport());

}  // namespace ideajudge
