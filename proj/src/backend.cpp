#include "ideajudge/backend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>

#include "ideajudge/errors.hpp"
#include "ideajudge/text.hpp"

namespace ideajudge {

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::mock_knn:
      return "mock_knn";
    case BackendKind::replay:
      return "replay";
    case BackendKind::http_chat:
      return "http_chat";
  }
  return "?";
}

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "mock_knn") return BackendKind::mock_knn;
  if (s == "replay") return BackendKind::replay;
  if (s == "http_chat") return BackendKind::http_chat;
  throw ConfigError("unknown backend '" + std::string(s) +
                    "' (expected mock_knn, replay or http_chat)");
}

nlohmann::ordered_json BackendConfig::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  if (kind == BackendKind::http_chat) {
    j["endpoint"] = endpoint;
    j["path"] = path;
    j["model"] = model;
    j["api_key_env"] = api_key_env;
    j["temperature"] = temperature;
    j["timeout_seconds"] = timeout_seconds;
    j["max_retries"] = max_retries;
    j["backoff_ms"] = backoff_ms;
  }
  if (kind == BackendKind::replay) j["replay_source"] = replay_source;
  if (kind == BackendKind::mock_knn) j["mock_neighbors"] = mock_neighbors;
  if (!cache_path.empty()) j["cache_path"] = cache_path.string();
  return j;
}

BackendConfig BackendConfig::from_json(const nlohmann::json& j) {
  BackendConfig c;
  if (j.contains("kind")) c.kind = parse_backend_kind(j.at("kind").get<std::string>());
  c.endpoint = j.value("endpoint", c.endpoint);
  c.path = j.value("path", c.path);
  c.model = j.value("model", c.model);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.temperature = j.value("temperature", c.temperature);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
  if (j.contains("cache_path")) c.cache_path = j.at("cache_path").get<std::string>();
  c.replay_source = j.value("replay_source", c.replay_source);
  c.mock_neighbors = j.value("mock_neighbors", c.mock_neighbors);
  return c;
}

// ---------------------------------------------------------------------------
// ResponseCache

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("key") || !j.contains("raw")) {
      throw ParseError(path_.string() + ":" + std::to_string(lineno) + ": bad cache entry",
                       lineno);
    }
    entries_.emplace(j.at("key").get<std::string>(), j.at("raw").get<std::string>());
  }
}

std::string ResponseCache::make_key(std::string_view backend_id, const PromptBundle& bundle) {
  std::string material(backend_id);
  material.push_back('\0');
  material += bundle.text();
  return sha256_hex(material);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& key, const std::string& backend_id,
                        const std::string& raw) {
  std::unique_lock lock(mu_);
  if (!entries_.emplace(key, raw).second) return;
  if (path_.empty()) return;
  nlohmann::ordered_json entry{
      {"key", key},
      {"backend_id", backend_id},
      {"raw", raw},
      {"timestamp", std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count()}};
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot append to response cache " + path_.string());
  out << entry.dump() << '\n';
  out.flush();
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// Mock k-NN judge

namespace {

std::string idea_text(const Idea& idea) {
  return idea.title + " " + idea.description + " " + idea.implementation + " " +
         idea.differentiation;
}

template <typename TokensOf>
std::string knn_predict(const ConditioningSet& conditioning, const TargetInstance& target,
                        std::size_t neighbors, TokensOf&& tokens_of) {
  const auto& spec = dimension_spec(target.dimension);
  nlohmann::ordered_json out;
  if (conditioning.examples.empty()) {
    int score = spec.midpoint();
    out["score"] = score;
    out["reason"] = "No scored examples are available, so the scale midpoint applies. Level " +
                    std::to_string(score) + ": " + spec.level(score).description + ".";
    out["confidence"] = kMockConfidence;
    return out.dump();
  }

  const auto& target_tokens = tokens_of(target.idea_id);
  struct Neighbor {
    std::size_t index;
    double similarity;
  };
  std::vector<Neighbor> ranked;
  for (std::size_t i = 0; i < conditioning.examples.size(); ++i) {
    ranked.push_back({i, token_overlap(target_tokens,
                                       tokens_of(conditioning.examples[i].idea_id))});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.similarity > b.similarity;
  });

  const auto& nearest = conditioning.examples[ranked.front().index];
  int score = 0;
  if (ranked.front().similarity >= 1.0) {
    score = nearest.score;
  } else {
    ranked.resize(std::min(std::max<std::size_t>(neighbors, 1), ranked.size()));
    double weight = 0.0;
    double total = 0.0;
    for (const auto& n : ranked) {
      weight += n.similarity;
      total += n.similarity * conditioning.examples[n.index].score;
    }
    double mean = 0.0;
    if (weight > 0.0) {
      mean = total / weight;
    } else {
      for (const auto& n : ranked) mean += conditioning.examples[n.index].score;
      mean /= static_cast<double>(ranked.size());
    }
    score = std::clamp(static_cast<int>(std::floor(mean + 0.5)), spec.scale_min, spec.scale_max);
  }

  char sim[16];
  std::snprintf(sim, sizeof sim, "%.2f", ranked.front().similarity);
  out["score"] = score;
  out["reason"] = "Closest to example idea " + nearest.idea_id + " (similarity " + sim +
                  ", scored " + std::to_string(nearest.score) + "). Level " +
                  std::to_string(score) + ": " + spec.level(score).description + ".";
  out["confidence"] = kMockConfidence;
  return out.dump();
}

}  // namespace

std::string mock_predict(const Corpus& corpus, const ConditioningSet& conditioning,
                         const TargetInstance& target, std::size_t neighbors) {
  std::unordered_map<std::string, std::set<std::string>> local;
  auto tokens_of = [&](const std::string& idea_id) -> const std::set<std::string>& {
    auto it = local.find(idea_id);
    if (it == local.end()) it = local.emplace(idea_id, token_set(idea_text(corpus.idea(idea_id)))).first;
    return it->second;
  };
  return knn_predict(conditioning, target, neighbors, tokens_of);
}

const std::set<std::string>& MockKnnBackend::tokens(const Corpus& corpus,
                                                     const std::string& idea_id) {
  // Keyed by text rather than id so one backend can serve several corpora.
  std::string text = idea_text(corpus.idea(idea_id));
  {
    std::shared_lock lock(mu_);
    if (auto it = memo_.find(text); it != memo_.end()) return it->second;
  }
  std::unique_lock lock(mu_);
  auto it = memo_.find(text);
  if (it == memo_.end()) {
    auto tokens = token_set(text);
    it = memo_.emplace(std::move(text), std::move(tokens)).first;
  }
  return it->second;
}

std::string MockKnnBackend::invoke(const JudgeRequest& request) {
  return knn_predict(request.conditioning, request.target, neighbors_,
                     [&](const std::string& id) -> const std::set<std::string>& {
                       return tokens(request.corpus, id);
                     });
}

// ---------------------------------------------------------------------------
// Replay, HTTP and caching

ReplayBackend::ReplayBackend(std::shared_ptr<const ResponseCache> cache, std::string source_id)
    : cache_(std::move(cache)), source_id_(std::move(source_id)) {
  if (!cache_ || cache_->size() == 0) {
    throw ConfigError("replay backend requires a populated response cache");
  }
}

std::string ReplayBackend::invoke(const JudgeRequest& request) {
  auto key = ResponseCache::make_key(source_id_, request.bundle);
  if (auto hit = cache_->get(key)) return *hit;
  throw ReplayMissError("replay miss for target " + request.target.key() + " (key " + key + ")");
}

HttpChatBackend::HttpChatBackend(BackendConfig config, HttpTransport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (config_.endpoint.empty()) throw ConfigError("http_chat backend needs an endpoint");
  if (config_.model.empty()) throw ConfigError("http_chat backend needs a model name");
}

nlohmann::json HttpChatBackend::request_body(const PromptBundle& bundle) const {
  return nlohmann::json{
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", bundle.text()}}})},
      {"temperature", config_.temperature}};
}

std::string HttpChatBackend::invoke(const JudgeRequest& request) {
  HttpRequest req{config_.endpoint, config_.path, bearer_headers(config_.api_key_env),
                  request_body(request.bundle).dump(), config_.timeout_seconds};
  req.headers.emplace_back("Content-Type", "application/json");
  HttpResponse res = post_with_retries(
      transport_, req, {config_.max_retries, std::chrono::milliseconds(config_.backoff_ms)});

  auto body = nlohmann::json::parse(res.body, nullptr, false);
  if (body.is_object() && body.contains("choices") && body["choices"].is_array() &&
      !body["choices"].empty()) {
    const auto& choice = body["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      return choice["message"]["content"].get<std::string>();
    }
    if (choice.contains("text") && choice["text"].is_string()) {
      return choice["text"].get<std::string>();
    }
  }
  throw TransportError("malformed chat completion response from " + config_.endpoint);
}

CachingBackend::CachingBackend(std::unique_ptr<JudgeBackend> inner,
                               std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::string CachingBackend::invoke(const JudgeRequest& request) {
  const std::string backend_id = inner_->id();
  auto key = ResponseCache::make_key(backend_id, request.bundle);
  if (auto hit = cache_->get(key)) return *hit;
  std::string raw = inner_->invoke(request);
  cache_->put(key, backend_id, raw);
  return raw;
}

std::unique_ptr<JudgeBackend> make_backend(const BackendConfig& config, HttpTransport transport) {
  std::shared_ptr<ResponseCache> cache;
  if (!config.cache_path.empty()) cache = std::make_shared<ResponseCache>(config.cache_path);

  switch (config.kind) {
    case BackendKind::mock_knn: {
      auto mock = std::make_unique<MockKnnBackend>(config.mock_neighbors);
      if (!cache) return mock;
      return std::make_unique<CachingBackend>(std::move(mock), cache);
    }
    case BackendKind::replay:
      if (!cache) throw ConfigError("replay backend requires --cache");
      return std::make_unique<ReplayBackend>(cache, config.replay_source);
    case BackendKind::http_chat: {
      if (!cache) cache = std::make_shared<ResponseCache>();
      auto http = std::make_unique<HttpChatBackend>(config, std::move(transport));
      return std::make_unique<CachingBackend>(std::move(http), cache);
    }
  }
  throw ConfigError("unsupported backend kind");
}

}  // namespace ideajudge
