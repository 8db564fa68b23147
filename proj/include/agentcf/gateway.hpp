#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agentcf {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

enum class TaskKind { Selection, Reflection, Inference, Auxiliary };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view s);

/// Default generation budgets per task kind (selection answers are short,
/// reflections and rankings are not).
int default_max_tokens(TaskKind kind);

struct ChatRequest {
  std::vector<ChatMessage> messages;
  TaskKind route = TaskKind::Auxiliary;
  double temperature = 0.0;
  int max_tokens = 1024;

  static ChatRequest make(TaskKind kind, std::string system_prompt,
                          std::string user_prompt = {});
};

enum class ResponseSource { Live, Cache, Script };

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  ResponseSource source = ResponseSource::Script;
  std::optional<TokenUsage> usage;
  bool empty_completion = false;
};

struct RouteTable {
  std::map<TaskKind, std::string> models;

  /// Mirrors the two-model split used in the original experiments: selection
  /// is routed to a cheaper model than reflection/inference.
  static RouteTable defaults();
  const std::string& resolve(TaskKind kind) const;
};

/// Canonical byte representation of a request: sorted-key JSON over
/// (model, messages, temperature, max_tokens). Prompt bytes are preserved
/// exactly; this string is the identity of an experiment call.
std::string canonical_request(const ChatRequest& req, const std::string& model);

/// Hex SHA-256 digest of the canonical representation.
std::string cache_key(const ChatRequest& req, const std::string& model);

std::string sha256_hex(std::string_view data);

/// Disk-backed append-only prompt->response store. One JSON record per line.
class ReplayStore {
 public:
  ReplayStore() = default;

  static ReplayStore open(const std::filesystem::path& path);
  static ReplayStore create(const std::filesystem::path& path);

  std::optional<std::string> lookup(const std::string& digest) const;
  void append(const std::string& digest, const std::string& model,
              const std::string& summary, const std::string& response);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::map<std::string, std::string> entries_;
  mutable std::mutex mutex_;

 public:
  ReplayStore(const ReplayStore&) = delete;
  ReplayStore& operator=(const ReplayStore&) = delete;
  ReplayStore(ReplayStore&& other) noexcept;
  ReplayStore& operator=(ReplayStore&& other) noexcept;
};

/// A backend answers fully-routed requests (model already resolved).
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResponse complete(const ChatRequest& req, const std::string& model) = 0;
};

using ScriptFn = std::function<std::string(const ChatRequest&)>;

class ScriptBackend : public Backend {
 public:
  explicit ScriptBackend(ScriptFn fn) : fn_(std::move(fn)) {}
  ChatResponse complete(const ChatRequest& req, const std::string& model) override;

 private:
  ScriptFn fn_;
};

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<ReplayStore> store) : store_(std::move(store)) {}
  ChatResponse complete(const ChatRequest& req, const std::string& model) override;

 private:
  std::shared_ptr<ReplayStore> store_;
};

/// Wraps any inner backend and persists every response under its cache key.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(std::unique_ptr<Backend> inner, std::shared_ptr<ReplayStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  ChatResponse complete(const ChatRequest& req, const std::string& model) override;

 private:
  std::unique_ptr<Backend> inner_;
  std::shared_ptr<ReplayStore> store_;
};

struct RetryPolicy {
  int max_retries = 3;
  double initial_backoff_seconds = 0.5;
  double backoff_multiplier = 2.0;

  /// Transport errors and 429/5xx are retryable; other 4xx never are.
  static bool retryable_status(int status);
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://host:port ; path /v1/chat/completions
  std::string path = "/v1/chat/completions";
  std::string api_key_env = "LLM_API_KEY";
  RetryPolicy retry;
  int timeout_seconds = 120;
};

/// Chat-completion wire protocol client over plain HTTP.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ChatResponse complete(const ChatRequest& req, const std::string& model) override;

 private:
  HttpBackendConfig config_;
};

/// Routes requests to models and delegates to the configured backend.
class Gateway {
 public:
  Gateway(RouteTable routes, std::unique_ptr<Backend> backend);

  ChatResponse complete(const ChatRequest& req);
  const RouteTable& routes() const { return routes_; }

 private:
  RouteTable routes_;
  std::unique_ptr<Backend> backend_;
};

}  // namespace agentcf
