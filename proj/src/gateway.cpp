#include "agentcf/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "agentcf/errors.hpp"

namespace agentcf {

namespace {

using json = nlohmann::json;

constexpr int kReplaySchema = 1;

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  throw ConfigError("unknown chat role: " + std::string(s));
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Selection: return "selection";
    case TaskKind::Reflection: return "reflection";
    case TaskKind::Inference: return "inference";
    case TaskKind::Auxiliary: return "auxiliary";
  }
  return "auxiliary";
}

TaskKind task_kind_from_string(std::string_view s) {
  if (s == "selection") return TaskKind::Selection;
  if (s == "reflection") return TaskKind::Reflection;
  if (s == "inference") return TaskKind::Inference;
  if (s == "auxiliary") return TaskKind::Auxiliary;
  throw ConfigError("unknown task kind: " + std::string(s));
}

int default_max_tokens(TaskKind kind) {
  return kind == TaskKind::Selection ? 512 : 1024;
}

ChatRequest ChatRequest::make(TaskKind kind, std::string system_prompt,
                              std::string user_prompt) {
  ChatRequest req;
  req.route = kind;
  req.max_tokens = default_max_tokens(kind);
  req.messages.push_back({Role::System, std::move(system_prompt)});
  if (!user_prompt.empty()) req.messages.push_back({Role::User, std::move(user_prompt)});
  return req;
}

RouteTable RouteTable::defaults() {
  RouteTable table;
  table.models[TaskKind::Selection] = "text-davinci-003";
  table.models[TaskKind::Reflection] = "gpt-3.5-turbo-16k-0613";
  table.models[TaskKind::Inference] = "gpt-3.5-turbo-16k-0613";
  table.models[TaskKind::Auxiliary] = "gpt-3.5-turbo-16k-0613";
  return table;
}

const std::string& RouteTable::resolve(TaskKind kind) const {
  auto it = models.find(kind);
  if (it == models.end()) {
    throw ConfigError("route table has no model for task kind '" +
                      std::string(to_string(kind)) + "'");
  }
  return it->second;
}

std::string canonical_request(const ChatRequest& req, const std::string& model) {
  json doc;
  doc["max_tokens"] = req.max_tokens;
  json messages = json::array();
  for (const auto& msg : req.messages) {
    messages.push_back({{"content", msg.content}, {"role", std::string(to_string(msg.role))}});
  }
  doc["messages"] = std::move(messages);
  doc["model"] = model;
  doc["temperature"] = req.temperature;
  return doc.dump();
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("sha256: cannot allocate digest context");
  bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
            EVP_DigestFinal_ex(ctx, digest, &digest_len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("sha256: digest computation failed");

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(digest_len * 2);
  for (unsigned int i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string cache_key(const ChatRequest& req, const std::string& model) {
  return sha256_hex(canonical_request(req, model));
}

ReplayStore::ReplayStore(ReplayStore&& other) noexcept {
  std::lock_guard lock(other.mutex_);
  path_ = std::move(other.path_);
  entries_ = std::move(other.entries_);
}

ReplayStore& ReplayStore::operator=(ReplayStore&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    path_ = std::move(other.path_);
    entries_ = std::move(other.entries_);
  }
  return *this;
}

ReplayStore ReplayStore::open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open replay store: " + path.string());
  ReplayStore store;
  store.path_ = path;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      throw SnapshotError("replay store line " + std::to_string(line_no) + ": bad record");
    }
    if (rec.value("v", -1) != kReplaySchema) {
      throw SnapshotError("replay store line " + std::to_string(line_no) +
                          ": unsupported schema version");
    }
    store.entries_[rec.at("digest").get<std::string>()] =
        rec.at("response").get<std::string>();
  }
  return store;
}

ReplayStore ReplayStore::create(const std::filesystem::path& path) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("cannot create replay store: " + path.string());
  out.close();
  return open(path);
}

std::optional<std::string> ReplayStore::lookup(const std::string& digest) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ReplayStore::append(const std::string& digest, const std::string& model,
                         const std::string& summary, const std::string& response) {
  std::lock_guard lock(mutex_);
  if (entries_.contains(digest)) return;
  entries_[digest] = response;
  if (path_.empty()) return;
  json rec;
  rec["v"] = kReplaySchema;
  rec["digest"] = digest;
  rec["model"] = model;
  rec["summary"] = summary;
  rec["response"] = response;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot append to replay store: " + path_.string());
  out << rec.dump() << "\n";
}

std::size_t ReplayStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

ChatResponse ScriptBackend::complete(const ChatRequest& req, const std::string&) {
  ChatResponse resp;
  resp.text = fn_(req);
  resp.source = ResponseSource::Script;
  resp.empty_completion = resp.text.empty();
  return resp;
}

ChatResponse ReplayBackend::complete(const ChatRequest& req, const std::string& model) {
  const std::string digest = cache_key(req, model);
  auto hit = store_->lookup(digest);
  if (!hit) throw ReplayMissError(digest);
  ChatResponse resp;
  resp.text = *hit;
  resp.source = ResponseSource::Cache;
  resp.empty_completion = resp.text.empty();
  return resp;
}

namespace {

std::string request_summary(const ChatRequest& req) {
  if (req.messages.empty()) return {};
  const std::string& last = req.messages.back().content;
  return last.substr(0, 120);
}

}  // namespace

ChatResponse RecordingBackend::complete(const ChatRequest& req, const std::string& model) {
  const std::string digest = cache_key(req, model);
  if (auto hit = store_->lookup(digest)) {
    ChatResponse resp;
    resp.text = *hit;
    resp.source = ResponseSource::Cache;
    resp.empty_completion = resp.text.empty();
    return resp;
  }
  ChatResponse resp = inner_->complete(req, model);
  store_->append(digest, model, request_summary(req), resp.text);
  return resp;
}

bool RetryPolicy::retryable_status(int status) {
  if (status == 429) return true;
  return status >= 500 && status < 600;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("http backend: endpoint not configured");
}

ChatResponse HttpBackend::complete(const ChatRequest& req, const std::string& model) {
  json body;
  body["model"] = model;
  json messages = json::array();
  for (const auto& msg : req.messages) {
    messages.push_back({{"role", std::string(to_string(msg.role))}, {"content", msg.content}});
  }
  body["messages"] = std::move(messages);
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

  double backoff = config_.retry.initial_backoff_seconds;
  int attempts_left = config_.retry.max_retries;
  for (;;) {
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    auto result = client.Post(config_.path, headers, payload, "application/json");

    bool transport_error = !result;
    int status = transport_error ? 0 : result->status;
    if (!transport_error && status == 200) {
      json doc = json::parse(result->body, nullptr, false);
      if (doc.is_discarded()) throw GatewayError("backend returned malformed JSON");
      ChatResponse resp;
      resp.source = ResponseSource::Live;
      try {
        resp.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw GatewayError(std::string("unexpected completion shape: ") + e.what());
      }
      if (doc.contains("usage") && doc["usage"].is_object()) {
        TokenUsage usage;
        usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
        usage.completion_tokens = doc["usage"].value("completion_tokens", 0);
        resp.usage = usage;
      }
      resp.empty_completion = resp.text.empty();
      return resp;
    }

    bool retryable = transport_error || RetryPolicy::retryable_status(status);
    if (!retryable) throw HttpError(status, result ? result->body : "");
    if (attempts_left-- <= 0) {
      if (transport_error) {
        throw GatewayError("transport failure after retries: " +
                           httplib::to_string(result.error()));
      }
      throw HttpError(status, result->body);
    }
    if (backoff > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= config_.retry.backoff_multiplier;
    }
  }
}

Gateway::Gateway(RouteTable routes, std::unique_ptr<Backend> backend)
    : routes_(std::move(routes)), backend_(std::move(backend)) {
  if (!backend_) throw ConfigError("gateway: no backend configured");
}

ChatResponse Gateway::complete(const ChatRequest& req) {
  if (req.messages.empty()) throw GatewayError("request has no messages");
  for (const auto& msg : req.messages) {
    if (msg.content.empty()) throw GatewayError("request has an empty message");
  }
  const std::string& model = routes_.resolve(req.route);
  return backend_->complete(req, model);
}

}  // namespace agentcf
