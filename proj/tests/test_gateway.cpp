#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "agentcf/errors.hpp"
#include "agentcf/gateway.hpp"

using namespace agentcf;

namespace {

ChatRequest simple_request(const std::string& text, TaskKind kind = TaskKind::Selection) {
  ChatRequest req;
  req.route = kind;
  req.messages.push_back({Role::User, text});
  return req;
}

std::filesystem::path temp_store(const std::string& name) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(path);
  return path;
}

/// Local chat-completion server for the live/record paths.
struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::atomic<int> fail_first{0};  // respond 500 to this many requests

  TestServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      ++hits;
      if (fail_first > 0) {
        --fail_first;
        res.status = 500;
        res.set_content("transient", "text/plain");
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      std::string last = body["messages"].back()["content"].get<std::string>();
      nlohmann::json reply;
      reply["choices"] = {{{"message", {{"role", "assistant"}, {"content", "echo:" + last}}}}};
      reply["usage"] = {{"prompt_tokens", 7}, {"completion_tokens", 3}};
      res.set_content(reply.dump(), "application/json");
    });
    server.Post("/bad", [](const httplib::Request&, httplib::Response& res) {
      res.status = 400;
      res.set_content("client error", "text/plain");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~TestServer() {
    server.stop();
    thread.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_CASE("route table resolves per task kind and rejects unmapped kinds") {
  RouteTable table;
  table.models[TaskKind::Selection] = "m1";
  table.models[TaskKind::Reflection] = "m2";
  CHECK(table.resolve(TaskKind::Selection) == "m1");
  CHECK(table.resolve(TaskKind::Reflection) == "m2");
  CHECK_THROWS_AS(table.resolve(TaskKind::Auxiliary), ConfigError);

  // The default table mirrors the two-model split: selection runs on a
  // different model than reflection/inference.
  RouteTable defaults = RouteTable::defaults();
  CHECK(defaults.resolve(TaskKind::Selection) != defaults.resolve(TaskKind::Reflection));
  CHECK(defaults.resolve(TaskKind::Reflection) == defaults.resolve(TaskKind::Inference));
}

TEST_CASE("cache keys are stable and sensitive to every byte") {
  ChatRequest req = simple_request("hello");
  const std::string digest = cache_key(req, "model-a");
  CHECK(digest.size() == 64);  // 256-bit hex
  CHECK(cache_key(req, "model-a") == digest);

  ChatRequest other = req;
  other.messages[0].content = "hello ";
  CHECK(cache_key(other, "model-a") != digest);
  CHECK(cache_key(req, "model-b") != digest);

  ChatRequest hotter = req;
  hotter.temperature = 0.5;
  CHECK(cache_key(hotter, "model-a") != digest);
}

TEST_CASE("requests default to temperature zero") {
  ChatRequest req = ChatRequest::make(TaskKind::Reflection, "sys");
  CHECK(req.temperature == 0.0);
  CHECK(req.max_tokens == 1024);
  CHECK(ChatRequest::make(TaskKind::Selection, "sys").max_tokens == 512);
}

TEST_CASE("script backend echoes through the gateway") {
  Gateway gateway(RouteTable::defaults(), std::make_unique<ScriptBackend>([](const ChatRequest& r) {
                    return r.messages.back().content;
                  }));
  ChatResponse resp = gateway.complete(simple_request("the last user message"));
  CHECK(resp.text == "the last user message");
  CHECK(resp.source == ResponseSource::Script);

  ChatRequest empty;
  CHECK_THROWS_AS(gateway.complete(empty), GatewayError);
}

TEST_CASE("record then replay returns byte-identical responses from the cache") {
  auto path = temp_store("agentcf_gateway_store.jsonl");
  {
    auto store = std::make_shared<ReplayStore>(ReplayStore::create(path));
    auto inner = std::make_unique<ScriptBackend>(
        [](const ChatRequest& r) { return "resp:" + r.messages.back().content; });
    Gateway gateway(RouteTable::defaults(),
                    std::make_unique<RecordingBackend>(std::move(inner), store));
    CHECK(gateway.complete(simple_request("q1")).text == "resp:q1");
    CHECK(gateway.complete(simple_request("q2")).text == "resp:q2");
    // Second hit comes from the store, not the script.
    CHECK(gateway.complete(simple_request("q1")).source == ResponseSource::Cache);
  }
  {
    auto store = std::make_shared<ReplayStore>(ReplayStore::open(path));
    Gateway gateway(RouteTable::defaults(), std::make_unique<ReplayBackend>(store));
    ChatResponse resp = gateway.complete(simple_request("q1"));
    CHECK(resp.text == "resp:q1");
    CHECK(resp.source == ResponseSource::Cache);

    try {
      gateway.complete(simple_request("never recorded"));
      FAIL("expected ReplayMissError");
    } catch (const ReplayMissError& miss) {
      CHECK(miss.digest().size() == 64);
    }
  }
}

TEST_CASE("live backend talks the chat-completion wire protocol") {
  TestServer server;
  HttpBackendConfig config;
  config.endpoint = server.endpoint();
  config.retry.initial_backoff_seconds = 0.0;
  Gateway gateway(RouteTable::defaults(), std::make_unique<HttpBackend>(config));

  ChatResponse resp = gateway.complete(simple_request("ping"));
  CHECK(resp.text == "echo:ping");
  CHECK(resp.source == ResponseSource::Live);
  REQUIRE(resp.usage.has_value());
  CHECK(resp.usage->prompt_tokens == 7);
}

TEST_CASE("transient 5xx responses are retried, 4xx is not") {
  TestServer server;
  HttpBackendConfig config;
  config.endpoint = server.endpoint();
  config.retry.initial_backoff_seconds = 0.0;

  SUBCASE("two failures then success") {
    server.fail_first = 2;
    HttpBackend backend(config);
    ChatResponse resp = backend.complete(simple_request("retry me"), "m");
    CHECK(resp.text == "echo:retry me");
    CHECK(server.hits == 3);
  }
  SUBCASE("retries exhausted surfaces the status") {
    server.fail_first = 10;
    config.retry.max_retries = 2;
    HttpBackend backend(config);
    try {
      backend.complete(simple_request("doomed"), "m");
      FAIL("expected HttpError");
    } catch (const HttpError& error) {
      CHECK(error.status() == 500);
    }
    CHECK(server.hits == 3);  // initial + 2 retries
  }
  SUBCASE("client errors are surfaced immediately") {
    config.path = "/bad";
    HttpBackend backend(config);
    try {
      backend.complete(simple_request("nope"), "m");
      FAIL("expected HttpError");
    } catch (const HttpError& error) {
      CHECK(error.status() == 400);
      CHECK(error.body() == "client error");
    }
    CHECK(server.hits == 0);  // /bad has its own handler; main endpoint untouched
  }
}

TEST_CASE("retry policy classification") {
  CHECK(RetryPolicy::retryable_status(429));
  CHECK(RetryPolicy::retryable_status(500));
  CHECK(RetryPolicy::retryable_status(503));
  CHECK(!RetryPolicy::retryable_status(400));
  CHECK(!RetryPolicy::retryable_status(404));
  CHECK(!RetryPolicy::retryable_status(200));
}

TEST_CASE("record mode wrapping the live backend persists responses") {
  TestServer server;
  auto path = temp_store("agentcf_record_live.jsonl");
  auto store = std::make_shared<ReplayStore>(ReplayStore::create(path));
  HttpBackendConfig config;
  config.endpoint = server.endpoint();
  config.retry.initial_backoff_seconds = 0.0;
  {
    Gateway gateway(RouteTable::defaults(),
                    std::make_unique<RecordingBackend>(std::make_unique<HttpBackend>(config),
                                                       store));
    CHECK(gateway.complete(simple_request("persist me")).text == "echo:persist me");
  }
  // Replay without the server.
  auto reopened = std::make_shared<ReplayStore>(ReplayStore::open(path));
  Gateway replay(RouteTable::defaults(), std::make_unique<ReplayBackend>(reopened));
  CHECK(replay.complete(simple_request("persist me")).text == "echo:persist me");
  CHECK(server.hits == 1);
}
