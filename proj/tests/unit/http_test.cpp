#include <gtest/gtest.h>

#include <deque>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "confbandit/embedder.hpp"
#include "confbandit/environment.hpp"
#include "confbandit/errors.hpp"
#include "confbandit/http.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that clashes with Eigen internals.
#include <httplib.h>

using namespace confbandit;
using nlohmann::json;

namespace {

// Replays canned responses and records every request.
class ScriptedTransport final : public HttpTransport {
 public:
  struct Request {
    std::string url;
    json body;
    HttpHeaders headers;
  };

  void push(int status, std::string body) { replies.push_back(HttpResponse{status, std::move(body)}); }
  void push(const json& body) { push(200, body.dump()); }
  void push_failure() { replies.push_back(HttpResponse{-1, {}}); }

  HttpResponse post(const std::string& url, const std::string& body, const HttpHeaders& headers,
                    std::chrono::milliseconds) override {
    requests.push_back(Request{url, json::parse(body), headers});
    if (replies.empty()) throw TransportFailure("script exhausted");
    HttpResponse r = replies.front();
    replies.pop_front();
    if (r.status < 0) throw TransportFailure("connection refused");
    return r;
  }

  std::deque<HttpResponse> replies;
  std::vector<Request> requests;
};

RetryPolicy no_sleep(std::vector<std::chrono::milliseconds>* waits = nullptr) {
  RetryPolicy retry;
  retry.sleep = [waits](std::chrono::milliseconds d) {
    if (waits != nullptr) waits->push_back(d);
  };
  return retry;
}

std::string header(const HttpHeaders& headers, const std::string& key) {
  for (const auto& [k, v] : headers) {
    if (k == key) return v;
  }
  return {};
}

const QAPair kPair{"q1", "What is 2 + 2?", "4"};

}  // namespace

TEST(PostJson, RetriesServerErrorsWithExponentialBackoff) {
  ScriptedTransport t;
  t.push(500, "oops");
  t.push(429, "slow down");
  t.push_failure();
  t.push(json{{"ok", true}});
  std::vector<std::chrono::milliseconds> waits;
  const json reply = post_json(t, "http://x/y", json{{"a", 1}}, "secret", no_sleep(&waits), "test");
  EXPECT_EQ(reply.at("ok"), true);
  EXPECT_EQ(t.requests.size(), 4u);
  ASSERT_EQ(waits.size(), 3u);
  EXPECT_EQ(waits[0].count(), 500);
  EXPECT_EQ(waits[1].count(), 1000);
  EXPECT_EQ(waits[2].count(), 2000);
  EXPECT_EQ(header(t.requests[0].headers, "Authorization"), "Bearer secret");
}

TEST(PostJson, GivesUpAfterRetryBudget) {
  ScriptedTransport t;
  for (int i = 0; i < 5; ++i) t.push(503, "");
  EXPECT_THROW(post_json(t, "http://x/y", json::object(), "", no_sleep(), "test"), EnvironmentError);
  EXPECT_EQ(t.requests.size(), 4u);
}

TEST(PostJson, ClientErrorsAreNotRetried) {
  ScriptedTransport t;
  t.push(400, "bad");
  EXPECT_THROW(post_json(t, "http://x/y", json::object(), "", no_sleep(), "test"), EnvironmentError);
  EXPECT_EQ(t.requests.size(), 1u);
}

TEST(PostJson, UnparsableReplyIsFormatError) {
  ScriptedTransport t;
  t.push(200, "not json");
  EXPECT_THROW(post_json(t, "http://x/y", json::object(), "", no_sleep(), "test"), FormatError);
}

TEST(PostJson, MissingUrlIsValidationError) {
  ScriptedTransport t;
  EXPECT_THROW(post_json(t, "", json::object(), "", no_sleep(), "test"), ValidationError);
  EXPECT_TRUE(t.requests.empty());
}

TEST(PostJson, NoAuthorizationHeaderWithoutKey) {
  ScriptedTransport t;
  t.push(json::object());
  post_json(t, "http://x/y", json::object(), "", no_sleep(), "test");
  EXPECT_EQ(header(t.requests[0].headers, "Authorization"), "");
}

TEST(LlmGenerate, SendsOneUserMessageWithDecodingSettings) {
  ScriptedTransport t;
  t.push(json{{"content", "The answer is 4."}});
  GenerationOptions options;
  options.retry = no_sleep();
  const RenderedConfig config{"Think.", 0.3, 5};
  const std::string answer = llm_generate(t, Endpoint{"http://llm/chat", "k"}, kPair, config, options);
  EXPECT_EQ(answer, "The answer is 4.");
  const json& body = t.requests.at(0).body;
  ASSERT_EQ(body.at("messages").size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], render_generation_prompt(kPair.question, config));
  EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.3);
  EXPECT_DOUBLE_EQ(body.at("top_p").get<double>(), 0.1);
  EXPECT_EQ(body.at("max_tokens").get<int>(), 5000);
}

TEST(LlmGenerate, AcceptsOpenAiShapeAndRejectsEmpty) {
  GenerationOptions options;
  options.retry = no_sleep();
  const RenderedConfig config{"Think.", 0.0, 3};
  ScriptedTransport t;
  t.push(json{{"choices", {{{"message", {{"content", "four"}}}}}}});
  EXPECT_EQ(llm_generate(t, Endpoint{"http://llm", ""}, kPair, config, options), "four");
  t.push(json{{"content", "  \n"}});
  EXPECT_THROW(llm_generate(t, Endpoint{"http://llm", ""}, kPair, config, options), EnvironmentError);
  t.push(json{{"other", 1}});
  EXPECT_THROW(llm_generate(t, Endpoint{"http://llm", ""}, kPair, config, options), FormatError);
}

TEST(ScoreScalar, LogitAndUnitScores) {
  ScriptedTransport t;
  t.push(json{{"score", 0.0}, {"score_kind", "logit"}});
  t.push(json{{"score", 1.7}, {"score_kind", "unit"}});
  t.push(json{{"score", 0.25}});
  t.push(json{{"score", 1.0}, {"score_kind", "percent"}});
  t.push(json{{"nothing", 1.0}});
  const Endpoint ep{"http://rm/score", ""};
  EXPECT_DOUBLE_EQ(score_scalar(t, ep, kPair, "4", no_sleep()).reward, 0.5);
  EXPECT_DOUBLE_EQ(score_scalar(t, ep, kPair, "4", no_sleep()).reward, 1.0);
  const RewardOutcome o = score_scalar(t, ep, kPair, "4", no_sleep());
  EXPECT_DOUBLE_EQ(o.reward, 0.25);
  EXPECT_EQ(o.source, RewardSource::scalar_endpoint);
  EXPECT_THROW(score_scalar(t, ep, kPair, "4", no_sleep()), FormatError);
  EXPECT_THROW(score_scalar(t, ep, kPair, "4", no_sleep()), FormatError);
  EXPECT_EQ(t.requests[0].body.at("text"),
            "For What is 2 + 2?, the generated answer 4 matches the ground truth 4 and is correct");
}

TEST(ScoreBinaryJudge, YesNoAndFencedReplies) {
  GenerationOptions options;
  options.retry = no_sleep();
  const Endpoint ep{"http://judge", ""};
  ScriptedTransport t;
  t.push(json{{"content", "{\"result\": \"Yes\"}"}});
  t.push(json{{"content", "```json\n{\"result\": \"no\"}\n```"}});
  EXPECT_DOUBLE_EQ(score_binary_judge(t, ep, kPair, "4", options).reward, 1.0);
  EXPECT_DOUBLE_EQ(score_binary_judge(t, ep, kPair, "5", options).reward, 0.0);
  const json& body = t.requests[0].body;
  EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.0);
  EXPECT_EQ(body["messages"][0]["content"], render_judge_prompt(kPair.question, "4", "4"));
}

TEST(ScoreBinaryJudge, ReasksOnceThenFails) {
  GenerationOptions options;
  options.retry = no_sleep();
  const Endpoint ep{"http://judge", ""};
  ScriptedTransport t;
  t.push(json{{"content", "I think so"}});
  t.push(json{{"content", "{\"result\": \"Yes\"}"}});
  EXPECT_DOUBLE_EQ(score_binary_judge(t, ep, kPair, "4", options).reward, 1.0);
  EXPECT_EQ(t.requests.size(), 2u);
  t.push(json{{"content", "maybe"}});
  t.push(json{{"content", "{\"result\": \"perhaps\"}"}});
  EXPECT_THROW(score_binary_judge(t, ep, kPair, "4", options), EnvironmentError);
  EXPECT_EQ(t.requests.size(), 4u);
}

TEST(LiveEnvironment, GeneratesScoresAndWritesTranscript) {
  ScriptedTransport t;
  t.push(json{{"content", "It is 4."}});
  t.push(json{{"score", 2.0}, {"score_kind", "logit"}});
  GenerationOptions options;
  options.retry = no_sleep();
  std::ostringstream transcript;
  const ActionSpace space = build_default_space();
  LiveEnvironment env(space, t, Endpoint{"http://llm", "a"}, Endpoint{"http://rm", "b"},
                      ScoringMode::scalar, options, &transcript);
  const RewardOutcome o = env.reward(kPair, ActionTriple{3, 4, 2}, 0);
  EXPECT_NEAR(o.reward, 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_EQ(o.raw_answer, "It is 4.");
  EXPECT_EQ(env.sim_spec(), nullptr);
  ASSERT_EQ(t.requests.size(), 2u);
  EXPECT_EQ(t.requests[0].url, "http://llm");
  EXPECT_DOUBLE_EQ(t.requests[0].body.at("temperature").get<double>(), 0.4);
  EXPECT_EQ(header(t.requests[1].headers, "Authorization"), "Bearer b");
  const json line = json::parse(transcript.str());
  EXPECT_EQ(line.at("id"), "q1");
  EXPECT_EQ(line.at("steps"), 5);
  EXPECT_EQ(line.at("answer"), "It is 4.");
}

TEST(RemoteEmbedder, ParsesAndChecksWidth) {
  ScriptedTransport t;
  t.push(json{{"embedding", {0.0, 2.0}}});
  t.push(json{{"embedding", {1.0}}});
  t.push(json{{"vector", {1.0, 0.0}}});
  RemoteEmbedderOptions options{"http://emb", "", 2, no_sleep()};
  const Embedding e = embed_remote("hello", options, t);
  EXPECT_DOUBLE_EQ(e.values[1], 1.0);
  EXPECT_EQ(e.source, EmbeddingSource::remote);
  EXPECT_EQ(t.requests[0].body.at("input"), "hello");
  EXPECT_THROW(embed_remote("hello", options, t), FormatError);
  EXPECT_THROW(embed_remote("hello", options, t), FormatError);
}

// The real transport against a local server.
TEST(HttplibTransport, RoundTripAgainstLocalServer) {
  httplib::Server server;
  int hits = 0;
  std::string seen_auth;
  server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    seen_auth = req.get_header_value("Authorization");
    if (hits == 1) {
      res.status = 503;
      return;
    }
    const json body = json::parse(req.body);
    res.set_content(json{{"echo", body.at("text")}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto transport = make_http_transport();
  RetryPolicy retry = no_sleep();
  retry.timeout = std::chrono::milliseconds(5000);
  const json reply = post_json(*transport, "http://127.0.0.1:" + std::to_string(port) + "/score",
                               json{{"text", "hi"}}, "tok", retry, "local");
  server.stop();
  worker.join();
  EXPECT_EQ(reply.at("echo"), "hi");
  EXPECT_EQ(hits, 2);
  EXPECT_EQ(seen_auth, "Bearer tok");
}

TEST(HttplibTransport, ConnectionRefusedIsEnvironmentError) {
  httplib::Server probe;
  const int port = probe.bind_to_any_port("127.0.0.1");
  probe.stop();
  auto transport = make_http_transport();
  RetryPolicy retry = no_sleep();
  retry.max_retries = 1;
  retry.timeout = std::chrono::milliseconds(1000);
  EXPECT_THROW(post_json(*transport, "http://127.0.0.1:" + std::to_string(port) + "/x", json::object(), "",
                         retry, "local"),
               EnvironmentError);
}
