#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <unistd.h>

#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"
#include "mutsum/summary_client.hpp"

using namespace mutsum;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("mutsum-sum-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct Reply {
    int status = 200;
    std::string body;
};

Reply ok_reply(const std::string& text) {
    return {200, json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}},
                                                {"finish_reason", "stop"}}})},
                      {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 7}}}}
                     .dump()};
}

/// Chat-completion stand-in on 127.0.0.1. Replies are consumed in order; the
/// last one repeats.
class MockServer {
public:
    MockServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            Reply r;
            {
                std::lock_guard<std::mutex> lock(mu_);
                requests_.push_back(json::parse(req.body));
                auth_.push_back(req.get_header_value("Authorization"));
                r = replies_.size() > 1 ? replies_.front() : replies_.empty() ? ok_reply("default") : replies_.front();
                if (replies_.size() > 1) replies_.pop_front();
            }
            res.status = r.status;
            res.set_content(r.body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }

    void script(std::deque<Reply> replies) {
        std::lock_guard<std::mutex> lock(mu_);
        replies_ = std::move(replies);
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
    std::vector<json> requests() {
        std::lock_guard<std::mutex> lock(mu_);
        return requests_;
    }
    std::vector<std::string> auth() {
        std::lock_guard<std::mutex> lock(mu_);
        return auth_;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mu_;
    std::deque<Reply> replies_;
    std::vector<json> requests_;
    std::vector<std::string> auth_;
};

ProviderConfig mock_config(const MockServer& server) {
    ProviderConfig c;
    c.endpoint = server.endpoint();
    c.credential_env = "MUTSUM_TEST_KEY";
    c.max_retries = 2;
    c.backoff_base = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(5000);
    return c;
}

/// Counts calls and the peak number running at once.
class CountingProvider final : public SummaryProvider {
public:
    std::atomic<int> calls{0}, in_flight{0}, peak{0};
    std::set<std::string> fail_for;

    Completion complete(const json& payload, const std::string& key) override {
        ++calls;
        const int now = ++in_flight;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --in_flight;
        const std::string prompt = payload["messages"][0]["content"];
        if (fail_for.count(prompt.substr(prompt.rfind('\n') + 1))) throw ReplayMissError(key);
        Completion c;
        c.text = "summary of " + prompt.substr(prompt.rfind('\n') + 1);
        c.created_at = "2024-01-01T00:00:00Z";
        c.transport_meta.attempts = 1;
        return c;
    }
};

}  // namespace

TEST_CASE("prompt and payload") {
    const std::string p = build_prompt("def f():\n    return 1\n");
    CHECK(p.rfind("Explain the following code snippet in plain English.", 0) == 0);
    CHECK(p == "Explain the following code snippet in plain English.\n\ndef f():\n    return 1\n");
    const json payload = chat_payload("m", p, 0.0);
    REQUIRE(payload["messages"].size() == 1);
    CHECK(payload["messages"][0]["role"] == "user");
    CHECK(payload["messages"][0]["content"] == p);
    CHECK(payload["temperature"] == 0.0);
    CHECK(payload["model"] == "m");
}

TEST_CASE("cache keys are pure and collision-free over random inputs") {
    CHECK(cache_key("m", "p", "c") == cache_key("m", "p", "c"));
    CHECK(cache_key("m", "p", "c").size() == 64);
    CHECK(cache_key("m", "pc", "") != cache_key("m", "p", "c"));
    std::mt19937_64 rng(9);
    std::set<std::string> keys;
    std::set<std::tuple<std::string, std::string, std::string>> inputs;
    auto word = [&] {
        std::string s;
        const int n = static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) s.push_back("ab\n x"[rng() % 5]);
        return s;
    };
    for (int i = 0; i < 3000; ++i) {
        auto t = std::make_tuple(word(), word(), word());
        if (!inputs.insert(t).second) continue;
        keys.insert(cache_key(std::get<0>(t), std::get<1>(t), std::get<2>(t)));
    }
    CHECK(keys.size() == inputs.size());
}

TEST_CASE("provider settings") {
    ProviderConfig c;
    CHECK(c.temperature == 0.0);
    c.temperature = 0.7;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.experimental_temperature = true;
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(provider_config_from_json(json{{"temperature", 1.0}}), ConfigError);
    CHECK_THROWS_AS(provider_config_from_json(json{{"api_key", "sk-x"}}), ConfigError);
    const ProviderConfig back = provider_config_from_json(to_json(ProviderConfig{}));
    CHECK(back.model_id == "gpt-4-1106-preview");
    CHECK_FALSE(to_json(back).dump().empty());
}

TEST_CASE("HTTP provider") {
    MockServer server;
    TempDir dir;
    const SummaryStore store(dir.path);
    ProviderConfig config = mock_config(server);
    ::setenv("MUTSUM_TEST_KEY", "secret-token", 1);

    SUBCASE("success, then cache hit without a request") {
        server.script({ok_reply("It returns the smallest element.")});
        HttpChatProvider provider(config);
        const SummaryRecord r = summarize("return heap[0]\n", "p/orig", config, store, provider);
        CHECK(r.summary_text == "It returns the smallest element.");
        CHECK(r.status == SummaryStatus::Ok);
        CHECK(r.transport_meta.attempts == 1);
        REQUIRE(r.token_usage);
        CHECK(r.token_usage->completion == 7);
        CHECK(server.auth().at(0) == "Bearer secret-token");
        const auto reqs = server.requests();
        REQUIRE(reqs.size() == 1);
        CHECK(reqs[0]["messages"].size() == 1);
        CHECK(reqs[0] == r.request_payload);

        const SummaryRecord again = summarize("return heap[0]\n", "p/orig", config, store, provider);
        CHECK(again == r);
        CHECK(server.requests().size() == 1);
        CHECK(provider.requests_sent() == 1);
        const std::string stored = fsutil::read_file(store.path_for(r.cache_key));
        CHECK(stored.find("secret-token") == std::string::npos);
    }
    SUBCASE("transient failures are retried") {
        server.script({{503, "{}"}, {429, "{}"}, ok_reply("third time")});
        HttpChatProvider provider(config);
        const SummaryRecord r = summarize("x = 1\n", "s", config, store, provider);
        CHECK(r.summary_text == "third time");
        CHECK(r.transport_meta.attempts == 3);
    }
    SUBCASE("retry budget exhausted") {
        server.script({{500, "{}"}});
        HttpChatProvider provider(config);
        try {
            summarize("x = 2\n", "s", config, store, provider);
            FAIL("expected a transport error");
        } catch (const TransportError& e) {
            CHECK(e.attempts().size() == 3);
            CHECK(e.attempts()[0].find("status 500") != std::string::npos);
        }
        CHECK(store.keys().empty());
    }
    SUBCASE("client errors are not retried") {
        server.script({{401, R"({"error":{"message":"bad key","code":"invalid_api_key"}})"}});
        HttpChatProvider provider(config);
        try {
            summarize("x = 3\n", "s", config, store, provider);
            FAIL("expected a transport error");
        } catch (const TransportError& e) {
            CHECK(e.attempts().size() == 1);
            CHECK(e.attempts()[0].find("bad key") != std::string::npos);
        }
    }
    SUBCASE("provider context overflow is a hard error") {
        server.script({{400, R"({"error":{"message":"too long","code":"context_length_exceeded"}})"}});
        HttpChatProvider provider(config);
        CHECK_THROWS_AS(summarize("x = 4\n", "s", config, store, provider), ContextOverflowError);
    }
    SUBCASE("local size limit refuses before sending") {
        config.max_prompt_bytes = 40;
        HttpChatProvider provider(config);
        CHECK_THROWS_AS(summarize(std::string(100, 'x'), "s", config, store, provider), ContextOverflowError);
        CHECK(server.requests().empty());
    }
    SUBCASE("refusal becomes a failed record that is not retried") {
        server.script({{200, R"({"choices":[{"message":{"content":null,"refusal":"cannot help"},"finish_reason":"stop"}]})"}});
        HttpChatProvider provider(config);
        const SummaryRecord r = summarize("x = 5\n", "s", config, store, provider);
        CHECK(r.status == SummaryStatus::Failed);
        CHECK(r.failure_reason.find("cannot help") != std::string::npos);
        CHECK(fs::exists(store.failed_path_for(r.cache_key)));
        CHECK_FALSE(store.get(r.cache_key));
        summarize("x = 5\n", "s", config, store, provider);
        CHECK(server.requests().size() == 1);
    }
    SUBCASE("empty text counts as a refusal") {
        server.script({ok_reply("   ")});
        HttpChatProvider provider(config);
        CHECK(summarize("x = 6\n", "s", config, store, provider).status == SummaryStatus::Failed);
    }
    SUBCASE("missing credential") {
        config.credential_env = "MUTSUM_TEST_KEY_UNSET";
        ::unsetenv("MUTSUM_TEST_KEY_UNSET");
        HttpChatProvider provider(config);
        CHECK_THROWS_AS(summarize("x = 7\n", "s", config, store, provider), ConfigError);
    }
    SUBCASE("unreachable endpoint") {
        config.endpoint = "http://127.0.0.1:1/v1/chat/completions";
        config.max_retries = 1;
        HttpChatProvider provider(config);
        try {
            summarize("x = 8\n", "s", config, store, provider);
            FAIL("expected a transport error");
        } catch (const TransportError& e) {
            CHECK(e.attempts().size() == 2);
        }
    }
}

TEST_CASE("replay provider") {
    TempDir dir;
    const ProviderConfig config;
    const std::string a = "def a():\n    return 1\n", b = "def b():\n    return 2\n";
    const std::string ka = cache_key(config.model_id, build_prompt(a), a);
    const std::string kb = cache_key(config.model_id, build_prompt(b), b);
    const fs::path fixture = dir.path / "fixture.jsonl";
    {
        std::ofstream out(fixture);
        out << json{{"cache_key", ka}, {"summary_text", "Returns one."}}.dump() << "\n\n"
            << json{{"cache_key", kb}, {"summary_text", "Returns two."}, {"created_at", "2024-05-01T00:00:00Z"}}.dump()
            << "\n";
    }

    SUBCASE("resolves from the fixture only") {
        ReplayProvider replay(fixture);
        CHECK(replay.size() == 2);
        const SummaryStore store(dir.path / "cache");
        CHECK(summarize(a, "a", config, store, replay).summary_text == "Returns one.");
        const SummaryRecord rb = summarize(b, "b", config, store, replay);
        CHECK(rb.summary_text == "Returns two.");
        CHECK(rb.created_at == "2024-05-01T00:00:00Z");
        CHECK(replay.hits() == 2);
    }
    SUBCASE("unknown key names the key") {
        ReplayProvider replay(fixture);
        const SummaryStore store(dir.path / "cache");
        try {
            summarize("x = 1\n", "x", config, store, replay);
            FAIL("expected a miss");
        } catch (const ReplayMissError& e) {
            CHECK(e.key() == cache_key(config.model_id, build_prompt("x = 1\n"), "x = 1\n"));
            CHECK(std::string(e.what()).find(e.key()) != std::string::npos);
        }
    }
    SUBCASE("malformed fixture reports the line") {
        const fs::path bad = dir.path / "bad.jsonl";
        std::ofstream(bad) << json{{"cache_key", ka}, {"summary_text", "ok"}}.dump() << "\n{\"cache_key\": 3}\n";
        try {
            ReplayProvider replay(bad);
            FAIL("expected a fixture error");
        } catch (const FixtureError& e) {
            CHECK(std::string(e.what()).find("bad.jsonl:2") != std::string::npos);
        }
        std::ofstream(bad) << "{not json\n";
        CHECK_THROWS_AS(ReplayProvider{bad}, FixtureError);
        CHECK_THROWS_AS(ReplayProvider{dir.path / "missing.jsonl"}, FixtureError);
    }
    SUBCASE("a cache directory replays into identical records") {
        const SummaryStore live(dir.path / "live");
        CountingProvider counting;
        std::vector<SummaryRecord> first;
        for (const std::string& code : {a, b}) first.push_back(summarize(code, code, config, live, counting));

        ReplayProvider replay(live.dir());
        const SummaryStore fresh(dir.path / "fresh");
        for (std::size_t i = 0; i < first.size(); ++i) {
            const std::string& code = i == 0 ? a : b;
            CHECK(summarize(code, code, config, fresh, replay) == first[i]);
        }
        CHECK(fsutil::read_file(fresh.path_for(ka)) == fsutil::read_file(live.path_for(ka)));
    }
}

TEST_CASE("batch summarize") {
    TempDir dir;
    const ProviderConfig config;

    SUBCASE("empty batch") {
        CountingProvider p;
        const SummaryStore store(dir.path / "s");
        const BatchManifest m = batch_summarize({}, config, store, p, 4);
        CHECK(m.records.empty());
        CHECK(m.failures.empty());
    }
    SUBCASE("failures are isolated and the bound holds") {
        std::vector<Subject> subjects;
        for (int i = 0; i < 10; ++i) subjects.push_back({"s" + std::to_string(i), "code" + std::to_string(i)});
        CountingProvider p;
        p.fail_for = {"code2", "code5", "code9"};
        const SummaryStore store(dir.path / "s");
        const BatchManifest m = batch_summarize(subjects, config, store, p, 3);
        CHECK(m.records.size() == 7);
        REQUIRE(m.failures.size() == 3);
        CHECK(m.failures[0].subject_ref == "s2");
        CHECK(m.failures[0].code == "replay_miss");
        CHECK(p.peak.load() <= 3);
        CHECK(std::is_sorted(m.records.begin(), m.records.end(),
                             [](const auto& x, const auto& y) { return x.subject_ref < y.subject_ref; }));
        CHECK_THROWS_AS(batch_summarize(subjects, config, store, p, 0), ConfigError);
    }
    SUBCASE("output does not depend on parallelism") {
        std::vector<Subject> subjects;
        for (int i = 0; i < 25; ++i) subjects.push_back({"s" + std::to_string(i), "c" + std::to_string(i % 20)});
        CountingProvider p1, p8;
        const BatchManifest one = batch_summarize(subjects, config, SummaryStore(dir.path / "one"), p1, 1);
        const BatchManifest eight = batch_summarize(subjects, config, SummaryStore(dir.path / "eight"), p8, 8);
        CHECK(p1.peak.load() == 1);
        REQUIRE(one.records.size() == eight.records.size());
        for (std::size_t i = 0; i < one.records.size(); ++i) {
            CHECK(one.records[i].subject_ref == eight.records[i].subject_ref);
            CHECK(one.records[i].summary_text == eight.records[i].summary_text);
            CHECK(one.records[i].cache_key == eight.records[i].cache_key);
        }
    }
}
