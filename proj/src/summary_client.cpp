#include "mutsum/summary_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <random>
#include <regex>
#include <thread>

#include <httplib.h>

#include "mutsum/digest.hpp"
#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"

namespace mutsum {

namespace fs = std::filesystem;
using nlohmann::json;

std::string build_prompt(std::string_view code) {
    std::string p(kInstruction);
    p += "\n\n";
    p += code;
    return p;
}

std::string cache_key(std::string_view model_id, std::string_view prompt_text, std::string_view code) {
    return digest::fields_hex({model_id, prompt_text, code});
}

void ProviderConfig::validate() const {
    if (temperature != 0.0 && !experimental_temperature)
        throw ConfigError("temperature must stay 0 unless experimental_temperature is set");
    if (model_id.empty()) throw ConfigError("model_id is empty");
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

json to_json(const ProviderConfig& c) {
    json j{{"provider_name", c.provider_name},
           {"model_id", c.model_id},
           {"endpoint", c.endpoint},
           {"credential_env", c.credential_env},
           {"temperature", c.temperature},
           {"experimental_temperature", c.experimental_temperature},
           {"timeout_ms", c.timeout.count()},
           {"max_retries", c.max_retries},
           {"backoff_base_ms", c.backoff_base.count()}};
    j["max_prompt_bytes"] = c.max_prompt_bytes ? json(*c.max_prompt_bytes) : json(nullptr);
    return j;
}

ProviderConfig provider_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("provider settings must be a JSON object");
    ProviderConfig c;
    try {
        c.provider_name = j.value("provider_name", c.provider_name);
        c.model_id = j.value("model_id", c.model_id);
        c.endpoint = j.value("endpoint", c.endpoint);
        c.credential_env = j.value("credential_env", c.credential_env);
        c.temperature = j.value("temperature", c.temperature);
        c.experimental_temperature = j.value("experimental_temperature", c.experimental_temperature);
        c.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.timeout.count()));
        c.max_retries = j.value("max_retries", c.max_retries);
        c.backoff_base = std::chrono::milliseconds(j.value("backoff_base_ms", c.backoff_base.count()));
        if (j.contains("max_prompt_bytes") && !j["max_prompt_bytes"].is_null())
            c.max_prompt_bytes = j["max_prompt_bytes"].get<std::size_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad provider settings: ") + e.what());
    }
    if (j.contains("api_key") || j.contains("credential"))
        throw ConfigError("provider settings must name an environment variable, not carry a key");
    c.validate();
    return c;
}

json chat_payload(std::string_view model_id, std::string_view prompt_text, double temperature) {
    return json{{"model", model_id},
                {"messages", json::array({json{{"role", "user"}, {"content", prompt_text}}})},
                {"temperature", temperature}};
}

// ---------------------------------------------------------------------------
// Records

namespace {

std::string now_iso8601() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string record_id(std::string_view key) { return "sum-" + std::string(key.substr(0, 16)); }

}  // namespace

std::string content_digest(const SummaryRecord& r) {
    return digest::fields_hex({r.cache_key, r.model_id, r.summary_text});
}

json to_json(const SummaryRecord& r) {
    json j{{"id", r.id},
           {"model_id", r.model_id},
           {"prompt_text", r.prompt_text},
           {"summary_text", r.summary_text},
           {"cache_key", r.cache_key},
           {"created_at", r.created_at},
           {"transport_meta", {{"attempts", r.transport_meta.attempts}, {"latency_ms", r.transport_meta.latency_ms}}},
           {"status", r.status == SummaryStatus::Ok ? "ok" : "failed"},
           {"failure_reason", r.failure_reason},
           {"request_payload", r.request_payload},
           {"content_digest", content_digest(r)}};
    j["token_usage"] = r.token_usage ? json{{"prompt", r.token_usage->prompt}, {"completion", r.token_usage->completion}}
                                     : json(nullptr);
    return j;
}

SummaryRecord summary_from_json(const json& j) {
    SummaryRecord r;
    r.cache_key = j.at("cache_key").get<std::string>();
    r.summary_text = j.at("summary_text").get<std::string>();
    r.id = j.value("id", record_id(r.cache_key));
    r.model_id = j.value("model_id", std::string());
    r.prompt_text = j.value("prompt_text", std::string());
    r.created_at = j.value("created_at", std::string());
    if (j.contains("token_usage") && j["token_usage"].is_object())
        r.token_usage = TokenUsage{j["token_usage"].value("prompt", std::int64_t{0}),
                                   j["token_usage"].value("completion", std::int64_t{0})};
    if (j.contains("transport_meta") && j["transport_meta"].is_object()) {
        r.transport_meta.attempts = j["transport_meta"].value("attempts", 0);
        r.transport_meta.latency_ms = j["transport_meta"].value("latency_ms", std::int64_t{0});
    }
    const std::string status = j.value("status", std::string("ok"));
    if (status != "ok" && status != "failed") throw FixtureError("unknown summary status " + status);
    r.status = status == "ok" ? SummaryStatus::Ok : SummaryStatus::Failed;
    r.failure_reason = j.value("failure_reason", std::string());
    r.request_payload = j.value("request_payload", json(nullptr));
    return r;
}

// ---------------------------------------------------------------------------
// Store

SummaryStore::SummaryStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path SummaryStore::path_for(std::string_view key) const { return dir_ / (std::string(key) + ".json"); }

fs::path SummaryStore::failed_path_for(std::string_view key) const {
    return dir_ / "failed" / (std::string(key) + ".json");
}

namespace {

std::optional<SummaryRecord> load_record(const fs::path& p) {
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    try {
        return summary_from_json(fsutil::read_json(p));
    } catch (const json::exception& e) {
        throw StoreError("corrupt summary record " + p.string() + ": " + e.what());
    }
}

}  // namespace

std::optional<SummaryRecord> SummaryStore::get(std::string_view key) const { return load_record(path_for(key)); }

std::optional<SummaryRecord> SummaryStore::get_failed(std::string_view key) const {
    return load_record(failed_path_for(key));
}

bool SummaryStore::put(const SummaryRecord& r) const {
    if (r.status == SummaryStatus::Ok) {
        const bool wrote = fsutil::write_json(path_for(r.cache_key), to_json(r));
        std::error_code ec;
        fs::remove(failed_path_for(r.cache_key), ec);
        return wrote;
    }
    return fsutil::write_json(failed_path_for(r.cache_key), to_json(r));
}

std::vector<std::string> SummaryStore::keys() const {
    std::vector<std::string> out;
    std::error_code ec;
    if (!fs::is_directory(dir_, ec)) return out;
    for (const auto& e : fs::directory_iterator(dir_)) {
        if (!e.is_regular_file() || e.path().extension() != ".json" || fsutil::is_temp_file(e.path())) continue;
        out.push_back(e.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// HTTP provider

namespace {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ConfigError("endpoint must be an http(s) URL: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
    parse_endpoint(config_.endpoint);
}

std::string HttpChatProvider::credential() {
    std::lock_guard<std::mutex> lock(mu_);
    if (!credential_) {
        const char* v = config_.credential_env.empty() ? nullptr : std::getenv(config_.credential_env.c_str());
        if (!v || !*v) throw ConfigError("credential variable " + config_.credential_env + " is not set");
        credential_ = v;
    }
    return *credential_;
}

Completion HttpChatProvider::complete(const json& payload, const std::string& /*key*/) {
    const Endpoint ep = parse_endpoint(config_.endpoint);
    const std::string token = credential();
    const std::string body = payload.dump();
    const httplib::Headers headers = {{"Authorization", "Bearer " + token}};

    std::vector<std::string> log;
    std::mt19937_64 jitter_rng(std::random_device{}());
    const auto started = std::chrono::steady_clock::now();
    const int total_attempts = config_.max_retries + 1;

    for (int attempt = 1; attempt <= total_attempts; ++attempt) {
        httplib::Client client(ep.base);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout).count() % 1000000;
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        ++sent_;
        auto res = client.Post(ep.path, headers, body, "application/json");

        std::string what;
        bool retry = true;
        if (!res) {
            what = "connection error: " + httplib::to_string(res.error());
        } else if (res->status >= 200 && res->status < 300) {
            json j;
            try {
                j = json::parse(res->body);
                const json& choice = j.at("choices").at(0);
                const json& message = choice.at("message");
                Completion c;
                c.transport_meta.attempts = attempt;
                c.transport_meta.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                                  std::chrono::steady_clock::now() - started)
                                                  .count();
                if (j.contains("usage") && j["usage"].is_object())
                    c.token_usage = TokenUsage{j["usage"].value("prompt_tokens", std::int64_t{0}),
                                               j["usage"].value("completion_tokens", std::int64_t{0})};
                const json content = message.value("content", json(nullptr));
                c.text = content.is_string() ? content.get<std::string>() : std::string();
                const json refusal = message.value("refusal", json(nullptr));
                if (refusal.is_string() && !refusal.get<std::string>().empty()) {
                    c.refused = true;
                    c.refusal_reason = "refusal: " + refusal.get<std::string>();
                } else if (choice.value("finish_reason", std::string()) == "content_filter") {
                    c.refused = true;
                    c.refusal_reason = "content filter";
                } else if (c.text.find_first_not_of(" \t\r\n") == std::string::npos) {
                    c.refused = true;
                    c.refusal_reason = "empty summary text";
                }
                return c;
            } catch (const json::exception& e) {
                what = "status " + std::to_string(res->status) + ", unreadable body: " + e.what();
            }
        } else {
            what = "status " + std::to_string(res->status);
            try {
                const json j = json::parse(res->body);
                if (j.contains("error") && j["error"].is_object()) {
                    const std::string code = j["error"].value("code", std::string());
                    if (code == "context_length_exceeded")
                        throw ContextOverflowError("provider reports the prompt exceeds its context window");
                    what += " " + j["error"].value("message", std::string());
                }
            } catch (const json::exception&) {
            }
            retry = retryable_status(res->status);
        }
        log.push_back("attempt " + std::to_string(attempt) + ": " + what);
        if (!retry) break;
        if (attempt < total_attempts) {
            const auto base = config_.backoff_base.count();
            const auto delay = base * (std::int64_t{1} << std::min(attempt - 1, 16)) +
                               (base > 0 ? static_cast<std::int64_t>(jitter_rng() % static_cast<std::uint64_t>(base)) : 0);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
    throw TransportError("chat request to " + config_.endpoint + " failed after " + std::to_string(log.size()) +
                             " attempt(s)",
                         log);
}

// ---------------------------------------------------------------------------
// Replay provider

ReplayProvider::ReplayProvider(const fs::path& fixture) {
    auto add = [&](SummaryRecord r, const std::string& where) {
        if (r.cache_key.empty()) throw FixtureError(where + ": empty cache_key");
        auto [it, inserted] = records_.emplace(r.cache_key, r);
        if (!inserted && it->second.summary_text != r.summary_text)
            throw FixtureError(where + ": conflicting entries for cache key " + r.cache_key);
    };

    std::error_code ec;
    if (fs::is_directory(fixture, ec)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(fixture))
            if (e.is_regular_file() && e.path().extension() == ".json" && !fsutil::is_temp_file(e.path()))
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files) {
            try {
                SummaryRecord r = summary_from_json(fsutil::read_json(f));
                if (r.cache_key != f.stem().string())
                    throw FixtureError("file name does not match cache_key " + r.cache_key);
                add(std::move(r), f.string());
            } catch (const json::exception& e) {
                throw FixtureError(f.string() + ": " + e.what());
            } catch (const FixtureError& e) {
                throw FixtureError(f.string() + ": " + e.what());
            }
        }
        return;
    }

    std::string text;
    try {
        text = fsutil::read_file(fixture);
    } catch (const IoError& e) {
        throw FixtureError(std::string("cannot read fixture: ") + e.what());
    }
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = fixture.string() + ":" + std::to_string(line_no);
        try {
            const json j = json::parse(line);
            if (!j.is_object()) throw FixtureError(where + ": record is not an object");
            if (!j.contains("cache_key") || !j["cache_key"].is_string())
                throw FixtureError(where + ": missing string field cache_key");
            if (!j.contains("summary_text") || !j["summary_text"].is_string())
                throw FixtureError(where + ": missing string field summary_text");
            add(summary_from_json(j), where);
        } catch (const json::exception& e) {
            throw FixtureError(where + ": " + e.what());
        }
    }
}

Completion ReplayProvider::complete(const json& /*payload*/, const std::string& key) {
    const auto it = records_.find(key);
    if (it == records_.end()) throw ReplayMissError(key);
    ++hits_;
    const SummaryRecord& r = it->second;
    Completion c;
    c.text = r.summary_text;
    c.token_usage = r.token_usage;
    c.transport_meta = r.transport_meta;
    c.created_at = r.created_at;
    if (r.status == SummaryStatus::Failed) {
        c.refused = true;
        c.refusal_reason = r.failure_reason.empty() ? "failed in fixture" : r.failure_reason;
    }
    return c;
}

// ---------------------------------------------------------------------------
// summarize / batch

SummaryRecord summarize(std::string_view code, std::string_view subject_ref, const ProviderConfig& config,
                        const SummaryStore& store, SummaryProvider& provider) {
    config.validate();
    const std::string prompt = build_prompt(code);
    const std::string key = cache_key(config.model_id, prompt, code);

    if (auto hit = store.get(key)) {
        hit->subject_ref = std::string(subject_ref);
        return *hit;
    }
    if (auto failed = store.get_failed(key)) {
        failed->subject_ref = std::string(subject_ref);
        return *failed;
    }
    if (config.max_prompt_bytes && prompt.size() > *config.max_prompt_bytes)
        throw ContextOverflowError("prompt for " + std::string(subject_ref) + " is " + std::to_string(prompt.size()) +
                                   " bytes, limit " + std::to_string(*config.max_prompt_bytes));

    SummaryRecord r;
    r.id = record_id(key);
    r.subject_ref = std::string(subject_ref);
    r.model_id = config.model_id;
    r.prompt_text = prompt;
    r.cache_key = key;
    r.request_payload = chat_payload(config.model_id, prompt, config.temperature);

    Completion c = provider.complete(r.request_payload, key);
    r.summary_text = std::move(c.text);
    r.token_usage = c.token_usage;
    r.transport_meta = c.transport_meta;
    r.created_at = c.created_at && !c.created_at->empty() ? *c.created_at : now_iso8601();
    if (c.refused) {
        r.status = SummaryStatus::Failed;
        r.failure_reason = c.refusal_reason;
    }
    store.put(r);
    return r;
}

json BatchManifest::to_json() const {
    json recs = json::array(), fails = json::array();
    for (const SummaryRecord& r : records)
        recs.push_back({{"subject_ref", r.subject_ref}, {"cache_key", r.cache_key}, {"id", r.id}});
    for (const SubjectFailure& f : failures)
        fails.push_back({{"subject_ref", f.subject_ref}, {"code", f.code}, {"message", f.message}});
    return json{{"records", recs}, {"failures", fails}};
}

BatchManifest batch_summarize(const std::vector<Subject>& subjects, const ProviderConfig& config,
                              const SummaryStore& store, SummaryProvider& provider, std::size_t parallelism) {
    if (parallelism == 0) throw ConfigError("parallelism must be at least 1");
    std::vector<std::optional<SummaryRecord>> results(subjects.size());
    std::vector<std::optional<SubjectFailure>> failures(subjects.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < subjects.size(); i = next++) {
            const Subject& s = subjects[i];
            try {
                SummaryRecord r = summarize(s.code, s.ref, config, store, provider);
                if (r.status == SummaryStatus::Failed)
                    failures[i] = SubjectFailure{s.ref, "provider_refusal", r.failure_reason};
                else
                    results[i] = std::move(r);
            } catch (const Error& e) {
                failures[i] = SubjectFailure{s.ref, e.code(), e.what()};
            } catch (const std::exception& e) {
                failures[i] = SubjectFailure{s.ref, "internal_error", e.what()};
            }
        }
    };

    const std::size_t n_threads = std::min(parallelism, subjects.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    if (n_threads > 0) worker();
    for (std::thread& t : pool) t.join();

    BatchManifest m;
    for (auto& r : results)
        if (r) m.records.push_back(std::move(*r));
    for (auto& f : failures)
        if (f) m.failures.push_back(std::move(*f));
    std::sort(m.records.begin(), m.records.end(),
              [](const SummaryRecord& a, const SummaryRecord& b) { return a.subject_ref < b.subject_ref; });
    std::sort(m.failures.begin(), m.failures.end(),
              [](const SubjectFailure& a, const SubjectFailure& b) { return a.subject_ref < b.subject_ref; });
    return m;
}

}  // namespace mutsum
