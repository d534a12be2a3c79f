#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mutsum {

/// The fixed instruction every prompt starts with.
inline constexpr std::string_view kInstruction = "Explain the following code snippet in plain English.";

/// Instruction line, blank line, then the code verbatim. No fences.
std::string build_prompt(std::string_view code);

/// SHA-256 over the length-prefixed triple (model, prompt, code).
std::string cache_key(std::string_view model_id, std::string_view prompt_text, std::string_view code);

struct ProviderConfig {
    std::string provider_name = "openai";
    std::string model_id = "gpt-4-1106-preview";
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    /// Name of the environment variable holding the API key. The key itself
    /// is never stored.
    std::string credential_env = "OPENAI_API_KEY";
    double temperature = 0.0;
    /// Only with this set may temperature differ from 0.
    bool experimental_temperature = false;
    std::chrono::milliseconds timeout{60000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    /// Prompts longer than this many bytes are refused before any request.
    std::optional<std::size_t> max_prompt_bytes;

    /// Throws ConfigError when temperature != 0 without the experiment flag.
    void validate() const;
};

nlohmann::json to_json(const ProviderConfig& c);
/// Missing keys keep their defaults; validates the result.
ProviderConfig provider_config_from_json(const nlohmann::json& j);

struct TokenUsage {
    std::int64_t prompt = 0;
    std::int64_t completion = 0;
    bool operator==(const TokenUsage&) const = default;
};

struct TransportMeta {
    int attempts = 0;
    std::int64_t latency_ms = 0;
    bool operator==(const TransportMeta&) const = default;
};

enum class SummaryStatus { Ok, Failed };

struct SummaryRecord {
    std::string id;           ///< "sum-" + first 16 hex digits of cache_key
    std::string subject_ref;  ///< program or mutant id; not persisted in the cache
    std::string model_id;
    std::string prompt_text;
    std::string summary_text;
    std::string cache_key;
    std::string created_at;  ///< ISO-8601 UTC
    std::optional<TokenUsage> token_usage;
    TransportMeta transport_meta;
    SummaryStatus status = SummaryStatus::Ok;
    std::string failure_reason;
    /// Exact request body sent (or that would have been sent).
    nlohmann::json request_payload;

    bool operator==(const SummaryRecord&) const = default;
};

/// Digest binding the stored summary text to its key; detects tampering.
std::string content_digest(const SummaryRecord& r);

/// Persisted form (no subject_ref) with content_digest attached.
nlohmann::json to_json(const SummaryRecord& r);
SummaryRecord summary_from_json(const nlohmann::json& j);

/// The single-user-message chat body for a prompt.
nlohmann::json chat_payload(std::string_view model_id, std::string_view prompt_text, double temperature);

/// One JSON file per record under `dir/{cache_key}.json`; failed records go to
/// `dir/failed/{cache_key}.json` so they are kept apart from usable ones.
/// Safe for concurrent use from several threads.
class SummaryStore {
public:
    explicit SummaryStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::filesystem::path path_for(std::string_view key) const;
    std::filesystem::path failed_path_for(std::string_view key) const;

    std::optional<SummaryRecord> get(std::string_view key) const;
    std::optional<SummaryRecord> get_failed(std::string_view key) const;
    /// Returns true when a file was written.
    bool put(const SummaryRecord& r) const;
    std::vector<std::string> keys() const;

private:
    std::filesystem::path dir_;
};

struct Completion {
    std::string text;
    std::optional<TokenUsage> token_usage;
    TransportMeta transport_meta;
    bool refused = false;  ///< provider declined or returned no text
    std::string refusal_reason;
    std::optional<std::string> created_at;  ///< replay carries the original timestamp
};

class SummaryProvider {
public:
    virtual ~SummaryProvider() = default;
    /// One fresh, history-free request. `key` identifies it for replay.
    virtual Completion complete(const nlohmann::json& payload, const std::string& key) = 0;
};

/// OpenAI-compatible chat-completion endpoint over HTTP(S). The credential is
/// read from the environment on first use.
class HttpChatProvider final : public SummaryProvider {
public:
    explicit HttpChatProvider(ProviderConfig config);
    Completion complete(const nlohmann::json& payload, const std::string& key) override;

    /// Number of HTTP requests issued, retries included.
    std::size_t requests_sent() const noexcept { return sent_.load(); }

private:
    std::string credential();

    ProviderConfig config_;
    std::mutex mu_;
    std::optional<std::string> credential_;
    std::atomic<std::size_t> sent_{0};
};

/// Resolves every request from a fixture: either a directory of cache records
/// (any SummaryStore directory) or a JSONL file with one record per line
/// (at least "cache_key" and "summary_text"). Never touches the network.
class ReplayProvider final : public SummaryProvider {
public:
    explicit ReplayProvider(const std::filesystem::path& fixture);
    Completion complete(const nlohmann::json& payload, const std::string& key) override;

    std::size_t size() const noexcept { return records_.size(); }
    std::size_t hits() const noexcept { return hits_.load(); }

private:
    std::map<std::string, SummaryRecord> records_;
    std::atomic<std::size_t> hits_{0};
};

/// Cache lookup, then exactly one logical request on a miss. Refusals are
/// persisted as failed records and returned without retrying on later calls.
/// Throws ContextOverflowError, TransportError, ReplayMissError.
SummaryRecord summarize(std::string_view code, std::string_view subject_ref, const ProviderConfig& config,
                        const SummaryStore& store, SummaryProvider& provider);

struct Subject {
    std::string ref;
    std::string code;
};

struct SubjectFailure {
    std::string subject_ref;
    std::string code;  ///< error code, e.g. replay_miss, provider_refusal
    std::string message;
};

struct BatchManifest {
    std::vector<SummaryRecord> records;     ///< sorted by subject_ref
    std::vector<SubjectFailure> failures;   ///< sorted by subject_ref
    nlohmann::json to_json() const;
};

/// Runs summarize over `subjects` with at most `parallelism` in flight. One
/// subject's failure never stops the others.
BatchManifest batch_summarize(const std::vector<Subject>& subjects, const ProviderConfig& config,
                              const SummaryStore& store, SummaryProvider& provider, std::size_t parallelism);

}  // namespace mutsum
