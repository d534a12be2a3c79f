#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mutsum/corpus.hpp"
#include "mutsum/mutation.hpp"
#include "mutsum/summary_client.hpp"
#include "mutsum/verdict.hpp"

namespace mutsum {

enum class Phase { Ingested, Mutated, Summarized, UnderReview, Reconciled, Reported };

std::string_view to_string(Phase p) noexcept;  ///< "ingested", "mutated", ...
Phase parse_phase(std::string_view s);

struct CampaignConfig {
    std::string id;
    std::optional<std::string> quota_spec;  ///< exactly as the user gave it
    std::optional<std::uint64_t> seed;
    std::optional<ProviderConfig> provider;
    EngineOptions engine;

    bool operator==(const CampaignConfig& o) const;
};

nlohmann::json to_json(const CampaignConfig& c);
CampaignConfig campaign_config_from_json(const nlohmann::json& j);

/// Snapshot of a campaign as seen on disk.
struct Campaign {
    std::string id;
    CampaignConfig config;
    Phase phase = Phase::Ingested;
    std::optional<std::size_t> planned_mutants;
    std::vector<std::string> program_ids;
    std::vector<std::string> mutant_ids;
    std::vector<std::string> summary_ids;  ///< cache keys referenced by the index
    std::vector<std::string> verdict_ids;  ///< "{rater}:{mutant}"

    bool operator==(const Campaign&) const = default;
};

struct ProgramShortfall {
    std::string program_id;
    Shortfall shortfall;
};

struct Finding {
    std::string kind;  ///< dangling_reference, cache_key_mismatch, corrupt_file, ...
    std::string ref;   ///< artifact the finding is about
    std::string detail;

    bool operator==(const Finding&) const = default;
};

struct IntegrityReport {
    std::vector<Finding> findings;
    std::size_t artifacts_checked = 0;

    bool ok() const noexcept { return findings.empty(); }
    nlohmann::json to_json() const;
};

/// Flat-file campaign directory:
///
///     campaign.json              id, config, phase, planned count
///     programs/{id}.py           programs.json
///     mutants/{program}/{name}.py  mutants.json
///     summaries/{cache_key}.json summaries.json (subject -> cache key)
///     verdicts/{rater}/{program}/{name}.json
///     reconciled/{program}/{name}.json
///     report/
///
/// Every file is written with write-then-rename, and artifacts are always
/// written before the manifest that references them. A writable handle holds
/// an exclusive advisory lock on `.lock` for its lifetime.
class CampaignStore {
public:
    enum class Access { Read, Write };

    /// Creates the campaign. Throws StoreError when `dir` already holds a
    /// campaign and `resume` is false; with `resume` the existing campaign is
    /// opened and must have the same id and programs.
    static CampaignStore init(const std::filesystem::path& dir, const CampaignConfig& config,
                              const std::vector<Program>& programs, bool resume = false);
    static CampaignStore open(const std::filesystem::path& dir, Access access = Access::Read);
    static bool exists(const std::filesystem::path& dir);

    CampaignStore(CampaignStore&&) noexcept;
    CampaignStore& operator=(CampaignStore&&) noexcept;
    ~CampaignStore();

    const std::filesystem::path& dir() const noexcept { return dir_; }
    const std::string& id() const noexcept { return config_.id; }
    const CampaignConfig& config() const noexcept { return config_; }
    Phase phase() const noexcept { return phase_; }
    std::optional<std::size_t> planned_mutants() const;
    Campaign campaign() const;

    /// Rewrites the config snapshot. Refused on a read-only handle.
    void set_config(const CampaignConfig& config);

    std::vector<Program> programs() const;
    std::optional<Program> program(std::string_view id) const;

    /// Manifest entries with mutated_source loaded from each mutant file.
    std::vector<Mutant> mutants() const;
    std::optional<Mutant> mutant(std::string_view id) const;
    std::vector<ProgramShortfall> shortfalls() const;
    bool has_mutant_manifest() const;
    /// Writes every mutant file, then the manifest. Returns the number of
    /// files created or changed (the manifest included).
    std::size_t put_mutants(const std::vector<Mutant>& mutants, const std::vector<ProgramShortfall>& shortfalls);

    SummaryStore summaries() const;
    std::map<std::string, std::string> summary_index() const;
    bool put_summary_index(const std::map<std::string, std::string>& index);
    /// The usable summary for a program or mutant id, if indexed and stored.
    std::optional<SummaryRecord> summary_for(std::string_view subject) const;

    std::vector<std::string> raters() const;
    std::vector<Verdict> verdicts(std::string_view rater) const;
    std::optional<Verdict> verdict(std::string_view rater, std::string_view mutant_id) const;
    bool put_verdict(const Verdict& v);

    std::vector<ReconciledVerdict> reconciled() const;
    std::optional<ReconciledVerdict> reconciled(std::string_view mutant_id) const;
    bool put_reconciled(const ReconciledVerdict& r);
    /// Withdraws an automatic reconciliation that no longer holds.
    bool remove_reconciled(std::string_view mutant_id);

    std::filesystem::path report_dir() const { return dir_ / "report"; }

    /// What is missing before the campaign may be at `target`.
    std::vector<std::string> gaps(Phase target) const;
    /// Moves forward to `target`. Returns false (a no-op) when the campaign is
    /// already at or past it. Throws IntegrityError listing gaps.
    bool advance(Phase target);

    IntegrityReport integrity_check() const;

private:
    struct Lock;

    CampaignStore(std::filesystem::path dir, std::unique_ptr<Lock> lock);
    void load_manifest();
    void write_manifest();
    void require_writable() const;
    nlohmann::json read_manifest_file(std::string_view name, const nlohmann::json& fallback) const;

    std::filesystem::path dir_;
    std::unique_ptr<Lock> lock_;
    CampaignConfig config_;
    Phase phase_ = Phase::Ingested;
    std::vector<std::string> program_ids_;
};

/// "{program}/{name}" split into its two parts; throws StoreError otherwise.
std::pair<std::string, std::string> split_mutant_id(std::string_view mutant_id);

}  // namespace mutsum
