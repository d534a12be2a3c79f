#pragma once

#include <filesystem>
#include <string>

#include "mutsum/campaign_store.hpp"

namespace mutsum::testing {

inline constexpr const char* kFixtureTimestamp = "2024-06-01T00:00:00Z";

/// Replay JSONL for every program and mutant of `store`, texts taken from a
/// JSON object keyed by subject id. Lines are ordered by subject.
std::string replay_fixture_jsonl(const CampaignStore& store, const ProviderConfig& config,
                                 const std::filesystem::path& texts);

struct StageRun {
    std::vector<std::string> args;
    int status = 0;
    nlohmann::json result;  ///< parsed stdout, null when it was not one JSON line
    std::string err;
};

StageRun run_cli(const std::vector<std::string>& args, const std::string& input = "");

/// CLI argument lists for the offline demo pipeline on the committed inputs:
/// ingest, mutate, summarize (replay), review by alice and bob (scripted),
/// reconcile, reconcile with the explicit decisions, report.
std::vector<std::vector<std::string>> demo_stages(const std::filesystem::path& dir);

/// Runs the stages up to and including the one named `last`; throws with the
/// stage's stderr on a nonzero exit.
void demo_pipeline(const std::filesystem::path& dir, const std::string& last = "report");

/// Differences between a report directory and the committed goldens (missing,
/// extra or differing files). Empty means byte-identical.
std::vector<std::string> compare_with_goldens(const std::filesystem::path& report_dir);

}  // namespace mutsum::testing
