#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mutsum/campaign_store.hpp"

namespace mutsum {

struct MutateOutcome {
    std::size_t mutants = 0;
    std::size_t new_artifacts = 0;  ///< files created or changed by this run
    std::vector<ProgramShortfall> shortfalls;
};

/// Plans and writes every program's mutants, then advances to Mutated. On an
/// already mutated campaign the plan is regenerated and compared: the same
/// quota and seed write nothing, different ones raise PhaseError.
MutateOutcome run_mutate(CampaignStore& store, const std::string& quota_spec, std::uint64_t seed,
                         const std::optional<RunnerConfig>& runner = std::nullopt);

struct SummarizeOutcome {
    BatchManifest batch;
    std::size_t new_artifacts = 0;
};

/// Summarizes every program and mutant (cache first), updates the summary
/// index and advances to Summarized when nothing failed.
SummarizeOutcome run_summarize(CampaignStore& store, const ProviderConfig& config, SummaryProvider& provider,
                               std::size_t parallelism);

}  // namespace mutsum
