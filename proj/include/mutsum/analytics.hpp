#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mutsum/campaign_store.hpp"
#include "mutsum/review.hpp"
#include "mutsum/stats.hpp"

namespace mutsum {

enum class Dimension { Complexity, MutationType, Location, Model };

std::string_view to_string(Dimension d) noexcept;  ///< "complexity", "mutation_type", "location", "model"

/// One reconciled judgment joined with its mutant's metadata. Fields a
/// verdict fixture may omit are optional.
struct VerdictRow {
    std::string mutant_id;
    std::string model;
    MutationType mutation_type = MutationType::Statement;
    std::optional<ComplexityCategory> complexity;
    std::optional<LocationBucket> bucket;
    std::optional<std::size_t> loc;
    Label label = Label::Negative;
    std::optional<FailureMode> failure_mode;
    bool recognized_as_bug = false;
};

struct RateGroup {
    std::string label;
    std::int64_t positives = 0;
    std::int64_t total = 0;

    std::int64_t negatives() const noexcept { return total - positives; }
    /// "49.3%", or "n/a" for an empty group.
    std::string formatted() const;
};

struct RateBreakdown {
    Dimension dimension = Dimension::Complexity;
    std::vector<RateGroup> groups;  ///< fixed order; empty groups kept
    RateGroup overall;

    /// Non-empty groups as a (Positive, Negative) table.
    stats::ContingencyTable table() const;
};

/// Groups in the order SF,SC,MC,MT / Statement,Decision,Value /
/// Beginning,Middle,End / first appearance of each model. Throws StatsError
/// when a row lacks the dimension's attribute.
RateBreakdown detection_rates(const std::vector<VerdictRow>& rows, Dimension dimension);

/// Rows for every mutant of the campaign. Throws StatsError listing
/// unreconciled mutants.
std::vector<VerdictRow> campaign_rows(const CampaignStore& store);

/// JSONL verdict fixture, one object per line with mutant_id, model,
/// mutation_type, label and optionally complexity, bucket, loc,
/// failure_mode, recognized_as_bug. Throws FixtureError with the line number.
std::vector<VerdictRow> load_verdict_fixture(const std::filesystem::path& file);

struct ReportInput {
    std::string title;
    std::vector<VerdictRow> rows;
    std::optional<AgreementResult> agreement;
};

struct ReportSummary {
    std::vector<std::filesystem::path> files;  ///< relative to the output directory
    std::size_t written = 0;                   ///< files created or changed
};

/// report.md, tables/*.csv and figures/*.json under `out_dir`. Content is a
/// pure function of the input (no timestamps), so re-emitting writes nothing.
ReportSummary emit_report(const ReportInput& input, const std::filesystem::path& out_dir);

/// Campaign form: needs phase Reconciled, writes under report/, adds the
/// agreement of the first two raters when there are several, and advances
/// to Reported.
ReportSummary emit_campaign_report(CampaignStore& store);

}  // namespace mutsum
