#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mutsum/campaign_store.hpp"
#include "mutsum/stats.hpp"
#include "mutsum/text_diff.hpp"
#include "mutsum/verdict.hpp"

namespace mutsum {

struct ReviewItem {
    std::string mutant_id;
    std::string original_code;
    std::string mutated_code;
    std::optional<std::string> code_diff;  ///< absent in blind mode
    std::string original_summary;
    std::string mutated_summary;
    std::vector<diff::Chunk> summary_diff;
    bool blind = false;
    std::size_t position = 0;  ///< 1-based place in this rater's order
    std::size_t total = 0;
    std::uint64_t order_seed = 0;
};

nlohmann::json to_json(const ReviewItem& item);

/// Seed of the rater's presentation order; derived from campaign and rater id
/// so it is reproducible and reported with every item.
std::uint64_t order_seed(const CampaignStore& store, const std::string& rater);
/// All mutant ids in the rater's shuffled order.
std::vector<std::string> review_order(const CampaignStore& store, const std::string& rater);

/// Throws PhaseError before Summarized, IntegrityError when a summary is missing.
ReviewItem review_item(const CampaignStore& store, const std::string& mutant_id, bool blind);
std::optional<ReviewItem> next_pending(const CampaignStore& store, const std::string& rater, bool blind);

using Clock = std::function<std::string()>;
std::string utc_now();

/// Validates, persists and returns the stored verdict. An identical
/// resubmission is a no-op; a changed one overwrites and appends an audit
/// line. The first verdict moves the campaign to UnderReview.
Verdict submit_verdict(CampaignStore& store, Verdict verdict, const Clock& clock = utc_now);

struct AgreementResult {
    std::string rater_a;
    std::string rater_b;
    std::int64_t n_items = 0;
    double percent_agreement = 0.0;
    double kappa = 0.0;
    stats::Confusion confusion{};  ///< [a][b], index 0 = Positive

    nlohmann::json to_json() const;
};

/// Over the mutants both raters judged. Throws ReviewError on an empty
/// intersection and StatsError on degenerate marginals.
AgreementResult agreement(const CampaignStore& store, const std::string& rater_a, const std::string& rater_b);
AgreementResult agreement_from_labels(const std::vector<Label>& a, const std::vector<Label>& b);

struct ReconcileRequest {
    std::string mutant_id;
    Label label = Label::Negative;
    std::optional<FailureMode> failure_mode;
    bool recognized_as_bug = false;
    std::string resolver_id;
    std::string note;
    bool force = false;
};

/// Explicit resolution. Allowed on a disagreement or in a single-rater
/// campaign; an agreement needs `force`. Throws ReviewError otherwise.
ReconciledVerdict reconcile(CampaignStore& store, const ReconcileRequest& request);

struct AutoReconcileResult {
    std::size_t written = 0;
    std::vector<std::string> disagreements;  ///< waiting for an explicit decision
    std::vector<std::string> incomplete;     ///< not judged by every rater yet
};

/// Single-rater verdicts and unanimous labels are reconciled automatically;
/// explicit decisions are never overwritten. Advances to Reconciled when
/// every mutant has a reconciled label.
AutoReconcileResult auto_reconcile(CampaignStore& store);

struct RaterProgress {
    std::string rater;
    std::size_t judged = 0;
};

struct Progress {
    std::size_t mutants = 0;
    std::vector<RaterProgress> raters;
    std::size_t reconciled = 0;
    std::vector<std::string> disagreements;
    Phase phase = Phase::Ingested;

    nlohmann::json to_json() const;
};

Progress progress(const CampaignStore& store);

/// Side-by-side plain-text rendering of an item for the terminal reviewer.
std::string render_item(const ReviewItem& item, std::size_t width = 100);

/// One scripted decision: "<mutant_id> <P|N> [too-abstract|describes-original] [bug] [# note]".
Verdict parse_script_line(const std::string& line, const std::string& rater);

struct TerminalResult {
    std::size_t submitted = 0;
    std::size_t unchanged = 0;
};

/// Terminal review. With `script` every non-blank, non-# line is applied in
/// order; otherwise items are shown on `out` and decisions read from `in`
/// until it ends or the rater types "q".
TerminalResult terminal_review(CampaignStore& store, const std::string& rater, bool blind, std::istream& in,
                               std::ostream& out, bool scripted, const Clock& clock = utc_now);

}  // namespace mutsum
