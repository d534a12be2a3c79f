#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mutsum {

enum class Label { Positive, Negative };
enum class FailureMode { TooAbstract, DescribesOriginal };

std::string_view to_string(Label l) noexcept;        ///< "positive" | "negative"
std::string_view to_string(FailureMode f) noexcept;  ///< "too-abstract" | "describes-original"
Label parse_label(std::string_view s);               ///< also accepts "P" / "N"
FailureMode parse_failure_mode(std::string_view s);

struct Verdict {
    std::string mutant_id;
    std::string rater_id;
    Label label = Label::Negative;
    std::optional<FailureMode> failure_mode;  ///< Negative only
    bool recognized_as_bug = false;           ///< Positive only
    std::string note;
    std::string decided_at;
    /// One line per earlier verdict this one replaced.
    std::vector<std::string> audit;

    bool operator==(const Verdict&) const = default;
    /// Same judgment, ignoring time, note history and audit trail.
    bool same_judgment(const Verdict& o) const;
};

/// Throws ReviewError when the tag invariants or the ids are violated.
void validate(const Verdict& v);

nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

enum class ReconcileMethod { SingleRater, Unanimous, Resolved, Forced };
std::string_view to_string(ReconcileMethod m) noexcept;

/// The label analytics reads for one mutant.
struct ReconciledVerdict {
    std::string mutant_id;
    Label label = Label::Negative;
    std::optional<FailureMode> failure_mode;
    bool recognized_as_bug = false;
    ReconcileMethod method = ReconcileMethod::SingleRater;
    std::string resolver_id;  ///< empty for automatic reconciliation
    std::string note;
    std::vector<std::string> raters;  ///< raters whose verdicts were considered
    std::vector<std::string> audit;

    bool operator==(const ReconciledVerdict&) const = default;
};

nlohmann::json to_json(const ReconciledVerdict& r);
ReconciledVerdict reconciled_from_json(const nlohmann::json& j);

}  // namespace mutsum
