#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mutsum/corpus.hpp"

namespace mutsum {

enum class MutationType { Statement, Value, Decision };
enum class LocationBucket { Beginning, Middle, End };

inline constexpr MutationType kMutationTypes[] = {MutationType::Statement, MutationType::Value,
                                                  MutationType::Decision};
inline constexpr LocationBucket kBuckets[] = {LocationBucket::Beginning, LocationBucket::Middle,
                                              LocationBucket::End};

std::string_view to_string(MutationType t) noexcept;     ///< "statement" | "value" | "decision"
std::string_view short_code(MutationType t) noexcept;    ///< "stmt" | "val" | "desc"
std::string_view to_string(LocationBucket b) noexcept;   ///< "beginning" | "middle" | "end"
std::string_view short_code(LocationBucket b) noexcept;  ///< "b" | "m" | "e"
MutationType parse_mutation_type(std::string_view s);    ///< accepts long or short form
LocationBucket parse_bucket(std::string_view s);

namespace op {
inline constexpr std::string_view kFlipComparator = "flip-comparator";
inline constexpr std::string_view kSwapArithmetic = "swap-arithmetic";
inline constexpr std::string_view kSwapBoolean = "swap-boolean";
inline constexpr std::string_view kPerturbLiteral = "perturb-literal";
inline constexpr std::string_view kFlipIndex = "flip-index";
inline constexpr std::string_view kPerturbDefault = "perturb-default";
inline constexpr std::string_view kFlipBoolean = "flip-boolean";
inline constexpr std::string_view kPerturbString = "perturb-string";
inline constexpr std::string_view kDeleteStatement = "delete-statement";
inline constexpr std::string_view kDropReturnValue = "drop-return-value";
inline constexpr std::string_view kDuplicateStatement = "duplicate-statement";
inline constexpr std::string_view kSwapStatements = "swap-statements";
}  // namespace op

/// One place an operator can edit. Decision and value sites sit on a single
/// line; statement sites cover whole physical lines and may span several,
/// in which case `line`..`end_line` is the touched range and the column span
/// describes the first line only.
struct MutationSite {
    std::string operator_id;
    MutationType type = MutationType::Decision;
    std::size_t line = 0;  ///< 1-based
    std::size_t end_line = 0;
    std::size_t column_begin = 0;  ///< byte column on `line`
    std::size_t column_end = 0;
    std::size_t begin = 0;  ///< absolute byte offsets of the edited region
    std::size_t end = 0;
    std::string original_fragment;
    /// Fragments apply() accepts at this site; each one yields a parseable program.
    std::vector<std::string> replacements;

    bool operator==(const MutationSite&) const = default;
};

struct Mutant {
    std::string id;    ///< "{program}/{name}"
    std::string name;  ///< "{type}_{bucket}_{n}", e.g. "val_b_2"
    std::string program_id;
    MutationType mutation_type = MutationType::Decision;
    LocationBucket bucket = LocationBucket::Beginning;
    MutationSite site;
    std::string mutated_fragment;
    std::string mutated_source;
    bool suspected_equivalent = false;
    std::uint64_t seed = 0;
    std::optional<std::string> smoke;  ///< last smoke_check outcome, if run

    bool operator==(const Mutant&) const = default;
};

/// Manifest form (no mutated_source; that lives in the per-mutant file).
nlohmann::json to_json(const Mutant& m);
Mutant mutant_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MutationSite& s);
MutationSite site_from_json(const nlohmann::json& j);

struct EngineOptions {
    bool string_literals = false;  ///< enable the perturb-string operator
};

/// Every applicable site of `type`, in document order.
std::vector<MutationSite> enumerate_sites(const Program& program, MutationType type,
                                          const EngineOptions& options = {});

/// Thirds over the program's effective lines; throws MutationError when the
/// line lies outside the program.
LocationBucket bucket_of_line(std::size_t line, const Program& program);
LocationBucket bucket_of(const MutationSite& site, const Program& program);

/// Splices `fragment` over the site's region.
std::string splice(std::string_view source, const MutationSite& site, std::string_view fragment);

/// Throws MutationError when `fragment` is not one of the site's replacements
/// or the result fails to parse.
Mutant apply(const Program& program, const MutationSite& site, std::string_view fragment);

/// Findings for one mutant against its program; empty when all invariants hold.
std::vector<std::string> check_mutant(const Program& program, const Mutant& mutant);

using Quota = std::map<std::pair<MutationType, LocationBucket>, std::size_t>;
Quota uniform_quota(std::size_t per_cell);
std::size_t quota_total(const Quota& quota);
/// "3" (uniform) or "stmt_b=2,val_e=1,..." (unlisted cells get 0).
Quota parse_quota(std::string_view spec);
nlohmann::json to_json(const Quota& quota);
Quota quota_from_json(const nlohmann::json& j);

struct Shortfall {
    MutationType type;
    LocationBucket bucket;
    std::size_t requested = 0;
    std::size_t produced = 0;
};

struct MutationPlan {
    std::vector<Mutant> mutants;
    std::vector<Shortfall> shortfalls;
};

/// Deterministic in (source_text, program id, quota, seed, options). Draws use
/// std::mt19937_64 seeded with FNV-1a-64 of "seed|program|type|bucket" and a
/// rejection-sampled bounded draw, so plans match across platforms.
MutationPlan generate_plan(const Program& program, const Quota& quota, std::uint64_t seed,
                           const EngineOptions& options = {});

enum class SmokeOutcome { Diverged, NoDifferenceObserved, NotRun };
std::string_view to_string(SmokeOutcome o) noexcept;

struct RunnerConfig {
    /// argv template; "{file}" is replaced by the path of the program under test.
    std::vector<std::string> command;
    std::string input;  ///< driver input fed on stdin
    std::chrono::milliseconds timeout{5000};
};

struct SmokeReport {
    SmokeOutcome outcome = SmokeOutcome::NotRun;
    bool original_timed_out = false;
    bool mutant_timed_out = false;
    std::string detail;
};

/// Runs original and mutant under identical inputs. Sets
/// mutant.suspected_equivalent when no difference is observed.
SmokeReport smoke_check(const Program& program, Mutant& mutant,
                        const std::optional<RunnerConfig>& runner);

}  // namespace mutsum
