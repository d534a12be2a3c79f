#include "mutsum/review.hpp"

#include <algorithm>
#include <ctime>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "mutsum/digest.hpp"
#include "mutsum/error.hpp"

namespace mutsum {

using nlohmann::json;

namespace {

bool at_least(Phase p, Phase q) { return static_cast<int>(p) >= static_cast<int>(q); }

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return x % n;
}

void require_reviewable(const CampaignStore& store) {
    if (!at_least(store.phase(), Phase::Summarized))
        throw PhaseError("review needs a summarized campaign (phase is " + std::string(to_string(store.phase())) + ")");
}

std::string describe(Label label, const std::optional<FailureMode>& fm, bool bug) {
    std::string s(to_string(label));
    if (fm) s += " (" + std::string(to_string(*fm)) + ")";
    if (bug) s += " (bug)";
    return s;
}

/// Latest verdict per rater for one mutant, in rater order.
std::vector<Verdict> verdicts_for(const CampaignStore& store, const std::string& mutant_id) {
    std::vector<Verdict> out;
    for (const std::string& r : store.raters())
        if (auto v = store.verdict(r, mutant_id)) out.push_back(std::move(*v));
    return out;
}

bool labels_differ(const std::vector<Verdict>& vs) {
    for (const Verdict& v : vs)
        if (v.label != vs.front().label) return true;
    return false;
}

bool all_reconciled(const CampaignStore& store) {
    for (const Mutant& m : store.mutants())
        if (!store.reconciled(m.id)) return false;
    return true;
}

void maybe_advance_reconciled(CampaignStore& store) {
    if (at_least(store.phase(), Phase::UnderReview) && !at_least(store.phase(), Phase::Reconciled) &&
        all_reconciled(store))
        store.advance(Phase::Reconciled);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

json to_json(const ReviewItem& item) {
    json j{{"mutant_id", item.mutant_id},
           {"original_code", item.original_code},
           {"mutated_code", item.mutated_code},
           {"original_summary", item.original_summary},
           {"mutated_summary", item.mutated_summary},
           {"summary_diff", diff::to_json(item.summary_diff)},
           {"blind", item.blind},
           {"position", item.position},
           {"total", item.total},
           {"order_seed", std::to_string(item.order_seed)}};
    if (item.code_diff) j["code_diff"] = *item.code_diff;
    return j;
}

std::uint64_t order_seed(const CampaignStore& store, const std::string& rater) {
    return digest::fnv1a64("review|" + store.id() + "|" + rater);
}

std::vector<std::string> review_order(const CampaignStore& store, const std::string& rater) {
    std::vector<std::string> ids;
    for (const Mutant& m : store.mutants()) ids.push_back(m.id);
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(order_seed(store, rater));
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[bounded(rng, i)]);
    return ids;
}

ReviewItem review_item(const CampaignStore& store, const std::string& mutant_id, bool blind) {
    require_reviewable(store);
    const auto mutant = store.mutant(mutant_id);
    if (!mutant) throw ReviewError("unknown mutant: " + mutant_id);
    const auto program = store.program(mutant->program_id);
    if (!program) throw IntegrityError("mutant " + mutant_id + " has no program", {mutant->program_id});
    const auto original = store.summary_for(program->id);
    const auto mutated = store.summary_for(mutant_id);
    std::vector<std::string> gaps;
    if (!original) gaps.push_back("summary missing for " + program->id);
    if (!mutated) gaps.push_back("summary missing for " + mutant_id);
    if (!gaps.empty()) throw IntegrityError("item " + mutant_id + " is not servable", gaps);

    ReviewItem item;
    item.mutant_id = mutant_id;
    item.original_code = program->source_text;
    item.mutated_code = mutant->mutated_source;
    if (!blind)
        item.code_diff = diff::unified(item.original_code, item.mutated_code, "original/" + program->id + ".py",
                                       "mutated/" + mutant_id + ".py");
    item.original_summary = original->summary_text;
    item.mutated_summary = mutated->summary_text;
    item.summary_diff = diff::words(item.original_summary, item.mutated_summary);
    item.blind = blind;
    return item;
}

std::optional<ReviewItem> next_pending(const CampaignStore& store, const std::string& rater, bool blind) {
    require_reviewable(store);
    if (rater.empty()) throw ReviewError("rater id is required");
    std::set<std::string> judged;
    for (const Verdict& v : store.verdicts(rater)) judged.insert(v.mutant_id);
    const auto order = review_order(store, rater);
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (judged.count(order[i])) continue;
        ReviewItem item = review_item(store, order[i], blind);
        item.position = i + 1;
        item.total = order.size();
        item.order_seed = order_seed(store, rater);
        return item;
    }
    return std::nullopt;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Verdict submit_verdict(CampaignStore& store, Verdict v, const Clock& clock) {
    require_reviewable(store);
    validate(v);
    review_item(store, v.mutant_id, true);  // mutant and both summaries must exist

    const auto existing = store.verdict(v.rater_id, v.mutant_id);
    if (existing && existing->same_judgment(v)) return *existing;
    if (at_least(store.phase(), Phase::Reported)) throw PhaseError("campaign is already reported");
    v.audit = existing ? existing->audit : std::vector<std::string>{};
    if (existing)
        v.audit.push_back("replaced " + describe(existing->label, existing->failure_mode, existing->recognized_as_bug) +
                          " decided at " + existing->decided_at);
    v.decided_at = clock();
    store.put_verdict(v);
    if (!at_least(store.phase(), Phase::UnderReview)) store.advance(Phase::UnderReview);
    return v;
}

json AgreementResult::to_json() const {
    return json{{"rater_a", rater_a},
                {"rater_b", rater_b},
                {"n_items", n_items},
                {"percent_agreement", percent_agreement},
                {"kappa", kappa},
                {"confusion", {{confusion[0][0], confusion[0][1]}, {confusion[1][0], confusion[1][1]}}}};
}

AgreementResult agreement_from_labels(const std::vector<Label>& a, const std::vector<Label>& b) {
    if (a.size() != b.size()) throw ReviewError("label vectors differ in length");
    if (a.empty()) throw ReviewError("raters share no judged items");
    AgreementResult r;
    for (std::size_t i = 0; i < a.size(); ++i)
        ++r.confusion[a[i] == Label::Positive ? 0 : 1][b[i] == Label::Positive ? 0 : 1];
    r.n_items = static_cast<std::int64_t>(a.size());
    r.percent_agreement = stats::percent_agreement(r.confusion);
    r.kappa = stats::cohens_kappa(r.confusion);
    return r;
}

AgreementResult agreement(const CampaignStore& store, const std::string& rater_a, const std::string& rater_b) {
    if (rater_a.empty() || rater_b.empty() || rater_a == rater_b)
        throw ReviewError("agreement needs two distinct raters");
    std::map<std::string, Label> b_labels;
    for (const Verdict& v : store.verdicts(rater_b)) b_labels[v.mutant_id] = v.label;
    std::vector<Label> a, b;
    for (const Verdict& v : store.verdicts(rater_a)) {
        const auto it = b_labels.find(v.mutant_id);
        if (it == b_labels.end()) continue;
        a.push_back(v.label);
        b.push_back(it->second);
    }
    if (a.empty()) throw ReviewError("raters " + rater_a + " and " + rater_b + " share no judged items");
    AgreementResult r = agreement_from_labels(a, b);
    r.rater_a = rater_a;
    r.rater_b = rater_b;
    return r;
}

ReconciledVerdict reconcile(CampaignStore& store, const ReconcileRequest& req) {
    if (!at_least(store.phase(), Phase::UnderReview)) throw PhaseError("nothing to reconcile before review");
    if (req.resolver_id.empty()) throw ReviewError("reconcile needs a resolver id");
    Verdict probe{req.mutant_id, req.resolver_id, req.label, req.failure_mode, req.recognized_as_bug, "", "", {}};
    validate(probe);
    if (!store.mutant(req.mutant_id)) throw ReviewError("unknown mutant: " + req.mutant_id);

    const auto verdicts = verdicts_for(store, req.mutant_id);
    if (verdicts.empty()) throw ReviewError("no verdicts recorded for " + req.mutant_id);
    const bool single = store.raters().size() == 1;

    ReconciledVerdict r;
    r.mutant_id = req.mutant_id;
    r.label = req.label;
    r.failure_mode = req.failure_mode;
    r.recognized_as_bug = req.recognized_as_bug;
    r.resolver_id = req.resolver_id;
    r.note = req.note;
    for (const Verdict& v : verdicts) r.raters.push_back(v.rater_id);
    if (labels_differ(verdicts) || single) {
        r.method = ReconcileMethod::Resolved;
    } else {
        if (!req.force)
            throw ReviewError("raters agree on " + req.mutant_id + " (" + std::string(to_string(verdicts[0].label)) +
                              "); pass force to override");
        r.method = ReconcileMethod::Forced;
        r.audit.push_back("forced by " + req.resolver_id + " over unanimous " +
                          std::string(to_string(verdicts[0].label)));
    }
    const auto prior = store.reconciled(req.mutant_id);
    if (prior && prior->label == r.label && prior->failure_mode == r.failure_mode &&
        prior->recognized_as_bug == r.recognized_as_bug && prior->method == r.method &&
        prior->resolver_id == r.resolver_id && prior->note == r.note)
        return *prior;
    if (at_least(store.phase(), Phase::Reported)) throw PhaseError("campaign is already reported");
    if (prior) {
        std::vector<std::string> audit = prior->audit;
        audit.push_back("replaced " + std::string(to_string(prior->method)) + " " +
                        describe(prior->label, prior->failure_mode, prior->recognized_as_bug));
        audit.insert(audit.end(), r.audit.begin(), r.audit.end());
        r.audit = std::move(audit);
    }
    store.put_reconciled(r);
    maybe_advance_reconciled(store);
    return r;
}

AutoReconcileResult auto_reconcile(CampaignStore& store) {
    if (!at_least(store.phase(), Phase::UnderReview)) throw PhaseError("nothing to reconcile before review");
    AutoReconcileResult out;
    const bool reported = at_least(store.phase(), Phase::Reported);
    const auto raters = store.raters();
    for (const Mutant& m : store.mutants()) {
        const auto prior = store.reconciled(m.id);
        const bool explicit_prior =
            prior && (prior->method == ReconcileMethod::Resolved || prior->method == ReconcileMethod::Forced);
        const auto verdicts = verdicts_for(store, m.id);
        if (verdicts.size() < raters.size() || verdicts.empty()) {
            if (!explicit_prior) out.incomplete.push_back(m.id);
            continue;
        }
        if (labels_differ(verdicts)) {
            if (explicit_prior) continue;
            out.disagreements.push_back(m.id);
            if (prior && reported) throw PhaseError("campaign is already reported; " + m.id + " is disputed again");
            if (prior) store.remove_reconciled(m.id);
            continue;
        }
        if (explicit_prior) continue;
        const Verdict& first = verdicts.front();
        ReconciledVerdict r;
        r.mutant_id = m.id;
        r.label = first.label;
        r.failure_mode = first.failure_mode;
        r.recognized_as_bug = first.recognized_as_bug;
        r.method = raters.size() == 1 ? ReconcileMethod::SingleRater : ReconcileMethod::Unanimous;
        r.note = raters.size() == 1 ? first.note : "";
        for (const Verdict& v : verdicts) r.raters.push_back(v.rater_id);
        if (prior) r.audit = prior->audit;
        if (reported && (!prior || to_json(*prior) != to_json(r)))
            throw PhaseError("campaign is already reported; " + m.id + " would change");
        out.written += store.put_reconciled(r);
    }
    maybe_advance_reconciled(store);
    return out;
}

json Progress::to_json() const {
    json rs = json::array();
    for (const RaterProgress& r : raters) rs.push_back({{"rater", r.rater}, {"judged", r.judged}, {"total", mutants}});
    return json{{"mutants", mutants},
                {"raters", std::move(rs)},
                {"reconciled", reconciled},
                {"disagreements", disagreements},
                {"phase", to_string(phase)}};
}

Progress progress(const CampaignStore& store) {
    Progress p;
    p.phase = store.phase();
    const auto mutants = store.mutants();
    p.mutants = mutants.size();
    std::map<std::string, std::vector<Label>> by_mutant;
    for (const std::string& r : store.raters()) {
        const auto vs = store.verdicts(r);
        p.raters.push_back({r, vs.size()});
        for (const Verdict& v : vs) by_mutant[v.mutant_id].push_back(v.label);
    }
    for (const auto& [id, labels] : by_mutant)
        if (std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) != labels.end())
            p.disagreements.push_back(id);
    for (const Mutant& m : mutants) p.reconciled += store.reconciled(m.id).has_value();
    return p;
}

// ---------------------------------------------------------------------------
// Terminal

namespace {

std::vector<std::string> wrap(const std::string& text, std::size_t width) {
    std::vector<std::string> lines;
    std::istringstream words(text);
    std::string word, line;
    while (words >> word) {
        if (!line.empty() && line.size() + 1 + word.size() > width) {
            lines.push_back(line);
            line.clear();
        }
        line += (line.empty() ? "" : " ") + word;
    }
    if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace

std::string render_item(const ReviewItem& item, std::size_t width) {
    std::ostringstream out;
    const std::string rule(width, '=');
    out << rule << "\n[" << item.position << "/" << item.total << "] " << item.mutant_id << "\n" << rule << "\n";
    if (item.code_diff) out << *item.code_diff << "\n";
    const std::size_t col = width > 7 ? (width - 3) / 2 : 2;
    auto left = wrap(item.original_summary, col), right = wrap(item.mutated_summary, col);
    std::string lh = "ORIGINAL SUMMARY", rh = "MUTATED SUMMARY";
    lh.resize(col, ' ');
    out << lh << " | " << rh << "\n" << std::string(col, '-') << "-+-" << std::string(col, '-') << "\n";
    for (std::size_t i = 0; i < std::max(left.size(), right.size()); ++i) {
        std::string l = i < left.size() ? left[i] : "";
        l.resize(col, ' ');
        out << l << " | " << (i < right.size() ? right[i] : "") << "\n";
    }
    out << "\nsummary diff: ";
    for (const diff::Chunk& c : item.summary_diff) {
        if (c.op == diff::Op::Equal) out << c.text;
        else if (c.op == diff::Op::Delete) out << "[-" << c.text << "-]";
        else out << "{+" << c.text << "+}";
    }
    out << "\n";
    return out.str();
}

Verdict parse_script_line(const std::string& raw, const std::string& rater) {
    std::string line = raw, note;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
        note = trim(line.substr(hash + 1));
        line = line.substr(0, hash);
    }
    std::istringstream in(line);
    std::vector<std::string> tokens;
    for (std::string t; in >> t;) tokens.push_back(t);
    if (tokens.size() < 2) throw ReviewError("expected '<mutant_id> <P|N> [tags]': " + trim(raw));
    Verdict v;
    v.mutant_id = tokens[0];
    v.rater_id = rater;
    v.label = parse_label(tokens[1]);
    v.note = note;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        if (tokens[i] == "bug") {
            v.recognized_as_bug = true;
        } else {
            if (v.failure_mode) throw ReviewError("more than one failure mode: " + trim(raw));
            v.failure_mode = parse_failure_mode(tokens[i]);
        }
    }
    validate(v);
    return v;
}

TerminalResult terminal_review(CampaignStore& store, const std::string& rater, bool blind, std::istream& in,
                               std::ostream& out, bool scripted, const Clock& clock) {
    require_reviewable(store);
    TerminalResult result;
    auto apply = [&](const Verdict& v) {
        const auto before = store.verdict(rater, v.mutant_id);
        submit_verdict(store, v, clock);
        if (before && before->same_judgment(v)) ++result.unchanged;
        else ++result.submitted;
    };

    if (scripted) {
        std::string line;
        for (std::size_t n = 1; std::getline(in, line); ++n) {
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            try {
                apply(parse_script_line(t, rater));
            } catch (const ReviewError& e) {
                throw ReviewError("script line " + std::to_string(n) + ": " + e.what());
            }
        }
        return result;
    }

    while (auto item = next_pending(store, rater, blind)) {
        out << render_item(*item);
        out << "verdict: P|N [too-abstract|describes-original] [bug] [# note], q quits> " << std::flush;
        std::string line;
        if (!std::getline(in, line) || trim(line) == "q") return result;
        try {
            apply(parse_script_line(item->mutant_id + " " + line, rater));
        } catch (const ReviewError& e) {
            out << "rejected: " << e.what() << "\n";
        }
    }
    out << "all " << review_order(store, rater).size() << " items judged by " << rater << "\n";
    return result;
}

}  // namespace mutsum
