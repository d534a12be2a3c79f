#include "mutsum/verdict.hpp"

#include "mutsum/error.hpp"

namespace mutsum {

using nlohmann::json;

std::string_view to_string(Label l) noexcept { return l == Label::Positive ? "positive" : "negative"; }

std::string_view to_string(FailureMode f) noexcept {
    return f == FailureMode::TooAbstract ? "too-abstract" : "describes-original";
}

Label parse_label(std::string_view s) {
    if (s == "positive" || s == "P" || s == "p") return Label::Positive;
    if (s == "negative" || s == "N" || s == "n") return Label::Negative;
    throw ReviewError("unknown label: " + std::string(s));
}

FailureMode parse_failure_mode(std::string_view s) {
    if (s == "too-abstract") return FailureMode::TooAbstract;
    if (s == "describes-original") return FailureMode::DescribesOriginal;
    throw ReviewError("unknown failure mode: " + std::string(s));
}

bool Verdict::same_judgment(const Verdict& o) const {
    return mutant_id == o.mutant_id && rater_id == o.rater_id && label == o.label &&
           failure_mode == o.failure_mode && recognized_as_bug == o.recognized_as_bug && note == o.note;
}

void validate(const Verdict& v) {
    if (v.mutant_id.empty()) throw ReviewError("verdict without mutant_id");
    if (v.rater_id.empty()) throw ReviewError("verdict without rater_id");
    if (v.rater_id.find_first_of("/\\") != std::string::npos || v.rater_id == "." || v.rater_id == "..")
        throw ReviewError("rater id must be a plain name: " + v.rater_id);
    if (v.failure_mode && v.label != Label::Negative)
        throw ReviewError("failure_mode is only allowed on a negative verdict");
    if (v.recognized_as_bug && v.label != Label::Positive)
        throw ReviewError("recognized_as_bug is only allowed on a positive verdict");
}

json to_json(const Verdict& v) {
    return json{{"mutant_id", v.mutant_id},
                {"rater_id", v.rater_id},
                {"label", to_string(v.label)},
                {"failure_mode", v.failure_mode ? json(to_string(*v.failure_mode)) : json(nullptr)},
                {"recognized_as_bug", v.recognized_as_bug},
                {"note", v.note},
                {"decided_at", v.decided_at},
                {"audit", v.audit}};
}

Verdict verdict_from_json(const json& j) {
    try {
        Verdict v;
        v.mutant_id = j.at("mutant_id").get<std::string>();
        v.rater_id = j.at("rater_id").get<std::string>();
        v.label = parse_label(j.at("label").get<std::string>());
        if (j.contains("failure_mode") && !j["failure_mode"].is_null())
            v.failure_mode = parse_failure_mode(j["failure_mode"].get<std::string>());
        v.recognized_as_bug = j.value("recognized_as_bug", false);
        v.note = j.value("note", std::string());
        v.decided_at = j.value("decided_at", std::string());
        v.audit = j.value("audit", std::vector<std::string>{});
        return v;
    } catch (const json::exception& e) {
        throw ReviewError(std::string("malformed verdict: ") + e.what());
    }
}

std::string_view to_string(ReconcileMethod m) noexcept {
    switch (m) {
        case ReconcileMethod::SingleRater: return "single-rater";
        case ReconcileMethod::Unanimous: return "unanimous";
        case ReconcileMethod::Resolved: return "resolved";
        case ReconcileMethod::Forced: return "forced";
    }
    return "forced";
}

namespace {

ReconcileMethod parse_method(std::string_view s) {
    for (auto m : {ReconcileMethod::SingleRater, ReconcileMethod::Unanimous, ReconcileMethod::Resolved,
                   ReconcileMethod::Forced})
        if (s == to_string(m)) return m;
    throw ReviewError("unknown reconcile method: " + std::string(s));
}

}  // namespace

json to_json(const ReconciledVerdict& r) {
    return json{{"mutant_id", r.mutant_id},
                {"label", to_string(r.label)},
                {"failure_mode", r.failure_mode ? json(to_string(*r.failure_mode)) : json(nullptr)},
                {"recognized_as_bug", r.recognized_as_bug},
                {"method", to_string(r.method)},
                {"resolver_id", r.resolver_id},
                {"note", r.note},
                {"raters", r.raters},
                {"audit", r.audit}};
}

ReconciledVerdict reconciled_from_json(const json& j) {
    try {
        ReconciledVerdict r;
        r.mutant_id = j.at("mutant_id").get<std::string>();
        r.label = parse_label(j.at("label").get<std::string>());
        if (j.contains("failure_mode") && !j["failure_mode"].is_null())
            r.failure_mode = parse_failure_mode(j["failure_mode"].get<std::string>());
        r.recognized_as_bug = j.value("recognized_as_bug", false);
        r.method = parse_method(j.value("method", std::string("single-rater")));
        r.resolver_id = j.value("resolver_id", std::string());
        r.note = j.value("note", std::string());
        r.raters = j.value("raters", std::vector<std::string>{});
        r.audit = j.value("audit", std::vector<std::string>{});
        return r;
    } catch (const json::exception& e) {
        throw ReviewError(std::string("malformed reconciled verdict: ") + e.what());
    }
}

}  // namespace mutsum
