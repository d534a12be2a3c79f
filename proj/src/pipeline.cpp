#include "mutsum/pipeline.hpp"

#include <algorithm>
#include <set>

#include "mutsum/error.hpp"

namespace mutsum {

namespace {

bool at_least(Phase p, Phase q) { return static_cast<int>(p) >= static_cast<int>(q); }

}  // namespace

MutateOutcome run_mutate(CampaignStore& store, const std::string& quota_spec, std::uint64_t seed,
                         const std::optional<RunnerConfig>& runner) {
    const Quota quota = parse_quota(quota_spec);
    CampaignConfig config = store.config();
    if (at_least(store.phase(), Phase::Mutated)) {
        if (config.quota_spec != quota_spec || config.seed != seed)
            throw PhaseError("campaign was mutated with quota " + config.quota_spec.value_or("?") + " and seed " +
                             (config.seed ? std::to_string(*config.seed) : std::string("?")));
    } else if (config.quota_spec != quota_spec || config.seed != seed) {
        config.quota_spec = quota_spec;
        config.seed = seed;
        store.set_config(config);
    }

    std::vector<Mutant> existing;
    if (store.has_mutant_manifest()) existing = store.mutants();

    MutateOutcome out;
    std::vector<Mutant> all;
    for (const Program& p : store.programs()) {
        MutationPlan plan = generate_plan(p, quota, seed, config.engine);
        for (Mutant& m : plan.mutants) {
            // Smoke results are kept from an earlier run so re-runs stay byte-identical.
            const auto prior = std::find_if(existing.begin(), existing.end(), [&](const Mutant& e) { return e.id == m.id; });
            if (prior != existing.end() && prior->mutated_source == m.mutated_source) {
                m.smoke = prior->smoke;
                m.suspected_equivalent = prior->suspected_equivalent;
            } else if (runner) {
                smoke_check(p, m, runner);
            }
            all.push_back(std::move(m));
        }
        for (const Shortfall& s : plan.shortfalls) out.shortfalls.push_back({p.id, s});
    }
    out.mutants = all.size();
    out.new_artifacts = store.put_mutants(all, out.shortfalls);
    store.advance(Phase::Mutated);
    return out;
}

SummarizeOutcome run_summarize(CampaignStore& store, const ProviderConfig& config, SummaryProvider& provider,
                               std::size_t parallelism) {
    if (!at_least(store.phase(), Phase::Mutated))
        throw PhaseError("summarize needs a mutated campaign (phase is " + std::string(to_string(store.phase())) + ")");
    config.validate();
    CampaignConfig cc = store.config();
    if (at_least(store.phase(), Phase::Summarized) && cc.provider && cc.provider->model_id != config.model_id)
        throw PhaseError("campaign was summarized with model " + cc.provider->model_id);
    if (!cc.provider || to_json(*cc.provider) != to_json(config)) {
        cc.provider = config;
        store.set_config(cc);
    }

    std::vector<Subject> subjects;
    for (const Program& p : store.programs()) subjects.push_back({p.id, p.source_text});
    for (const Mutant& m : store.mutants()) subjects.push_back({m.id, m.mutated_source});

    const SummaryStore cache = store.summaries();
    const auto before = cache.keys();
    SummarizeOutcome out;
    out.batch = batch_summarize(subjects, config, cache, provider, parallelism);
    const auto after = cache.keys();
    out.new_artifacts = after.size() - before.size();

    auto index = store.summary_index();
    for (const SummaryRecord& r : out.batch.records)
        if (r.status == SummaryStatus::Ok) index[r.subject_ref] = r.cache_key;
    out.new_artifacts += store.put_summary_index(index);
    if (out.batch.failures.empty()) store.advance(Phase::Summarized);
    return out;
}

}  // namespace mutsum
