#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "mutsum/campaign_store.hpp"
#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"
#include "mutsum/pipeline.hpp"
#include "support/campaign_fixture.hpp"

using namespace mutsum;
using namespace mutsum::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool has_finding(const IntegrityReport& r, const std::string& kind, const std::string& ref_part) {
    for (const Finding& f : r.findings)
        if (f.kind == kind && f.ref.find(ref_part) != std::string::npos) return true;
    return false;
}

std::string dump(const IntegrityReport& r) { return r.to_json().dump(); }

}  // namespace

TEST_CASE("init then open yields the same campaign") {
    TempDir dir("store");
    CampaignConfig config;
    config.id = "c1";
    config.quota_spec = "3";
    config.seed = 11;
    config.provider = stub_config();
    const Campaign created = CampaignStore::init(dir.path, config, demo_programs()).campaign();
    const CampaignStore loaded = CampaignStore::open(dir.path);
    CHECK(loaded.campaign() == created);
    CHECK(loaded.phase() == Phase::Ingested);
    CHECK(loaded.programs() == demo_programs());
    CHECK(created.planned_mutants == 27 * 3);
}

TEST_CASE("planned count for twelve programs at quota 3 is 324") {
    TempDir dir("store");
    std::vector<Program> programs;
    for (int i = 0; i < 12; ++i)
        programs.push_back(make_program("p" + std::to_string(10 + i), "def f():\n    return 1\n", Origin::Synthetic));
    CampaignConfig config;
    config.id = "rq1";
    config.quota_spec = "3";
    const CampaignStore store = CampaignStore::init(dir.path, config, programs);
    CHECK(store.planned_mutants() == 324);
    CHECK(fsutil::read_json(dir.path / "campaign.json")["planned_mutants"] == 324);
}

TEST_CASE("init refuses an existing campaign unless resuming") {
    TempDir dir("store");
    CampaignConfig config;
    config.id = "c";
    { CampaignStore::init(dir.path, config, demo_programs()); }
    CHECK_THROWS_AS(CampaignStore::init(dir.path, config, demo_programs()), StoreError);
    CHECK_NOTHROW(CampaignStore::init(dir.path, config, demo_programs(), true));
    CHECK_THROWS_AS(CampaignStore::init(dir.path, config, {demo_programs()[0]}, true), StoreError);
    CampaignConfig other = config;
    other.id = "d";
    CHECK_THROWS_AS(CampaignStore::init(dir.path, other, demo_programs(), true), StoreError);
}

TEST_CASE("init validates ids") {
    TempDir dir("store");
    CampaignConfig config;
    config.id = "bad id";
    CHECK_THROWS_AS(CampaignStore::init(dir.path / "a", config, demo_programs()), StoreError);
    config.id = "ok";
    const auto programs = demo_programs();
    CHECK_THROWS_AS(CampaignStore::init(dir.path / "b", config, {programs[0], programs[0]}), StoreError);
    CHECK_THROWS_AS(CampaignStore::open(dir.path / "none"), StoreError);
}

TEST_CASE("one writer at a time") {
    TempDir dir("store");
    CampaignConfig config;
    config.id = "c";
    CampaignStore writer = CampaignStore::init(dir.path, config, demo_programs());
    CHECK_THROWS_AS(CampaignStore::open(dir.path, CampaignStore::Access::Write), StoreError);
    CampaignStore reader = CampaignStore::open(dir.path);
    CHECK_THROWS_AS(reader.advance(Phase::Mutated), StoreError);
    { CampaignStore released = std::move(writer); }
    CHECK_NOTHROW(CampaignStore::open(dir.path, CampaignStore::Access::Write));
}

TEST_CASE("advance checks artifacts and is monotonic") {
    TempDir dir("store");
    CampaignStore store = demo_campaign(dir.path, Phase::Mutated);
    CHECK(store.phase() == Phase::Mutated);
    CHECK_FALSE(store.advance(Phase::Mutated));
    CHECK_FALSE(store.advance(Phase::Ingested));
    CHECK(store.phase() == Phase::Mutated);

    StubProvider provider;
    // Summarize everything except one mutant, then try to advance.
    const auto mutants = store.mutants();
    std::vector<Subject> subjects;
    for (const Program& p : store.programs()) subjects.push_back({p.id, p.source_text});
    for (std::size_t i = 1; i < mutants.size(); ++i) subjects.push_back({mutants[i].id, mutants[i].mutated_source});
    const auto batch = batch_summarize(subjects, stub_config(), store.summaries(), provider, 1);
    std::map<std::string, std::string> index;
    for (const auto& r : batch.records) index[r.subject_ref] = r.cache_key;
    store.put_summary_index(index);

    try {
        store.advance(Phase::Summarized);
        FAIL("advance should have failed");
    } catch (const IntegrityError& e) {
        REQUIRE(e.gaps().size() == 1);
        CHECK(e.gaps()[0] == "summary missing for " + mutants[0].id);
    }
    CHECK(store.phase() == Phase::Mutated);
    CHECK(store.integrity_check().ok());

    run_summarize(store, stub_config(), provider, 2);
    CHECK(store.phase() == Phase::Summarized);
    CHECK_FALSE(store.advance(Phase::Summarized));
    const auto gaps = store.gaps(Phase::Reconciled);
    CHECK(gaps.size() == mutants.size());
}

TEST_CASE("mutate twice writes nothing the second time") {
    TempDir dir("store");
    CampaignStore store = demo_campaign(dir.path, Phase::Ingested);
    const MutateOutcome first = run_mutate(store, "1", 7);
    CHECK(first.mutants == 27);
    CHECK(first.new_artifacts == 28);
    const auto before = snapshot(dir.path);
    const MutateOutcome second = run_mutate(store, "1", 7);
    CHECK(second.new_artifacts == 0);
    CHECK(snapshot(dir.path) == before);
    CHECK_THROWS_AS(run_mutate(store, "2", 7), PhaseError);
    CHECK_THROWS_AS(run_mutate(store, "1", 8), PhaseError);
    const json manifest = fsutil::read_json(dir.path / "campaign.json");
    CHECK(manifest["config"]["quota_spec"] == "1");
    CHECK(manifest["config"]["seed"] == 7);
}

TEST_CASE("summarize twice writes nothing the second time") {
    TempDir dir("store");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    CHECK(store.phase() == Phase::Summarized);
    CHECK(store.summary_index().size() == 30);
    const auto before = snapshot(dir.path);
    StubProvider provider;
    const SummarizeOutcome again = run_summarize(store, stub_config(), provider, 3);
    CHECK(again.new_artifacts == 0);
    CHECK(provider.calls() == 0);
    CHECK(snapshot(dir.path) == before);
}

TEST_CASE("summarize refuses an unmutated campaign") {
    TempDir dir("store");
    CampaignStore store = demo_campaign(dir.path, Phase::Ingested);
    StubProvider provider;
    CHECK_THROWS_AS(run_summarize(store, stub_config(), provider, 1), PhaseError);
}

TEST_CASE("credentials never reach the campaign directory") {
    TempDir dir("store");
    ::setenv("MUTSUM_TEST_SECRET", "sk-should-never-appear", 1);
    ProviderConfig config = stub_config();
    config.credential_env = "MUTSUM_TEST_SECRET";
    CampaignStore store = demo_campaign(dir.path, Phase::Mutated);
    StubProvider provider;
    run_summarize(store, config, provider, 2);
    for (const auto& [path, content] : snapshot(dir.path)) {
        CHECK_MESSAGE(content.find("sk-should-never-appear") == std::string::npos, path);
        CHECK_MESSAGE(content.find("api_key") == std::string::npos, path);
    }
    CHECK(fsutil::read_json(dir.path / "campaign.json")["config"]["provider"]["credential_env"] ==
          "MUTSUM_TEST_SECRET");
    ::unsetenv("MUTSUM_TEST_SECRET");
}

TEST_CASE("integrity findings") {
    TempDir dir("store");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    REQUIRE_MESSAGE(store.integrity_check().ok(), dump(store.integrity_check()));
    CHECK(store.integrity_check().artifacts_checked == 3 + 27 + 30);
    const auto index = store.summary_index();
    const std::string mutant_id = store.mutants()[4].id;
    const fs::path summary_file = store.summaries().path_for(index.at(mutant_id));

    SUBCASE("leftover temp files are ignored") {
        std::ofstream(dir.path / "programs" / "kruskal.py.tmp~123.0") << "torn";
        CHECK(store.integrity_check().ok());
    }
    SUBCASE("deleted summary file") {
        fs::remove(summary_file);
        const auto r = store.integrity_check();
        CHECK(has_finding(r, "dangling_reference", mutant_id));
        CHECK(has_finding(r, "phase_gap", "summarized"));
    }
    SUBCASE("tampered summary text") {
        json j = fsutil::read_json(summary_file);
        j["summary_text"] = "Something else entirely.";
        fsutil::write_json(summary_file, j);
        const auto r = store.integrity_check();
        REQUIRE(r.findings.size() == 1);
        CHECK(r.findings[0].kind == "cache_key_mismatch");
        CHECK(r.findings[0].ref == mutant_id);
    }
    SUBCASE("summary filed under the wrong subject") {
        auto bad = index;
        bad[store.programs()[0].id] = index.at(mutant_id);
        store.put_summary_index(bad);
        CHECK(has_finding(store.integrity_check(), "cache_key_mismatch", store.programs()[0].id));
    }
    SUBCASE("edited mutant file") {
        const auto [program, name] = split_mutant_id(mutant_id);
        const fs::path f = dir.path / "mutants" / program / (name + ".py");
        fsutil::atomic_write(f, fsutil::read_file(f) + "\nextra = 1\n");
        CHECK(has_finding(store.integrity_check(), "mutant_invalid", mutant_id));
    }
    SUBCASE("edited program file") {
        fsutil::atomic_write(dir.path / "programs" / "kruskal.py", "x = 1\n");
        CHECK(has_finding(store.integrity_check(), "digest_mismatch", "kruskal"));
    }
    SUBCASE("corrupt and dangling verdicts") {
        Verdict v{mutant_id, "alice", Label::Positive, std::nullopt, true, "", "t", {}};
        CHECK(store.put_verdict(v));
        CHECK(store.integrity_check().ok());
        fsutil::atomic_write(dir.path / "verdicts" / "alice" / "kruskal" / "ghost.json", "{not json");
        Verdict ghost = v;
        ghost.mutant_id = "min_heap/nope_b_1";
        store.put_verdict(ghost);
        const auto r = store.integrity_check();
        CHECK(has_finding(r, "corrupt_file", "kruskal/ghost"));
        CHECK(has_finding(r, "dangling_reference", "min_heap/nope_b_1"));
    }
}

TEST_CASE("verdict and reconciled round trips") {
    TempDir dir("store");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    const std::string id = store.mutants()[0].id;
    Verdict v{id, "bob", Label::Negative, FailureMode::DescribesOriginal, false, "still says original", "t0", {}};
    CHECK(store.put_verdict(v));
    CHECK_FALSE(store.put_verdict(v));
    CHECK(store.verdict("bob", id) == v);
    CHECK(store.verdicts("bob") == std::vector<Verdict>{v});
    CHECK(store.raters() == std::vector<std::string>{"bob"});
    CHECK_FALSE(store.verdict("carol", id));

    Verdict invalid = v;
    invalid.recognized_as_bug = true;
    CHECK_THROWS_AS(store.put_verdict(invalid), ReviewError);

    ReconciledVerdict r{id, Label::Negative, FailureMode::DescribesOriginal, false, ReconcileMethod::SingleRater,
                        "", "", {"bob"}, {}};
    CHECK(store.put_reconciled(r));
    CHECK(store.reconciled(id) == r);
    CHECK(store.reconciled().size() == 1);
    CHECK(store.campaign().verdict_ids == std::vector<std::string>{"bob:" + id});
}

TEST_CASE("interrupted writes leave a loadable campaign that resumes to the same state") {
    const auto programs = demo_programs();
    CampaignConfig config;
    config.id = "demo";
    auto drive = [&](const fs::path& dir) {
        CampaignStore s = CampaignStore::init(dir, config, programs, true);
        run_mutate(s, "1", 7);
        StubProvider provider;
        run_summarize(s, stub_config(), provider, 2);
    };

    TempDir clean("clean");
    drive(clean.path);
    const auto expected = snapshot(clean.path);

    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 12; ++trial) {
        TempDir dir("crash");
        const int stop_at = static_cast<int>(rng() % 160);
        const auto stage = static_cast<fsutil::WriteStage>(rng() % 3);
        std::atomic<int> seen{0};
        fsutil::set_fault_hook([&](fsutil::WriteStage s, const fs::path&) {
            if (s == stage && seen++ == stop_at) throw std::runtime_error("injected crash");
        });
        try {
            drive(dir.path);
        } catch (const std::exception&) {
        }
        fsutil::set_fault_hook(nullptr);

        if (CampaignStore::exists(dir.path)) {
            const auto report = CampaignStore::open(dir.path).integrity_check();
            CHECK_MESSAGE(report.ok(), "trial ", trial, ": ", dump(report));
        }
        drive(dir.path);
        CHECK(snapshot(dir.path) == expected);
    }
}
