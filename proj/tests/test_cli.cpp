#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "mutsum/analytics.hpp"
#include "mutsum/cli.hpp"
#include "mutsum/fsutil.hpp"
#include "mutsum/summary_client.hpp"
#include "support/campaign_fixture.hpp"
#include "support/demo_fixture.hpp"
#include "support/paths.hpp"

using namespace mutsum;
using namespace mutsum::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool error_line(const StageRun& r, const std::string& code) {
    if (r.err.rfind("error: ", 0) != 0) return false;
    const json j = json::parse(r.err.substr(7, r.err.find('\n') - 7), nullptr, false);
    return !j.is_discarded() && j.value("code", "") == code;
}

bool store_phase_is(const fs::path& dir, const std::string& phase) {
    return to_string(CampaignStore::open(dir).phase()) == phase;
}

}  // namespace

TEST_CASE("usage errors") {
    CHECK(run_cli({}).status == cli::kUsage);
    const StageRun unknown = run_cli({"frobnicate"});
    CHECK(unknown.status == cli::kUsage);
    CHECK(error_line(unknown, "usage"));
    CHECK(run_cli({"mutate", "--bogus"}).status == cli::kUsage);
    CHECK(run_cli({"mutate"}).status == cli::kUsage);  // no campaign
    CHECK(run_cli({"--help"}).status == cli::kOk);
    // credentials are never flags
    CHECK(run_cli({"-C", "x", "summarize", "--api-key", "sk-123"}).status == cli::kUsage);
}

TEST_CASE("offline demo pipeline matches the goldens and is idempotent") {
    TempDir dir("cli");
    const auto stages = demo_stages(dir.path);
    std::vector<StageRun> first;
    for (const auto& args : stages) {
        first.push_back(run_cli(args));
        CAPTURE(args[2]);
        CAPTURE(first.back().err);
        REQUIRE(first.back().status == 0);
    }
    CHECK(first[1].result.at("mutants") == 27);
    CHECK(first[2].result.at("records") == 30);
    CHECK(first[5].result.at("disagreements").size() == 3);
    CHECK(first[6].result.at("phase") == "reconciled");
    CHECK(first[7].result.at("phase") == "reported");
    CHECK(compare_with_goldens(dir.path / "report").empty());

    const auto before = snapshot(dir.path);
    for (const auto& args : stages) {
        const StageRun r = run_cli(args);
        CAPTURE(args[2]);
        CAPTURE(r.err);
        REQUIRE(r.status == 0);
        if (r.result.contains("new_artifacts")) CHECK(r.result.at("new_artifacts") == 0);
        if (r.result.contains("written")) CHECK(r.result.at("written") == 0);
        if (r.result.contains("submitted")) CHECK(r.result.at("submitted") == 0);
    }
    CHECK(snapshot(dir.path) == before);

    // after the report, changing a judgment is refused
    const fs::path changed = dir.path.parent_path() / (dir.path.filename().string() + "-changed.txt");
    fsutil::atomic_write(changed, "kruskal/val_e_1 N too-abstract\n");
    const StageRun late = run_cli({"-C", dir.path.string(), "review", "--rater", "alice", "--script", changed.string()});
    fs::remove(changed);
    CHECK(late.status == cli::kPhase);
    CHECK(snapshot(dir.path) == before);

    const StageRun verify = run_cli({"-C", dir.path.string(), "verify"});
    CHECK(verify.status == 0);
    CHECK(verify.result.at("integrity").at("ok") == true);
}

TEST_CASE("re-running review and reconcile before the report writes nothing") {
    TempDir dir("cli");
    demo_pipeline(dir.path, "reconcile");
    const auto stages = demo_stages(dir.path);
    const auto before = snapshot(dir.path);
    for (std::size_t i = 0; i < 6; ++i) {
        const StageRun r = run_cli(stages[i]);
        CAPTURE(stages[i][2]);
        REQUIRE(r.status == 0);
        if (stages[i][2] == "review") CHECK(r.result.at("submitted") == 0);
    }
    CHECK(snapshot(dir.path) == before);
}

TEST_CASE("phase and integrity failures have their own exit codes") {
    TempDir dir("cli");
    demo_pipeline(dir.path, "mutate");
    const std::string d = dir.path.string();
    const StageRun early = run_cli({"-C", d, "review", "--rater", "x", "--script",
                                    (demo_dir() / "raters" / "alice.txt").string()});
    CHECK(early.status == cli::kPhase);
    CHECK(error_line(early, "phase_violation"));
    CHECK(run_cli({"-C", d, "mutate", "--quota", "1", "--seed", "8"}).status == cli::kPhase);
    CHECK(run_cli({"-C", d, "report"}).status == cli::kPhase);

    fsutil::atomic_write(dir.path / "mutants" / "kruskal" / "val_b_1.py", "x = 1\n");
    const StageRun v = run_cli({"-C", d, "verify"});
    CHECK(v.status == cli::kIntegrity);
    CHECK(v.result.at("integrity").at("ok") == false);
    CHECK(error_line(v, "integrity_error"));
}

TEST_CASE("summarize settings handling") {
    TempDir dir("cli");
    demo_pipeline(dir.path, "mutate");
    const std::string d = dir.path.string();
    CHECK(run_cli({"-C", d, "summarize"}).status == cli::kUsage);

    const fs::path with_key = dir.path / "bad_settings.json";
    fsutil::atomic_write(with_key, R"({"model_id": "gpt-4-1106-preview", "api_key": "sk-live"})");
    const StageRun bad = run_cli({"-C", d, "summarize", "--settings", with_key.string(), "--replay",
                                  (demo_dir() / "summaries.jsonl").string()});
    CHECK(bad.status == cli::kUsage);
    CHECK(error_line(bad, "config_error"));

    const fs::path other_model = dir.path / "other.json";
    fsutil::atomic_write(other_model, R"({"model_id": "other-model"})");
    const StageRun miss = run_cli({"-C", d, "summarize", "--settings", other_model.string(), "--replay",
                                   (demo_dir() / "summaries.jsonl").string()});
    CHECK(miss.status == cli::kProvider);
    CHECK(error_line(miss, "summaries_failed"));
    CHECK(store_phase_is(dir.path, "mutated"));
}

TEST_CASE("the key named in settings is never written to the campaign") {
    TempDir dir("cli");
    ::setenv("MUTSUM_CLI_TEST_KEY", "sk-cli-secret-7731", 1);
    demo_pipeline(dir.path, "mutate");
    const fs::path settings = dir.path.parent_path() / (dir.path.filename().string() + "-settings.json");
    fsutil::atomic_write(settings, R"({"model_id": "gpt-4-1106-preview", "credential_env": "MUTSUM_CLI_TEST_KEY"})");
    const StageRun r = run_cli({"-C", dir.path.string(), "summarize", "--settings", settings.string(), "--replay",
                                (demo_dir() / "summaries.jsonl").string()});
    fs::remove(settings);
    REQUIRE(r.status == 0);
    for (const auto& [path, content] : snapshot(dir.path)) {
        CAPTURE(path);
        CHECK(content.find("sk-cli-secret-7731") == std::string::npos);
    }
    ::unsetenv("MUTSUM_CLI_TEST_KEY");
}

TEST_CASE("a locked campaign is refused") {
    TempDir dir("cli");
    demo_pipeline(dir.path, "ingest");
    const CampaignStore holder = CampaignStore::open(dir.path, CampaignStore::Access::Write);
    const StageRun r = run_cli({"-C", dir.path.string(), "mutate", "--quota", "1", "--seed", "7"});
    CHECK(r.status == cli::kStore);
    CHECK(error_line(r, "store_error"));
}

TEST_CASE("report from a verdict fixture") {
    TempDir dir("cli");
    const StageRun r = run_cli({"report", "--verdicts", (fixtures_dir() / "lbpp" / "verdicts.jsonl").string(),
                                "--out", dir.path.string()});
    REQUIRE(r.status == 0);
    CHECK(fsutil::read_file(dir.path / "tables" / "model_comparison.csv").find("overall,49.3%,85.3%,+36.0pp") !=
          std::string::npos);
    CHECK(run_cli({"report", "--verdicts", "/nonexistent.jsonl", "--out", dir.path.string()}).status ==
          cli::kInput);
    CHECK(run_cli({"report", "--verdicts", "x.jsonl"}).status == cli::kUsage);
}

TEST_CASE("ingest from JSONL with a field map") {
    TempDir dir("cli");
    const fs::path corpus = dir.path / "corpus.jsonl";
    fsutil::atomic_write(corpus,
                         json{{"task_id", "t1"}, {"solution", "def f(x):\n    if x > 1:\n        return x\n    return 0\n"}}
                                 .dump() +
                             "\n" + json{{"task_id", "t2"}, {"solution", "def g(:\n"}}.dump() + "\n");
    const StageRun r = run_cli({"-C", (dir.path / "c").string(), "ingest", "--corpus", corpus.string(), "--jsonl",
                                "--fields", "id=task_id,source=solution,title=", "--id", "lb"});
    CAPTURE(r.err);
    REQUIRE(r.status == 0);
    CHECK(r.result.at("programs") == 1);
    CHECK(r.result.at("rejected").size() == 1);
    const StageRun empty = run_cli({"-C", (dir.path / "d").string(), "ingest", "--corpus",
                                    (dir.path / "nothing").string()});
    CHECK(empty.status == cli::kInput);
}

TEST_CASE("verify without a campaign runs only the self-tests") {
    const StageRun r = run_cli({"verify"});
    CHECK(r.status == 0);
    CHECK_FALSE(r.result.contains("integrity"));
    for (const json& t : r.result.at("self_tests")) CHECK(t.at("ok") == true);
}

TEST_CASE("the committed replay fixture regenerates from the demo texts") {
    TempDir dir("cli");
    demo_pipeline(dir.path, "mutate");
    const auto store = CampaignStore::open(dir.path);
    const auto config = provider_config_from_json(fsutil::read_json(demo_dir() / "settings.json"));
    const std::string regenerated = replay_fixture_jsonl(store, config, demo_dir() / "summary_texts.json");
    std::ifstream in(demo_dir() / "summaries.jsonl", std::ios::binary);
    const std::string committed((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(regenerated == committed);
}
