#include <doctest.h>

#include <fstream>

#include "mutsum/analytics.hpp"
#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"
#include "mutsum/review.hpp"
#include "support/campaign_fixture.hpp"
#include "support/paths.hpp"

using namespace mutsum;
using namespace mutsum::testing;
namespace fs = std::filesystem;

namespace {

fs::path lbpp_fixture() { return fixtures_dir() / "lbpp" / "verdicts.jsonl"; }

std::vector<VerdictRow> only(const std::vector<VerdictRow>& rows, const std::string& model) {
    std::vector<VerdictRow> out;
    for (const VerdictRow& r : rows)
        if (r.model == model) out.push_back(r);
    return out;
}

std::vector<std::string> formatted(const RateBreakdown& b) {
    std::vector<std::string> out;
    for (const RateGroup& g : b.groups) out.push_back(g.formatted());
    out.push_back(b.overall.formatted());
    return out;
}

VerdictRow row(const std::string& id, MutationType t, Label l) {
    VerdictRow r;
    r.mutant_id = id;
    r.model = "m";
    r.mutation_type = t;
    r.label = l;
    return r;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("lbpp fixture reproduces the per-type rates") {
    const auto rows = load_verdict_fixture(lbpp_fixture());
    REQUIRE(rows.size() == 300);
    const RateBreakdown gpt4 = detection_rates(only(rows, "gpt-4"), Dimension::MutationType);
    const RateBreakdown gpt52 = detection_rates(only(rows, "gpt-5.2"), Dimension::MutationType);
    CHECK(formatted(gpt4) == std::vector<std::string>{"46.0%", "44.0%", "58.0%", "49.3%"});
    CHECK(formatted(gpt52) == std::vector<std::string>{"76.0%", "88.0%", "92.0%", "85.3%"});
    CHECK(stats::format_pp(gpt52.overall.positives, gpt52.overall.total, gpt4.overall.positives,
                           gpt4.overall.total) == "+36.0pp");

    const RateBreakdown models = detection_rates(rows, Dimension::Model);
    REQUIRE(models.groups.size() == 2);
    CHECK(models.groups[0].label == "gpt-4");
    CHECK(models.groups[1].formatted() == "85.3%");
    CHECK_THROWS_AS(detection_rates(rows, Dimension::Complexity), StatsError);
}

TEST_CASE("report from the lbpp fixture") {
    TempDir dir("report");
    const ReportInput input{"lbpp", load_verdict_fixture(lbpp_fixture()), std::nullopt};
    const ReportSummary s = emit_report(input, dir.path);
    CHECK(s.written == s.files.size());
    CHECK(fs::exists(dir.path / "report.md"));
    CHECK_FALSE(fs::exists(dir.path / "tables/complexity.csv"));

    const std::string cmp = fsutil::read_file(dir.path / "tables/model_comparison.csv");
    CHECK(cmp ==
          "mutation_type,gpt-4,gpt-5.2,improvement\n"
          "statement,46.0%,76.0%,+30.0pp\n"
          "decision,44.0%,88.0%,+44.0pp\n"
          "value,58.0%,92.0%,+34.0pp\n"
          "overall,49.3%,85.3%,+36.0pp\n");
    const std::string bugs = fsutil::read_file(dir.path / "tables/recognized_as_bug.csv");
    CHECK(bugs.find("gpt-5.2,128,62,48.4%") != std::string::npos);
    const std::string md = fsutil::read_file(dir.path / "report.md");
    CHECK(md.find("Detected 74 of 150 mutations (49.3%)") != std::string::npos);
    CHECK(md.find("Not available for this data set.") != std::string::npos);
    const std::string st = fsutil::read_file(dir.path / "tables/statistics.csv");
    CHECK(st.find("gpt-4,mann-whitney-u,loc (positive vs negative),,,,,,,loc not available") != std::string::npos);

    CHECK(emit_report(input, dir.path).written == 0);
}

TEST_CASE("report without negatives") {
    TempDir dir("report");
    ReportInput input;
    input.title = "all good";
    for (int i = 0; i < 6; ++i)
        input.rows.push_back(row("p/" + std::to_string(i), static_cast<MutationType>(i % 3), Label::Positive));
    emit_report(input, dir.path);
    CHECK(fsutil::read_file(dir.path / "tables/failure_modes.csv") == "model,failure_mode,count,share_of_negatives\n");
    const std::string st = fsutil::read_file(dir.path / "tables/statistics.csv");
    CHECK(st.find("fewer than two non-empty groups") == std::string::npos);
    CHECK(st.find("zero") != std::string::npos);
    CHECK(fsutil::read_file(dir.path / "report.md").find("No negative verdicts.") != std::string::npos);
}

TEST_CASE("verdict fixture errors carry the line number") {
    TempDir dir("fixture");
    const fs::path f = dir.path / "v.jsonl";
    write(f, R"({"mutant_id":"a","model":"m","mutation_type":"stmt","label":"P"})"
             "\n\n"
             R"({"mutant_id":"b","model":"m","mutation_type":"value","label":"P","failure_mode":"too-abstract"})"
             "\n");
    try {
        load_verdict_fixture(f);
        FAIL("expected FixtureError");
    } catch (const FixtureError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    write(f, R"({"mutant_id":"a","model":"m","mutation_type":"stmt","label":"P"})"
             "\n"
             R"({"mutant_id":"a","model":"m","mutation_type":"stmt","label":"N"})"
             "\n");
    CHECK_THROWS_AS(load_verdict_fixture(f), FixtureError);
    write(f, "{oops\n");
    CHECK_THROWS_AS(load_verdict_fixture(f), FixtureError);
    CHECK_THROWS_AS(load_verdict_fixture(dir.path / "missing.jsonl"), FixtureError);
}

TEST_CASE("campaign report needs reconciliation and then advances") {
    TempDir dir("report");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    CHECK_THROWS_AS(emit_campaign_report(store), PhaseError);
    const Clock clock = [] { return std::string("2025-02-01T00:00:00Z"); };
    std::size_t i = 0;
    for (const Mutant& m : store.mutants()) {
        for (const char* rater : {"a", "b"}) {
            Verdict v;
            v.mutant_id = m.id;
            v.rater_id = rater;
            v.label = i % 3 == 0 ? Label::Negative : Label::Positive;
            if (i == 4 && std::string(rater) == "b") v.label = Label::Negative;
            submit_verdict(store, v, clock);
        }
        ++i;
    }
    CHECK_THROWS_AS(emit_campaign_report(store), PhaseError);
    CHECK(auto_reconcile(store).disagreements.size() == 1);
    CHECK_THROWS_AS(campaign_rows(store), StatsError);
    ReconcileRequest req;
    req.mutant_id = store.mutants()[4].id;
    req.label = Label::Positive;
    req.resolver_id = "lead";
    reconcile(store, req);
    REQUIRE(store.phase() == Phase::Reconciled);

    const auto rows = campaign_rows(store);
    CHECK(rows.size() == 27);
    CHECK(rows[0].complexity);
    CHECK(rows[0].loc);
    const ReportSummary s = emit_campaign_report(store);
    CHECK(store.phase() == Phase::Reported);
    CHECK(fs::exists(store.report_dir() / "tables/agreement.csv"));
    CHECK(fs::exists(store.report_dir() / "tables/complexity.csv"));
    CHECK(fs::exists(store.report_dir() / "figures/location.json"));
    CHECK(s.written == s.files.size());
    const auto before = snapshot(dir.path);
    CHECK(emit_campaign_report(store).written == 0);
    CHECK(snapshot(dir.path) == before);
    CHECK(store.integrity_check().ok());
}
