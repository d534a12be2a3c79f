#include <doctest.h>

#include <httplib.h>

#include <set>
#include <sstream>
#include <thread>

#include "mutsum/error.hpp"
#include "mutsum/review.hpp"
#include "mutsum/review_server.hpp"
#include "support/campaign_fixture.hpp"

using namespace mutsum;
using namespace mutsum::testing;
using nlohmann::json;

namespace {

const Clock kClock = [] { return std::string("2025-02-01T12:00:00Z"); };

std::vector<std::string> mutant_ids(const CampaignStore& store) {
    std::vector<std::string> ids;
    for (const Mutant& m : store.mutants()) ids.push_back(m.id);
    return ids;
}

Verdict make(const std::string& id, const std::string& rater, Label label) {
    Verdict v;
    v.mutant_id = id;
    v.rater_id = rater;
    v.label = label;
    if (label == Label::Negative) v.failure_mode = FailureMode::TooAbstract;
    return v;
}

/// Rater "a" says Positive on even indices; "b" agrees except on `flip`.
void judge_all(CampaignStore& store, const std::set<std::size_t>& flip) {
    const auto ids = mutant_ids(store);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Label la = i % 2 == 0 ? Label::Positive : Label::Negative;
        const Label lb = flip.count(i) ? (la == Label::Positive ? Label::Negative : Label::Positive) : la;
        submit_verdict(store, make(ids[i], "a", la), kClock);
        submit_verdict(store, make(ids[i], "b", lb), kClock);
    }
}

}  // namespace

TEST_CASE("review order is a reproducible per-rater permutation") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    auto ids = mutant_ids(store);
    REQUIRE(ids.size() == 27);
    const auto order_a = review_order(store, "alice");
    CHECK(order_a == review_order(store, "alice"));
    CHECK(order_a != review_order(store, "bob"));
    auto sorted = order_a;
    std::sort(sorted.begin(), sorted.end());
    std::sort(ids.begin(), ids.end());
    CHECK(sorted == ids);
    CHECK(order_seed(store, "alice") != order_seed(store, "bob"));

    const auto first = next_pending(store, "alice", false);
    REQUIRE(first);
    CHECK(first->mutant_id == order_a.front());
    CHECK(first->position == 1);
    CHECK(first->total == 27);
    CHECK(first->order_seed == order_seed(store, "alice"));
    CHECK(to_json(*first).at("order_seed").is_string());
}

TEST_CASE("items need summaries and hide the code diff when blind") {
    TempDir dir("review");
    {
        CampaignStore mutated = demo_campaign(dir.path, Phase::Mutated);
        CHECK_THROWS_AS(review_item(mutated, mutant_ids(mutated).front(), false), PhaseError);
    }
    TempDir dir2("review");
    CampaignStore store = demo_campaign(dir2.path, Phase::Summarized);
    const std::string id = mutant_ids(store).front();
    const ReviewItem open = review_item(store, id, false);
    REQUIRE(open.code_diff);
    CHECK(open.code_diff->find("--- original/") != std::string::npos);
    CHECK(open.code_diff->find("+++ mutated/" + id + ".py") != std::string::npos);
    CHECK(open.original_code != open.mutated_code);
    CHECK(!open.summary_diff.empty());

    const ReviewItem blind = review_item(store, id, true);
    CHECK_FALSE(blind.code_diff);
    CHECK(blind.blind);
    CHECK_FALSE(to_json(blind).contains("code_diff"));
    CHECK_THROWS_AS(review_item(store, "nope/stmt_b_1", false), ReviewError);

    const std::string text = render_item(open, 100);
    CHECK(text.find(id) != std::string::npos);
    CHECK(text.find("[-") != std::string::npos);
    CHECK(text.find("{+") != std::string::npos);
    CHECK(render_item(blind, 100).find("--- original/") == std::string::npos);
}

TEST_CASE("next_pending walks every item exactly once") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    std::set<std::string> seen;
    std::size_t pos = 0;
    while (auto item = next_pending(store, "r1", true)) {
        CHECK(item->position == ++pos);
        CHECK(seen.insert(item->mutant_id).second);
        submit_verdict(store, make(item->mutant_id, "r1", Label::Positive), kClock);
    }
    CHECK(seen.size() == 27);
    CHECK(store.phase() == Phase::UnderReview);
    CHECK(next_pending(store, "r2", true));
}

TEST_CASE("submit enforces verdict invariants and audits replacements") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    const std::string id = mutant_ids(store).front();

    Verdict bad = make(id, "r1", Label::Positive);
    bad.failure_mode = FailureMode::DescribesOriginal;
    CHECK_THROWS_AS(submit_verdict(store, bad, kClock), ReviewError);
    Verdict bug_on_negative = make(id, "r1", Label::Negative);
    bug_on_negative.recognized_as_bug = true;
    CHECK_THROWS_AS(submit_verdict(store, bug_on_negative, kClock), ReviewError);
    CHECK_THROWS_AS(submit_verdict(store, make(id, "../x", Label::Positive), kClock), ReviewError);
    CHECK_THROWS_AS(submit_verdict(store, make(id, "", Label::Positive), kClock), ReviewError);
    CHECK_THROWS_AS(submit_verdict(store, make("ghost/stmt_b_1", "r1", Label::Positive), kClock), ReviewError);
    CHECK(store.phase() == Phase::Summarized);

    const Verdict first = submit_verdict(store, make(id, "r1", Label::Positive), kClock);
    CHECK(first.decided_at == "2025-02-01T12:00:00Z");
    CHECK(first.audit.empty());
    CHECK(store.phase() == Phase::UnderReview);

    const auto before = snapshot(dir.path);
    const Clock later = [] { return std::string("2025-03-01T00:00:00Z"); };
    const Verdict again = submit_verdict(store, make(id, "r1", Label::Positive), later);
    CHECK(again.decided_at == first.decided_at);
    CHECK(snapshot(dir.path) == before);

    const Verdict changed = submit_verdict(store, make(id, "r1", Label::Negative), later);
    REQUIRE(changed.audit.size() == 1);
    CHECK(changed.audit[0].find("replaced") != std::string::npos);
    CHECK(store.verdict("r1", id)->label == Label::Negative);
}

TEST_CASE("agreement over the shared items") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    CHECK_THROWS_AS(agreement(store, "a", "b"), ReviewError);
    judge_all(store, {1, 4});
    const AgreementResult ab = agreement(store, "a", "b");
    const AgreementResult ba = agreement(store, "b", "a");
    CHECK(ab.n_items == 27);
    CHECK(ab.confusion[0][0] + ab.confusion[1][1] == 25);
    CHECK(ab.kappa == doctest::Approx(ba.kappa).epsilon(1e-15));
    CHECK(ab.confusion[0][1] == ba.confusion[1][0]);
    CHECK(ab.percent_agreement == doctest::Approx(25.0 / 27.0));
    CHECK(ab.kappa == doctest::Approx(stats::cohens_kappa(ab.confusion)));
    CHECK_THROWS_AS(agreement(store, "a", "a"), ReviewError);
    CHECK_THROWS_AS(agreement(store, "a", "nobody"), ReviewError);

    const auto j = ab.to_json();
    CHECK(j.at("kappa").get<double>() == ab.kappa);
}

TEST_CASE("agreement with constant labels on both sides is degenerate") {
    const std::vector<Label> a(5, Label::Positive);
    CHECK_THROWS_AS(agreement_from_labels(a, a), StatsError);
}

TEST_CASE("reconciliation: unanimous, disagreement, force and explicit precedence") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    const auto ids = mutant_ids(store);
    CHECK_THROWS_AS(auto_reconcile(store), PhaseError);
    judge_all(store, {1, 4});

    AutoReconcileResult r = auto_reconcile(store);
    CHECK(r.written == 25);
    CHECK(r.disagreements == std::vector<std::string>{ids[1], ids[4]});
    CHECK(r.incomplete.empty());
    CHECK(store.phase() == Phase::UnderReview);
    CHECK(store.reconciled(ids[0])->method == ReconcileMethod::Unanimous);
    CHECK(store.reconciled(ids[0])->raters == std::vector<std::string>{"a", "b"});

    ReconcileRequest req;
    req.mutant_id = ids[0];
    req.label = Label::Negative;
    req.failure_mode = FailureMode::DescribesOriginal;
    req.resolver_id = "lead";
    CHECK_THROWS_AS(reconcile(store, req), ReviewError);
    req.force = true;
    const ReconciledVerdict forced = reconcile(store, req);
    CHECK(forced.method == ReconcileMethod::Forced);
    CHECK(forced.audit.size() == 2);

    req = ReconcileRequest{};
    req.mutant_id = ids[1];
    req.label = Label::Positive;
    req.resolver_id = "";
    CHECK_THROWS_AS(reconcile(store, req), ReviewError);
    req.resolver_id = "lead";
    req.note = "discussed";
    CHECK(reconcile(store, req).method == ReconcileMethod::Resolved);
    CHECK(store.phase() == Phase::UnderReview);

    req.mutant_id = ids[4];
    req.label = Label::Negative;
    req.failure_mode = FailureMode::TooAbstract;
    reconcile(store, req);
    CHECK(store.phase() == Phase::Reconciled);

    // auto never overwrites explicit decisions
    r = auto_reconcile(store);
    CHECK(r.written == 0);
    CHECK(store.reconciled(ids[0])->method == ReconcileMethod::Forced);
    CHECK(store.reconciled(ids[1])->note == "discussed");
}

TEST_CASE("a new disagreement withdraws the automatic record") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    const auto ids = mutant_ids(store);
    judge_all(store, {});
    CHECK(auto_reconcile(store).written == 27);
    CHECK(store.phase() == Phase::Reconciled);
    submit_verdict(store, make(ids[2], "b", Label::Negative), kClock);
    const AutoReconcileResult r = auto_reconcile(store);
    CHECK(r.disagreements == std::vector<std::string>{ids[2]});
    CHECK_FALSE(store.reconciled(ids[2]));
}

TEST_CASE("single-rater campaigns reconcile verbatim") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    const auto ids = mutant_ids(store);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Verdict v = make(ids[i], "solo", i % 3 ? Label::Positive : Label::Negative);
        v.recognized_as_bug = v.label == Label::Positive && i % 2;
        v.note = "n" + std::to_string(i);
        submit_verdict(store, v, kClock);
        if (i == 5) CHECK(auto_reconcile(store).incomplete.size() == ids.size() - 6);
    }
    CHECK(auto_reconcile(store).written == ids.size() - 6);
    CHECK(store.phase() == Phase::Reconciled);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto r = store.reconciled(ids[i]);
        const auto v = store.verdict("solo", ids[i]);
        CHECK(r->method == ReconcileMethod::SingleRater);
        CHECK(r->label == v->label);
        CHECK(r->failure_mode == v->failure_mode);
        CHECK(r->recognized_as_bug == v->recognized_as_bug);
        CHECK(r->note == v->note);
    }
}

TEST_CASE("script lines") {
    Verdict v = parse_script_line("demo/x P bug # saw it", "r");
    CHECK(v.label == Label::Positive);
    CHECK(v.recognized_as_bug);
    CHECK(v.note == "saw it");
    v = parse_script_line("  demo/x n describes-original ", "r");
    CHECK(v.failure_mode == FailureMode::DescribesOriginal);
    CHECK_THROWS_AS(parse_script_line("demo/x", "r"), ReviewError);
    CHECK_THROWS_AS(parse_script_line("demo/x maybe", "r"), ReviewError);
    CHECK_THROWS_AS(parse_script_line("demo/x P too-abstract", "r"), ReviewError);
    CHECK_THROWS_AS(parse_script_line("demo/x N bug", "r"), ReviewError);
    CHECK_THROWS_AS(parse_script_line("demo/x N too-abstract describes-original", "r"), ReviewError);
    CHECK_THROWS_AS(parse_script_line("demo/x N sideways", "r"), ReviewError);
}

TEST_CASE("terminal review, scripted and interactive") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    const auto ids = mutant_ids(store);
    std::ostringstream sink;

    std::istringstream script("# header\n" + ids[0] + " P\n\n" + ids[1] + " N too-abstract\n");
    TerminalResult r = terminal_review(store, "s", false, script, sink, true, kClock);
    CHECK(r.submitted == 2);
    std::istringstream again(ids[0] + " P\n");
    r = terminal_review(store, "s", false, again, sink, true, kClock);
    CHECK(r.unchanged == 1);
    std::istringstream broken(ids[0] + " P\n" + ids[1] + " X\n");
    try {
        terminal_review(store, "s", false, broken, sink, true, kClock);
        FAIL("expected a script error");
    } catch (const ReviewError& e) {
        CHECK(std::string(e.what()).find("script line 2") != std::string::npos);
    }

    std::istringstream typed("P\nwhat\nN describes-original\nq\n");
    std::ostringstream screen;
    r = terminal_review(store, "t", true, typed, screen, false, kClock);
    CHECK(r.submitted == 2);
    CHECK(screen.str().find("rejected:") != std::string::npos);
    CHECK(store.verdicts("t").size() == 2);
}

TEST_CASE("progress reports per-rater counts and disagreements") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    judge_all(store, {3});
    const Progress p = progress(store);
    CHECK(p.mutants == 27);
    REQUIRE(p.raters.size() == 2);
    CHECK(p.raters[0].judged == 27);
    CHECK(p.disagreements.size() == 1);
    CHECK(p.to_json().at("phase") == "under-review");
}

namespace {

struct RunningServer {
    ReviewServer server;
    int port;
    std::thread thread;

    explicit RunningServer(CampaignStore& store) : server(store), port(server.bind("127.0.0.1", 0)) {
        thread = std::thread([this] { server.listen(); });
        server.wait_until_ready();
    }
    ~RunningServer() {
        server.stop();
        thread.join();
    }
};

json body_of(const httplib::Result& r) {
    REQUIRE(r);
    return json::parse(r->body);
}

}  // namespace

TEST_CASE("http api") {
    TempDir dir("review");
    CampaignStore store = demo_campaign(dir.path, Phase::Summarized);
    const auto ids = mutant_ids(store);
    RunningServer running(store);
    httplib::Client client("127.0.0.1", running.port);

    auto list = client.Get("/campaigns");
    REQUIRE(list);
    CHECK(list->status == 200);
    CHECK(body_of(list)[0].at("id") == "demo");
    CHECK(body_of(list)[0].at("phase") == "summarized");

    CHECK(client.Get("/campaigns/other/progress")->status == 404);
    CHECK(client.Get("/campaigns/demo/next")->status == 400);

    auto next = client.Get("/campaigns/demo/next?rater=web&blind=1");
    REQUIRE(next);
    CHECK(next->status == 200);
    json item = body_of(next).at("item");
    CHECK_FALSE(item.contains("code_diff"));
    CHECK(item.at("mutant_id") == review_order(store, "web").front());
    item = body_of(client.Get("/campaigns/demo/next?rater=web&blind=0")).at("item");
    CHECK(item.contains("code_diff"));

    const std::string first = item.at("mutant_id");
    auto posted = client.Post("/campaigns/demo/verdicts",
                              json{{"mutant_id", first}, {"rater_id", "web"}, {"label", "positive"},
                                   {"recognized_as_bug", true}}
                                  .dump(),
                              "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 201);
    CHECK(body_of(posted).at("verdict").at("recognized_as_bug") == true);
    CHECK(store.verdict("web", first));

    auto illegal = client.Post("/campaigns/demo/verdicts",
                               json{{"mutant_id", first}, {"rater_id", "web"}, {"label", "positive"},
                                    {"failure_mode", "too-abstract"}}
                                   .dump(),
                               "application/json");
    CHECK(illegal->status == 400);
    CHECK(body_of(illegal).at("error").at("code") == "review_error");
    CHECK(client.Post("/campaigns/demo/verdicts", "{not json", "application/json")->status == 400);

    for (const std::string& id : ids) {
        const bool flip = id == ids[2];
        client.Post("/campaigns/demo/verdicts",
                    json{{"mutant_id", id}, {"rater_id", "web"}, {"label", "positive"}, {"recognized_as_bug", true}}
                        .dump(),
                    "application/json");
        client.Post("/campaigns/demo/verdicts",
                    json{{"mutant_id", id}, {"rater_id", "x"}, {"label", "positive"}}.dump(), "application/json");
        client.Post("/campaigns/demo/verdicts",
                    json{{"mutant_id", id}, {"rater_id", "y"}, {"label", flip ? "negative" : "positive"},
                         {"failure_mode", flip ? json("too-abstract") : json(nullptr)}}
                        .dump(),
                    "application/json");
    }
    auto done = body_of(client.Get("/campaigns/demo/next?rater=x"));
    CHECK(done.at("done") == true);
    CHECK(done.at("judged") == 27);

    auto agree = client.Get("/campaigns/demo/agreement?a=x&b=y");
    REQUIRE(agree);
    CHECK(agree->status == 200);
    const json aj = body_of(agree);
    CHECK(aj.at("n_items") == 27);
    CHECK(aj.at("kappa").get<double>() == agreement(store, "x", "y").kappa);
    CHECK(client.Get("/campaigns/demo/agreement?a=x&b=x")->status == 400);

    auto autor = body_of(client.Post("/campaigns/demo/reconcile", R"({"auto": true})", "application/json"));
    CHECK(autor.at("disagreements") == json::array({ids[2]}));
    auto resolved = client.Post(
        "/campaigns/demo/reconcile",
        json{{"mutant_id", ids[2]}, {"label", "negative"}, {"failure_mode", "describes-original"},
             {"resolver_id", "lead"}}
            .dump(),
        "application/json");
    CHECK(resolved->status == 200);
    CHECK(body_of(resolved).at("reconciled").at("method") == "resolved");

    auto prog = body_of(client.Get("/campaigns/demo/progress"));
    CHECK(prog.at("phase") == "reconciled");
    CHECK(prog.at("reconciled") == 27);
}
