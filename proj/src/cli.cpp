#include "mutsum/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mutsum/analytics.hpp"
#include "mutsum/campaign_store.hpp"
#include "mutsum/corpus.hpp"
#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"
#include "mutsum/pipeline.hpp"
#include "mutsum/review.hpp"
#include "mutsum/review_server.hpp"
#include "mutsum/stats.hpp"

namespace mutsum::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::string& code) {
    if (code == "config_error" || code == "usage") return kUsage;
    if (code == "phase_violation") return kPhase;
    if (code == "integrity_error") return kIntegrity;
    if (code == "io_error" || code == "parse_error" || code == "ingest_error" || code == "fixture_error")
        return kInput;
    if (code == "transport_error" || code == "replay_miss" || code == "context_overflow" ||
        code == "summaries_failed")
        return kProvider;
    if (code == "review_error" || code == "stats_error") return kReview;
    if (code == "store_error") return kStore;
    return kInternal;
}

namespace {

struct CliConfig {
    std::string campaign_dir;
    // ingest
    std::string corpus;
    bool jsonl = false;
    std::string fields;
    std::string origin = "custom";
    std::string id;
    // mutate
    std::string quota;
    std::optional<std::uint64_t> seed;
    std::string runner;
    std::string runner_input;
    int runner_timeout_ms = 5000;
    // summarize
    std::string settings;
    std::string replay;
    std::size_t parallelism = 4;
    // review / reconcile
    std::string rater;
    bool blind = false;
    std::string script;
    std::string resolver;
    bool force = false;
    // serve
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;
    // report
    std::string verdicts;
    std::string out_dir;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& m) : Error("usage", m) {}
};

class SummariesFailed : public Error {
public:
    explicit SummariesFailed(const std::string& m) : Error("summaries_failed", m) {}
};

fs::path campaign_dir(const CliConfig& c) {
    if (c.campaign_dir.empty()) throw UsageError("this subcommand needs --campaign DIR");
    return c.campaign_dir;
}

std::string read_text(const std::string& path) {
    try {
        return fsutil::read_file(path);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError("cannot read " + path + ": " + e.what());
    }
}

json shortfalls_json(const std::vector<ProgramShortfall>& s) {
    json out = json::array();
    for (const ProgramShortfall& p : s)
        out.push_back({{"program_id", p.program_id},
                       {"mutation_type", to_string(p.shortfall.type)},
                       {"bucket", to_string(p.shortfall.bucket)},
                       {"requested", p.shortfall.requested},
                       {"produced", p.shortfall.produced}});
    return out;
}

json cmd_ingest(const CliConfig& c) {
    const fs::path dir = campaign_dir(c);
    if (c.corpus.empty()) throw UsageError("ingest needs --corpus PATH");
    const IngestResult result =
        c.jsonl ? ingest_jsonl(c.corpus, parse_field_map(c.fields)) : ingest_directory(c.corpus, parse_origin(c.origin));
    if (result.programs.empty()) throw IngestError("no program in " + c.corpus + " passed ingestion");
    CampaignConfig config;
    config.id = c.id.empty() ? sanitize_id(fs::absolute(dir).filename().string()) : c.id;
    if (!c.quota.empty()) config.quota_spec = c.quota;
    config.seed = c.seed;
    const CampaignStore store = CampaignStore::init(dir, config, result.programs, CampaignStore::exists(dir));
    json manifest = result.manifest();
    return json{{"campaign", store.id()},
                {"phase", to_string(store.phase())},
                {"programs", result.programs.size()},
                {"rejected", manifest["rejected"]}};
}

json cmd_mutate(const CliConfig& c) {
    CampaignStore store = CampaignStore::open(campaign_dir(c), CampaignStore::Access::Write);
    const std::string quota = !c.quota.empty() ? c.quota : store.config().quota_spec.value_or("");
    const auto seed = c.seed ? c.seed : store.config().seed;
    if (quota.empty() || !seed) throw UsageError("mutate needs --quota and --seed (or values recorded at ingest)");
    std::optional<RunnerConfig> runner;
    if (!c.runner.empty()) {
        RunnerConfig r;
        std::istringstream words(c.runner);
        for (std::string w; words >> w;) r.command.push_back(w);
        if (!c.runner_input.empty()) r.input = read_text(c.runner_input);
        r.timeout = std::chrono::milliseconds(c.runner_timeout_ms);
        runner = std::move(r);
    }
    const MutateOutcome o = run_mutate(store, quota, *seed, runner);
    return json{{"mutants", o.mutants},
                {"new_artifacts", o.new_artifacts},
                {"shortfalls", shortfalls_json(o.shortfalls)},
                {"phase", to_string(store.phase())}};
}

json cmd_summarize(const CliConfig& c) {
    CampaignStore store = CampaignStore::open(campaign_dir(c), CampaignStore::Access::Write);
    ProviderConfig config;
    if (!c.settings.empty()) {
        try {
            config = provider_config_from_json(json::parse(read_text(c.settings)));
        } catch (const json::parse_error& e) {
            throw ConfigError("settings file " + c.settings + " is not JSON: " + e.what());
        }
    } else if (c.replay.empty()) {
        throw UsageError("live summarization needs --settings FILE");
    } else if (store.config().provider) {
        config = *store.config().provider;
    }
    std::unique_ptr<SummaryProvider> provider;
    if (!c.replay.empty()) provider = std::make_unique<ReplayProvider>(c.replay);
    else provider = std::make_unique<HttpChatProvider>(config);
    if (c.parallelism == 0) throw UsageError("--parallelism must be at least 1");

    const SummarizeOutcome o = run_summarize(store, config, *provider, c.parallelism);
    json failures = json::array();
    for (const SubjectFailure& f : o.batch.failures)
        failures.push_back({{"subject", f.subject_ref}, {"code", f.code}, {"message", f.message}});
    json result{{"records", o.batch.records.size()},
                {"failures", failures},
                {"new_artifacts", o.new_artifacts},
                {"phase", to_string(store.phase())}};
    if (!o.batch.failures.empty()) {
        std::ostringstream msg;
        msg << o.batch.failures.size() << " subject(s) not summarized: " << result.dump();
        throw SummariesFailed(msg.str());
    }
    return result;
}

json cmd_review(const CliConfig& c, std::istream& in, std::ostream& out) {
    if (c.rater.empty()) throw UsageError("review needs --rater ID");
    CampaignStore store = CampaignStore::open(campaign_dir(c), CampaignStore::Access::Write);
    TerminalResult r;
    if (!c.script.empty()) {
        std::ifstream script(c.script);
        if (!script) throw IoError("cannot read script " + c.script);
        r = terminal_review(store, c.rater, c.blind, script, out, true);
    } else {
        r = terminal_review(store, c.rater, c.blind, in, out, false);
    }
    return json{{"rater", c.rater},
                {"submitted", r.submitted},
                {"unchanged", r.unchanged},
                {"phase", to_string(store.phase())}};
}

json cmd_reconcile(const CliConfig& c) {
    CampaignStore store = CampaignStore::open(campaign_dir(c), CampaignStore::Access::Write);
    AutoReconcileResult a = auto_reconcile(store);
    std::size_t explicit_written = 0;
    if (!c.script.empty()) {
        if (c.resolver.empty()) throw UsageError("reconcile --script needs --resolver ID");
        std::ifstream script(c.script);
        if (!script) throw IoError("cannot read script " + c.script);
        std::string line;
        for (std::size_t n = 1; std::getline(script, line); ++n) {
            const auto start = line.find_first_not_of(" \t\r");
            if (start == std::string::npos || line[start] == '#') continue;
            try {
                const Verdict v = parse_script_line(line, c.resolver);
                ReconcileRequest req{v.mutant_id, v.label, v.failure_mode, v.recognized_as_bug, c.resolver, v.note,
                                     c.force};
                const auto before = store.reconciled(v.mutant_id);
                const ReconciledVerdict after = reconcile(store, req);
                explicit_written += !before || !(to_json(*before) == to_json(after));
            } catch (const ReviewError& e) {
                throw ReviewError("script line " + std::to_string(n) + ": " + e.what());
            }
        }
        a = auto_reconcile(store);
    }
    return json{{"written", a.written + explicit_written},
                {"disagreements", a.disagreements},
                {"incomplete", a.incomplete.size()},
                {"phase", to_string(store.phase())}};
}

json summary_json(const ReportSummary& s, const fs::path& dir) {
    json files = json::array();
    for (const fs::path& f : s.files) files.push_back(f.generic_string());
    return json{{"dir", dir.string()}, {"files", files}, {"written", s.written}};
}

json cmd_report(const CliConfig& c) {
    if (!c.verdicts.empty()) {
        if (c.out_dir.empty()) throw UsageError("report --verdicts needs --out DIR");
        ReportInput input;
        input.title = fs::path(c.verdicts).stem().string();
        input.rows = load_verdict_fixture(c.verdicts);
        return summary_json(emit_report(input, c.out_dir), c.out_dir);
    }
    CampaignStore store = CampaignStore::open(campaign_dir(c), CampaignStore::Access::Write);
    json j = summary_json(emit_campaign_report(store), store.report_dir());
    j["phase"] = to_string(store.phase());
    return j;
}

struct SelfTest {
    std::string name;
    bool ok;
    std::string detail;
};

std::vector<SelfTest> self_tests() {
    std::vector<SelfTest> out;
    auto add = [&](std::string name, bool ok, std::string detail) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };
    stats::ContingencyTable t;
    t.row_labels = {"SF", "SC", "MC", "MT"};
    t.counts = {{62, 19}, {27, 54}, {23, 58}, {14, 67}};
    const stats::StatResult chi = stats::chi_square(t);
    add("chi_square_complexity",
        std::fabs(chi.statistic - 69.04) < 0.05 && *chi.df == 3 && chi.p_value < 0.001 &&
            std::fabs(*chi.effect_size - 0.462) < 0.005,
        "statistic " + stats::format_fixed(chi.statistic, 3) + ", V " + stats::format_fixed(*chi.effect_size, 4));

    const stats::Confusion c{{{121, 5}, {6, 192}}};
    const double k = stats::cohens_kappa(c), pa = 100.0 * stats::percent_agreement(c);
    add("cohens_kappa", std::fabs(k - 0.928) < 0.005 && std::fabs(pa - 96.6) < 0.1,
        "kappa " + stats::format_fixed(k, 4) + ", agreement " + stats::format_fixed(pa, 2) + "%");

    bool crit_ok = true;
    std::string crit;
    for (auto [df, x] : {std::pair{1, 3.84}, std::pair{2, 5.99}, std::pair{3, 7.81}}) {
        const double p = stats::chi_square_sf(x, df);
        crit_ok = crit_ok && std::fabs(p - 0.05) < 5e-4;
        crit += (crit.empty() ? "" : ", ") + std::to_string(df) + ":" + stats::format_fixed(p, 5);
    }
    add("chi_square_critical_values", crit_ok, crit);

    const stats::StatResult u = stats::mann_whitney_u({1, 2, 3}, {4, 5, 6});
    add("mann_whitney_exact", u.statistic == 0.0 && std::fabs(u.p_value - 0.1) < 1e-12,
        "U " + stats::format_fixed(u.statistic, 1) + ", p " + stats::format_fixed(u.p_value, 4));

    add("rate_formatting", stats::format_rate(74, 150) == "49.3%" && stats::format_pp(128, 150, 74, 150) == "+36.0pp",
        stats::format_rate(74, 150) + " " + stats::format_pp(128, 150, 74, 150));
    return out;
}

int cmd_verify(const CliConfig& c, std::ostream& out, std::ostream& err) {
    json result;
    int status = kOk;
    if (!c.campaign_dir.empty()) {
        const CampaignStore store = CampaignStore::open(c.campaign_dir, CampaignStore::Access::Read);
        const IntegrityReport r = store.integrity_check();
        result["integrity"] = r.to_json();
        if (!r.ok()) status = kIntegrity;
    }
    json tests = json::array();
    for (const SelfTest& t : self_tests()) {
        tests.push_back({{"name", t.name}, {"ok", t.ok}, {"detail", t.detail}});
        if (!t.ok && status == kOk) status = kInternal;
    }
    result["self_tests"] = tests;
    out << result.dump() << "\n";
    if (status == kIntegrity)
        err << "error: " << json{{"code", "integrity_error"}, {"message", "integrity check found problems"}}.dump()
            << "\n";
    else if (status != kOk)
        err << "error: " << json{{"code", "self_test_failed"}, {"message", "a statistics self-test failed"}}.dump()
            << "\n";
    return status;
}

int cmd_serve(const CliConfig& c, std::ostream& out) {
    CampaignStore store = CampaignStore::open(campaign_dir(c), CampaignStore::Access::Write);
    std::optional<fs::path> static_dir;
    if (!c.static_dir.empty()) static_dir = fs::path(c.static_dir);
    ReviewServer server(store, static_dir);
    const int port = server.bind(c.host, c.port);
    out << json{{"campaign", store.id()}, {"listening", "http://" + c.host + ":" + std::to_string(port)}}.dump()
        << std::endl;
    server.listen();
    return kOk;
}

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
    err << "error: " << json{{"code", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CliConfig c;
    CLI::App app{"Mutation-based evaluation of code summaries", "mutsum"};
    app.require_subcommand(1);
    app.add_option("-C,--campaign", c.campaign_dir, "Campaign directory");

    auto* ingest = app.add_subcommand("ingest", "Create a campaign from a corpus");
    ingest->add_option("--corpus", c.corpus, "Directory of .py files, or a JSONL file with --jsonl")->required();
    ingest->add_flag("--jsonl", c.jsonl, "Corpus is a JSONL file");
    ingest->add_option("--fields", c.fields, "JSONL key map, e.g. id=task_id,source=solution");
    ingest->add_option("--origin", c.origin, "synthetic, corpus or custom (directory corpora)");
    ingest->add_option("--id", c.id, "Campaign id (default: directory name)");
    ingest->add_option("--quota", c.quota, "Mutation quota recorded for later stages");
    ingest->add_option("--seed", c.seed, "Mutation seed recorded for later stages");

    auto* mutate = app.add_subcommand("mutate", "Generate mutants");
    mutate->add_option("--quota", c.quota, "Per-cell count or type:bucket=n list");
    mutate->add_option("--seed", c.seed, "Seed for site selection");
    mutate->add_option("--runner", c.runner, "Smoke-check command, {file} is the program path");
    mutate->add_option("--runner-input", c.runner_input, "File fed on stdin to the smoke check");
    mutate->add_option("--runner-timeout-ms", c.runner_timeout_ms, "Smoke-check timeout");

    auto* summarize = app.add_subcommand("summarize", "Summarize programs and mutants");
    summarize->add_option("--settings", c.settings, "Provider settings JSON");
    summarize->add_option("--replay", c.replay, "Replay fixture (cache directory or JSONL); no network");
    summarize->add_option("--parallelism", c.parallelism, "Requests in flight");

    auto* review = app.add_subcommand("review", "Judge mutants in the terminal");
    review->add_option("--rater", c.rater, "Rater id")->required();
    review->add_flag("--blind", c.blind, "Hide the code diff");
    review->add_option("--script", c.script, "Apply decisions from a file instead of prompting");

    auto* serve = app.add_subcommand("serve", "Serve the review API");
    serve->add_option("--host", c.host, "Bind address");
    serve->add_option("--port", c.port, "Port (0 picks a free one)");
    serve->add_option("--static", c.static_dir, "Directory of UI assets served at /");

    auto* rec = app.add_subcommand("reconcile", "Reconcile verdicts across raters");
    rec->add_option("--script", c.script, "Explicit decisions, one per line");
    rec->add_option("--resolver", c.resolver, "Resolver id for scripted decisions");
    rec->add_flag("--force", c.force, "Allow overriding unanimous labels");

    auto* report = app.add_subcommand("report", "Emit report, tables and figure data");
    report->add_option("--verdicts", c.verdicts, "JSONL verdict fixture instead of a campaign");
    report->add_option("--out", c.out_dir, "Output directory for --verdicts");

    auto* verify = app.add_subcommand("verify", "Integrity check and statistics self-tests");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        print_error(err, "usage", e.what());
        return kUsage;
    }

    try {
        json result;
        if (ingest->parsed()) result = cmd_ingest(c);
        else if (mutate->parsed()) result = cmd_mutate(c);
        else if (summarize->parsed()) result = cmd_summarize(c);
        else if (review->parsed()) result = cmd_review(c, in, out);
        else if (rec->parsed()) result = cmd_reconcile(c);
        else if (report->parsed()) result = cmd_report(c);
        else if (verify->parsed()) return cmd_verify(c, out, err);
        else if (serve->parsed()) return cmd_serve(c, out);
        out << result.dump() << "\n";
        return kOk;
    } catch (const IntegrityError& e) {
        json gaps = e.gaps();
        err << "error: " << json{{"code", e.code()}, {"message", e.what()}, {"gaps", gaps}}.dump() << "\n";
        return kIntegrity;
    } catch (const Error& e) {
        print_error(err, e.code(), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        print_error(err, "internal_error", e.what());
        return kInternal;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace mutsum::cli
