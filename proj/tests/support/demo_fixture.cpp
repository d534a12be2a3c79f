#include "support/demo_fixture.hpp"

#include <algorithm>
#include <sstream>

#include "mutsum/cli.hpp"
#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"
#include "mutsum/summary_client.hpp"
#include "support/paths.hpp"

namespace mutsum::testing {

namespace fs = std::filesystem;
using nlohmann::json;

std::string replay_fixture_jsonl(const CampaignStore& store, const ProviderConfig& config, const fs::path& texts) {
    const json t = fsutil::read_json(texts);
    std::map<std::string, std::string> code;
    for (const Program& p : store.programs()) code[p.id] = p.source_text;
    for (const Mutant& m : store.mutants()) code[m.id] = m.mutated_source;
    std::string out;
    for (const auto& [subject, source] : code) {
        if (!t.contains(subject)) throw FixtureError("no summary text for " + subject);
        const std::string prompt = build_prompt(source);
        json line{{"cache_key", cache_key(config.model_id, prompt, source)},
                  {"model_id", config.model_id},
                  {"prompt_text", prompt},
                  {"subject_ref", subject},
                  {"summary_text", t[subject].get<std::string>()},
                  {"created_at", kFixtureTimestamp}};
        out += line.dump() + "\n";
    }
    return out;
}

StageRun run_cli(const std::vector<std::string>& args, const std::string& input) {
    std::istringstream in(input);
    std::ostringstream out, err;
    StageRun r;
    r.args = args;
    r.status = cli::run(args, in, out, err);
    r.err = err.str();
    const std::string text = out.str();
    if (std::count(text.begin(), text.end(), '\n') == 1) r.result = json::parse(text, nullptr, false);
    if (r.result.is_discarded()) r.result = nullptr;
    return r;
}

std::vector<std::vector<std::string>> demo_stages(const fs::path& dir) {
    const std::string d = dir.string();
    const fs::path demo = demo_dir();
    return {
        {"-C", d, "ingest", "--corpus", demo_corpus_dir().string(), "--origin", "synthetic", "--id", "demo",
         "--quota", "1", "--seed", "7"},
        {"-C", d, "mutate"},
        {"-C", d, "summarize", "--settings", (demo / "settings.json").string(), "--replay",
         (demo / "summaries.jsonl").string(), "--parallelism", "3"},
        {"-C", d, "review", "--rater", "alice", "--script", (demo / "raters" / "alice.txt").string()},
        {"-C", d, "review", "--rater", "bob", "--script", (demo / "raters" / "bob.txt").string()},
        {"-C", d, "reconcile"},
        {"-C", d, "reconcile", "--script", (demo / "reconcile.txt").string(), "--resolver", "lead"},
        {"-C", d, "report"},
    };
}

void demo_pipeline(const fs::path& dir, const std::string& last) {
    for (const auto& args : demo_stages(dir)) {
        const StageRun r = run_cli(args);
        if (r.status != 0)
            throw Error("demo_pipeline", args[2] + " exited " + std::to_string(r.status) + ": " + r.err);
        if (args[2] == last) return;
    }
}

std::vector<std::string> compare_with_goldens(const fs::path& report_dir) {
    const fs::path golden = fixtures_dir() / "demo_report";
    std::map<std::string, fs::path> want, got;
    for (const auto& e : fs::recursive_directory_iterator(golden))
        if (e.is_regular_file()) want[fs::relative(e.path(), golden).generic_string()] = e.path();
    if (fs::exists(report_dir))
        for (const auto& e : fs::recursive_directory_iterator(report_dir))
            if (e.is_regular_file() && !fsutil::is_temp_file(e.path()))
                got[fs::relative(e.path(), report_dir).generic_string()] = e.path();
    std::vector<std::string> out;
    for (const auto& [rel, path] : want) {
        const auto it = got.find(rel);
        if (it == got.end()) out.push_back("missing " + rel);
        else if (fsutil::read_file(it->second) != fsutil::read_file(path)) out.push_back("differs " + rel);
    }
    for (const auto& [rel, path] : got)
        if (!want.count(rel)) out.push_back("extra " + rel);
    return out;
}

}  // namespace mutsum::testing
