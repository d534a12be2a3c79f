#include "support/campaign_fixture.hpp"

#include <unistd.h>

#include "mutsum/fsutil.hpp"
#include "mutsum/pipeline.hpp"
#include "support/paths.hpp"

namespace mutsum::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("mutsum-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
}

Completion StubProvider::complete(const nlohmann::json&, const std::string& key) {
    ++calls_;
    Completion c;
    c.text = "The code does thing " + key.substr(0, 12) + ".";
    c.transport_meta.attempts = 1;
    c.created_at = "2025-01-01T00:00:00Z";
    return c;
}

ProviderConfig stub_config() {
    ProviderConfig c;
    c.provider_name = "stub";
    return c;
}

std::vector<Program> demo_programs() {
    return ingest_directory(demo_corpus_dir(), Origin::Synthetic).programs;
}

CampaignStore demo_campaign(const fs::path& dir, Phase target) {
    CampaignConfig config;
    config.id = "demo";
    CampaignStore store = CampaignStore::init(dir, config, demo_programs());
    if (target == Phase::Ingested) return store;
    run_mutate(store, "1", 7);
    if (target == Phase::Mutated) return store;
    StubProvider provider;
    run_summarize(store, stub_config(), provider, 2);
    return store;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || fsutil::is_temp_file(e.path()) || e.path().filename() == ".lock") continue;
        out[fs::relative(e.path(), dir).string()] = fsutil::read_file(e.path());
    }
    return out;
}

}  // namespace mutsum::testing
