// Usage: make_replay_fixture CAMPAIGN_DIR SETTINGS_JSON TEXTS_JSON OUT_JSONL

#include <iostream>

#include "mutsum/fsutil.hpp"
#include "mutsum/summary_client.hpp"
#include "support/demo_fixture.hpp"

int main(int argc, char** argv) {
    if (argc != 5) {
        std::cerr << "usage: make_replay_fixture CAMPAIGN_DIR SETTINGS_JSON TEXTS_JSON OUT_JSONL\n";
        return 2;
    }
    try {
        const auto store = mutsum::CampaignStore::open(argv[1]);
        const auto config = mutsum::provider_config_from_json(mutsum::fsutil::read_json(argv[2]));
        mutsum::fsutil::atomic_write(argv[4], mutsum::testing::replay_fixture_jsonl(store, config, argv[3]));
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
