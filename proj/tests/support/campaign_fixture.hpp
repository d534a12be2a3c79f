#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include "mutsum/campaign_store.hpp"
#include "mutsum/summary_client.hpp"

namespace mutsum::testing {

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag = "t");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

/// Offline provider whose text depends only on the cache key.
class StubProvider final : public SummaryProvider {
public:
    Completion complete(const nlohmann::json& payload, const std::string& key) override;
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    std::atomic<std::size_t> calls_{0};
};

ProviderConfig stub_config();

std::vector<Program> demo_programs();

/// Demo campaign at `dir`, driven up to `target` (Ingested, Mutated or
/// Summarized) with quota 1 and seed 7.
CampaignStore demo_campaign(const std::filesystem::path& dir, Phase target);

/// Every regular file below `dir` (temp leftovers and the lock file excluded),
/// relative path -> content.
std::map<std::string, std::string> snapshot(const std::filesystem::path& dir);

}  // namespace mutsum::testing
