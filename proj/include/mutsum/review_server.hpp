#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "mutsum/campaign_store.hpp"

namespace mutsum {

/// JSON review API over one campaign:
///
///     GET  /campaigns
///     GET  /campaigns/{id}/next?rater=..&blind=0|1
///     POST /campaigns/{id}/verdicts
///     GET  /campaigns/{id}/agreement?a=..&b=..
///     POST /campaigns/{id}/reconcile       explicit request, or {"auto": true}
///     GET  /campaigns/{id}/progress
///
/// Errors come back as {"error": {"code", "message"}}. Writes are serialized;
/// handlers keep no state between requests beyond the campaign directory.
class ReviewServer {
public:
    /// `static_dir`, when given, is served at "/" (the browser UI bundle).
    ReviewServer(CampaignStore& store, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    /// Binds and returns the port (port 0 picks a free one).
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();
    void wait_until_ready();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mutsum
