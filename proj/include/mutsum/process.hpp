#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace mutsum::process {

struct RunResult {
    int exit_status = -1;   ///< exit code, or 128+signal when killed by a signal
    bool timed_out = false;
    std::string output;     ///< stdout followed by stderr
};

/// Runs argv[0] (PATH lookup) with `input` on stdin. The child is killed once
/// `timeout` elapses.
RunResult run(const std::vector<std::string>& argv, const std::string& input,
              std::chrono::milliseconds timeout);

}  // namespace mutsum::process
