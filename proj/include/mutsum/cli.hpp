#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mutsum::cli {

/// Exit statuses; each failure class has its own.
enum Exit : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,      ///< bad flags or settings
    kPhase = 3,      ///< phase_violation
    kIntegrity = 4,  ///< integrity_error or verify findings
    kInput = 5,      ///< io, parse, ingest and fixture errors
    kProvider = 6,   ///< transport, replay miss, context overflow, failed summaries
    kReview = 7,     ///< review and statistics errors
    kStore = 8,      ///< store errors, e.g. the campaign is locked by another process
};

/// Maps an Error code string to its exit status.
int exit_code_for(const std::string& error_code);

/// `args` excludes the program name. Results go to `out` as one JSON line;
/// failures print `error: {"code":..,"message":..}` on `err`. `in` feeds the
/// interactive reviewer.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace mutsum::cli
