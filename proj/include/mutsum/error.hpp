#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mutsum {

/// Base of every error raised by the harness. `code()` is a stable,
/// machine-readable tag that the CLI prints and maps to an exit status.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error("io_error", m) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& m) : Error("parse_error", m) {}
};

class IngestError : public Error {
public:
    explicit IngestError(const std::string& m) : Error("ingest_error", m) {}
};

class MutationError : public Error {
public:
    explicit MutationError(const std::string& m) : Error("mutation_error", m) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& m) : Error("config_error", m) {}
};

/// Raised after the retry budget is spent. Carries one line per attempt.
class TransportError : public Error {
public:
    TransportError(const std::string& m, std::vector<std::string> attempts)
        : Error("transport_error", m), attempts_(std::move(attempts)) {}

    const std::vector<std::string>& attempts() const noexcept { return attempts_; }

private:
    std::vector<std::string> attempts_;
};

class ContextOverflowError : public Error {
public:
    explicit ContextOverflowError(const std::string& m) : Error("context_overflow", m) {}
};

class ReplayMissError : public Error {
public:
    explicit ReplayMissError(const std::string& key)
        : Error("replay_miss", "no fixture entry for cache key " + key), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class FixtureError : public Error {
public:
    explicit FixtureError(const std::string& m) : Error("fixture_error", m) {}
};

class PhaseError : public Error {
public:
    explicit PhaseError(const std::string& m) : Error("phase_violation", m) {}
};

class IntegrityError : public Error {
public:
    IntegrityError(const std::string& m, std::vector<std::string> gaps)
        : Error("integrity_error", m), gaps_(std::move(gaps)) {}

    const std::vector<std::string>& gaps() const noexcept { return gaps_; }

private:
    std::vector<std::string> gaps_;
};

class StoreError : public Error {
public:
    explicit StoreError(const std::string& m) : Error("store_error", m) {}
};

class ReviewError : public Error {
public:
    explicit ReviewError(const std::string& m) : Error("review_error", m) {}
};

class StatsError : public Error {
public:
    explicit StatsError(const std::string& m) : Error("stats_error", m) {}
};

}  // namespace mutsum
