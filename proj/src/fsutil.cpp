#include "mutsum/fsutil.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "mutsum/error.hpp"

namespace mutsum::fsutil {

namespace {

std::mutex g_hook_mutex;
FaultHook g_hook;
std::atomic<unsigned long> g_temp_counter{0};

void fire(WriteStage stage, const fs::path& path) {
    FaultHook hook;
    {
        std::lock_guard lock(g_hook_mutex);
        hook = g_hook;
    }
    if (hook) hook(stage, path);
}

void write_all(int fd, std::string_view data, const fs::path& path) {
    while (!data.empty()) {
        ssize_t n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("write failed for " + path.string() + ": " + std::strerror(errno));
        }
        data.remove_prefix(static_cast<size_t>(n));
    }
}

constexpr std::string_view kTempMarker = ".tmp~";

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void set_fault_hook(FaultHook hook) {
    std::lock_guard lock(g_hook_mutex);
    g_hook = std::move(hook);
}

bool atomic_write(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (fs::exists(path, ec)) {
        try {
            if (read_file(path) == content) return false;
        } catch (const IoError&) {
            // unreadable target is simply replaced
        }
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());

    fs::path tmp = path;
    tmp += std::string(kTempMarker) + std::to_string(::getpid()) + "." +
           std::to_string(g_temp_counter.fetch_add(1));

    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot create " + tmp.string() + ": " + std::strerror(errno));
    try {
        const size_t half = content.size() / 2;
        write_all(fd, content.substr(0, half), tmp);
        fire(WriteStage::TempPartial, path);
        write_all(fd, content.substr(half), tmp);
        if (::fsync(fd) != 0) throw IoError("fsync failed for " + tmp.string());
        ::close(fd);
        fd = -1;
        fire(WriteStage::TempWritten, path);
    } catch (...) {
        if (fd >= 0) ::close(fd);
        throw;
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
    fire(WriteStage::Renamed, path);
    return true;
}

nlohmann::json read_json(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

bool write_json(const fs::path& path, const nlohmann::json& value) {
    return atomic_write(path, value.dump(2) + "\n");
}

bool is_temp_file(const fs::path& path) {
    return path.filename().string().find(kTempMarker) != std::string::npos;
}

}  // namespace mutsum::fsutil
