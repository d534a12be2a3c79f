#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace mutsum::fsutil {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);

/// Points inside atomic_write at which a fault hook is consulted.
enum class WriteStage { TempPartial, TempWritten, Renamed };

/// Test seam: the hook may throw to simulate a crash at that stage.
using FaultHook = std::function<void(WriteStage, const fs::path&)>;
void set_fault_hook(FaultHook hook);

/// Write-then-rename. Readers observe the old or the new content, never a
/// torn file. Returns false (and touches nothing) when the file already holds
/// exactly `content`.
bool atomic_write(const fs::path& path, std::string_view content);

nlohmann::json read_json(const fs::path& path);
bool write_json(const fs::path& path, const nlohmann::json& value);

/// Leftover temp files from interrupted writes.
bool is_temp_file(const fs::path& path);

}  // namespace mutsum::fsutil
