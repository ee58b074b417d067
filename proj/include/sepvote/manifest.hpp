#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace sepvote {

std::uint64_t fnv1a64(std::string_view bytes);

std::string digest_hex(std::uint64_t digest);

// FNV-1a over the file's bytes, as 16 hex digits.
std::string digest_file(const std::filesystem::path& path);

// Digest of a directory tree: per-file digests of relative path + contents,
// folded in sorted path order.
std::string digest_directory(const std::filesystem::path& dir);

// Everything needed to reproduce one CLI run. Deliberately carries no
// timestamps or host identity so reruns emit identical bytes.
struct RunManifest {
    std::string subcommand;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> inputs; // label -> digest
    std::string tool_version;
    std::optional<std::uint64_t> seed;

    std::string to_json() const;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

} // namespace sepvote
