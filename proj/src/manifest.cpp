#include "sepvote/manifest.hpp"

#include <algorithm>
#include <vector>

#include <json.hpp>

#include "sepvote/error.hpp"
#include "sepvote/psv_io.hpp"
#include "sepvote/version.hpp"

namespace sepvote {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string digest_hex(std::uint64_t digest) {
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[digest & 0xf];
        digest >>= 4;
    }
    return out;
}

std::string digest_file(const std::filesystem::path& path) {
    return digest_hex(fnv1a64(read_text_file(path)));
}

std::string digest_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& f : files) {
        const std::string rel = f.lexically_relative(dir).generic_string();
        std::string chunk = rel;
        chunk.push_back('\0');
        chunk += read_text_file(f);
        const std::uint64_t piece = fnv1a64(chunk);
        for (int i = 0; i < 8; ++i) {
            h ^= (piece >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return digest_hex(h);
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["tool_version"] = tool_version.empty() ? std::string(kVersion) : tool_version;
    j["config"] = nlohmann::json::object();
    for (const auto& [key, value] : config) j["config"][key] = value;
    j["inputs"] = nlohmann::json::object();
    for (const auto& [key, value] : inputs) j["inputs"][key] = value;
    if (seed.has_value()) j["seed"] = *seed;
    return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    write_text_file(path, manifest.to_json());
}

} // namespace sepvote
