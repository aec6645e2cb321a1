#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lvlmc {

/// FNV-1a 64-bit digest of a byte string.
std::uint64_t fnv1a(const std::string& bytes);

/// FNV-1a digest of a file's contents.
std::uint64_t digest_file(const std::string& path);

/// Audit record for one CLI run: what was configured, what came out.
/// Timings make runs comparable, so the manifest itself is excluded from
/// byte-identity checks between reruns.
struct RunManifest {
    std::string tool_version;
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<std::pair<std::string, std::uint64_t>> files;  // path, digest

    void add_file(const std::string& path);
    void write(const std::string& path) const;
};

}  // namespace lvlmc
