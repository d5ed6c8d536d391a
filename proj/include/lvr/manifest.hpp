#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lvr {

// Provenance record written atomically next to every output file; carries
// everything needed to re-run the command bit-exactly plus digests of the
// files it produced.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;   // fully resolved key -> value
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::string engine_version;
    std::string started_at;    // ISO 8601 UTC
    std::string finished_at;

    struct Output {
        std::string path;
        std::string digest;    // fnv1a64, hex
    };
    std::vector<Output> outputs;
};

std::string digest_hex(const std::string& bytes);

// Write-to-temp + rename. Returns the digest of the written bytes.
std::string write_file_atomic(const std::string& path, const std::string& bytes);

std::string manifest_to_json(const RunManifest& m);
void write_manifest(const std::string& path, const RunManifest& m);

std::string iso8601_utc_now();

} // namespace lvr
