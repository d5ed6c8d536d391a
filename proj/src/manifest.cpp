#include "lvr/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "lvr/hash.hpp"

namespace lvr {

std::string digest_hex(const std::string& bytes) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string write_file_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
    return digest_hex(bytes);
}

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["workers"] = m.workers;
    j["engine_version"] = m.engine_version;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& o : m.outputs) outs.push_back({{"path", o.path}, {"digest", o.digest}});
    j["outputs"] = outs;
    return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const RunManifest& m) {
    write_file_atomic(path, manifest_to_json(m));
}

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace lvr
