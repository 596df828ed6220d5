#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/rng.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace kexpfam {

/// 64-bit FNV-1a over the canonical (sorted-key) JSON dump, so the hash is
/// stable under field reordering and changes iff a value changes.
inline std::string config_hash(const nlohmann::json& j) {
  uint64_t h = detail::fnv1a64(j.dump());
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

/// Run metadata written next to every command's outputs. Timings make the
/// manifest non-deterministic by design; the data outputs it lists are the
/// reproducible artifacts.
struct RunManifest {
  std::string command_line;
  std::string config_hash_hex;
  uint64_t seed = 0;
  std::string version = "kexpfam 1.0.0";
  std::vector<std::pair<std::string, double>> timings_sec;
  std::vector<std::string> outputs;

  void add_timing(const std::string& phase, double seconds) {
    timings_sec.emplace_back(phase, seconds);
  }

  void write(const std::string& path) const {
    nlohmann::json j;
    j["command_line"] = command_line;
    j["config_hash"] = config_hash_hex;
    j["seed"] = seed;
    j["version"] = version;
    nlohmann::json timings;
    for (const auto& [phase, sec] : timings_sec) timings[phase] = sec;
    j["timings_sec"] = timings;
    j["outputs"] = outputs;
    std::ofstream out(path);
    if (!out) throw ResourceError("RunManifest: cannot open " + path);
    out << j.dump(2) << '\n';
  }
};

}  // namespace kexpfam
