#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fibertap/io/trace_file.hpp"

namespace fibertap {

inline constexpr const char* tool_version = "0.1.0";

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string version = tool_version;
  std::vector<std::pair<std::string, double>> stage_timings;  // seconds
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    nlohmann::json timings = nlohmann::json::array();
    for (const auto& [stage, seconds] : stage_timings) timings.push_back({{"stage", stage}, {"seconds", seconds}});
    return {{"command", command}, {"config_digest", config_digest}, {"seed", seed}, {"tool_version", version},
            {"stage_timings", timings}, {"inputs", inputs}, {"outputs", outputs}};
  }

  // Times one stage and records it under `stage`.
  template <typename F>
  decltype(auto) timed(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      RunManifest& m;
      const std::string& stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        m.stage_timings.emplace_back(
            stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
    } record{*this, stage, start};
    return std::forward<F>(f)();
  }
};

inline std::filesystem::path manifest_path(const std::filesystem::path& output) {
  auto p = output;
  p += ".manifest.json";
  return p;
}

inline void write_manifest(const std::filesystem::path& output, const RunManifest& m) {
  io::write_json(manifest_path(output), m.to_json());
}

}  // namespace fibertap
