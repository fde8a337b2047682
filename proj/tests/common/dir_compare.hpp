#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

namespace falsify::testing {

// Relative path -> file contents for every regular file under root. report.json has its
// wall_time_s field zeroed, since that is the only non-deterministic output.
inline std::map<std::string, std::string> snapshot_campaign(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    const auto rel = std::filesystem::relative(e.path(), root).generic_string();
    if (rel == "report.json") {
      auto j = nlohmann::json::parse(text);
      j["wall_time_s"] = 0.0;
      text = j.dump(2);
    }
    out[rel] = std::move(text);
  }
  return out;
}

}  // namespace falsify::testing
