#pragma once

// Private helpers shared by the JSON (de)serializers.

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "falsify/error.hpp"
#include "json.hpp"

namespace falsify::detail {

using json = nlohmann::json;

inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

// Wraps nlohmann access errors (missing keys, wrong types) into ParseError.
template <typename Fn>
auto with_parse_errors(std::string_view what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed: " + path);
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

// Canonical text: sorted keys (nlohmann's default map), 2-space indent, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace falsify::detail
