#pragma once

// Strict reading helpers shared by the file formats: every object is checked
// against a closed key set and every error names the JSON path.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "innodiff/error.hpp"

namespace innodiff::detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Schema, path + ": " + what);
}

inline Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Schema, what + ": " + e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

inline std::string join_path(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

inline std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

/// Rejects non-objects and keys outside `allowed`.
inline void expect_object(const Json& j, const std::string& path,
                          std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) schema_error(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      schema_error(join_path(path, it.key()), "unknown field");
    }
  }
}

inline const Json& require(const Json& j, std::string_view key, const std::string& path) {
  auto it = j.find(std::string(key));
  if (it == j.end()) schema_error(join_path(path, key), "missing required field");
  return *it;
}

inline double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) schema_error(path, "expected a finite number");
  return x;
}

inline long long as_integer(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) {
      return static_cast<long long>(x);
    }
  }
  schema_error(path, "expected an integer");
}

inline std::uint64_t as_seed(const Json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(j.get<long long>());
  }
  schema_error(path, "expected a non-negative integer seed");
}

inline bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) schema_error(path, "expected true or false");
  return j.get<bool>();
}

inline std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

inline const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array");
  return j;
}

inline std::vector<double> number_array(const Json& j, const std::string& path,
                                        std::ptrdiff_t expected_size = -1) {
  as_array(j, path);
  if (expected_size >= 0 && std::ssize(j) != expected_size) {
    schema_error(path, "expected " + std::to_string(expected_size) + " entries, got " +
                           std::to_string(j.size()));
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], index_path(path, i)));
  return out;
}

inline std::vector<std::string> string_array(const Json& j, const std::string& path) {
  as_array(j, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], index_path(path, i)));
  return out;
}

}  // namespace innodiff::detail
