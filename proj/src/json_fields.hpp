#ifndef POCS_SRC_JSON_FIELDS_HPP
#define POCS_SRC_JSON_FIELDS_HPP

#include <nlohmann/json.hpp>

#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "pocs/config_error.hpp"

namespace pocs::detail {

template <class T>
T number_at(const nlohmann::json& j, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw ConfigError(path, "expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (!j.is_number_unsigned()) throw ConfigError(path, "expected a nonnegative integer");
    }
  } else {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
  }
  return j.get<T>();
}

template <class T>
void read_optional(const nlohmann::json& j, const char* key, const std::string& path, T& out) {
  if (j.contains(key)) out = number_at<T>(j.at(key), path + "/" + key);
}

inline const nlohmann::json& required(const nlohmann::json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "/" + key, "required field is missing");
  return j.at(key);
}

inline std::string string_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

template <class E>
E enum_from(const nlohmann::json& j, const std::string& path, const std::vector<std::pair<const char*, E>>& names) {
  const std::string s = string_at(j, path);
  for (const auto& [name, value] : names)
    if (s == name) return value;
  std::string allowed;
  for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw ConfigError(path, "unknown value \"" + s + "\" (expected one of " + allowed + ")");
}

inline void check_schema(const nlohmann::json& j, const char* schema) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  const nlohmann::json& s = required(j, "schema", "");
  if (!s.is_string() || s.get<std::string>() != schema)
    throw ConfigError("/schema", std::string("expected \"") + schema + "\"");
}

}  // namespace pocs::detail

#endif  // POCS_SRC_JSON_FIELDS_HPP
