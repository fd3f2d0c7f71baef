#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "memrl/errors.hpp"

namespace memrl::detail {

using nlohmann::json;

// Rejects keys outside `allowed`; ctx names the object in the message.
template <typename E>
void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& ctx) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw E(ctx + ": unknown key \"" + key + "\"");
  }
}

template <typename T, typename E>
T get_required(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.contains(key)) throw E(ctx + ": missing key \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw E(ctx + ": bad value for \"" + std::string(key) + "\": " + e.what());
  }
}

template <typename T, typename E>
T get_optional(const json& obj, const char* key, T fallback, const std::string& ctx) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw E(ctx + ": bad value for \"" + std::string(key) + "\": " + e.what());
  }
}

}  // namespace memrl::detail
