#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>

namespace briee::io {

using json = nlohmann::json;

// Strict-parse helper: every config object rejects keys it does not know so a
// typo'd field fails loudly instead of silently falling back to a default.
template <class Allowed>
void check_json_keys(const json& j, const Allowed& allowed, const std::string& context) {
  if (!j.is_object())
    throw std::invalid_argument("config: " + context + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const auto& k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " + context);
  }
}

template <class T>
void get_if_present(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace briee::io
