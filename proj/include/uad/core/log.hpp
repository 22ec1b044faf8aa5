#ifndef UAD_CORE_LOG_HPP
#define UAD_CORE_LOG_HPP

#include <functional>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

namespace uad {

/// Structured event sink. Events are JSON objects with at least "event".
using Logger = std::function<void(const nlohmann::json&)>;

inline Logger null_logger() {
  return [](const nlohmann::json&) {};
}

/// One JSON object per line on stderr.
inline Logger stderr_logger() {
  return [](const nlohmann::json& j) { std::cerr << j.dump() << '\n'; };
}

inline nlohmann::json event(const std::string& name) { return {{"event", name}}; }

}  // namespace uad

#endif  // UAD_CORE_LOG_HPP
