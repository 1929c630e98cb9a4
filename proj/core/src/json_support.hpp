#pragma once

// Internal glue between nlohmann::json and the public types. Kept out of the
// installed headers so the vendored json.hpp stays an implementation detail.

#include <json.hpp>
#include <string>

#include "diffnet/network.hpp"

namespace diffnet::detail {

// `key` prefixes error paths, e.g. "scenario.network".
NetworkDocument network_from_json_obj(const nlohmann::json& j,
                                      const std::string& key);
nlohmann::json network_to_json_obj(const NetworkDocument& doc);

}  // namespace diffnet::detail
