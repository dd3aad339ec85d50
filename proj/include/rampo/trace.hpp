#pragma once

#include <map>
#include <string>
#include <vector>

#include "rampo/errors.hpp"

namespace rampo {

// Uniformly sampled multi-channel signal over steps 0..H.
struct Trace {
  double dt = 1.0;
  int horizon = 0;
  std::map<std::string, std::vector<double>> channels;
  // Realized controller path per step (closed loop) or extracted path
  // sequence; empty when not applicable.
  std::vector<int> paths;

  std::size_t length() const { return static_cast<std::size_t>(horizon) + 1; }

  const std::vector<double>& channel(const std::string& name) const {
    auto it = channels.find(name);
    if (it == channels.end()) throw UnknownChannel("trace has no channel '" + name + "'");
    return it->second;
  }
  bool has(const std::string& name) const { return channels.count(name) > 0; }
  double at(const std::string& name, int t) const { return channel(name).at(static_cast<std::size_t>(t)); }

  bool operator==(const Trace&) const = default;
};

}  // namespace rampo
