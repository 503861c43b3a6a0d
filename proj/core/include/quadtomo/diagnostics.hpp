#pragma once

#include <string>
#include <vector>

namespace quadtomo {

// Non-fatal findings collected along a computation and surfaced by the caller.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const { return warnings.empty(); }
};

}  // namespace quadtomo
