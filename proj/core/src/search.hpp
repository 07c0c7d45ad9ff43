#pragma once

// Search engine behind generate_pattern. Not installed.

#include <cstdint>
#include <vector>

#include "afia/atpg.hpp"

namespace afia::detail {

struct SearchResult {
  AtpgStatus status = AtpgStatus::Undetectable;
  std::vector<Logic3> pi;
  /// Values of all key inputs as the search left them; the target holds its
  /// activating value.
  std::vector<Logic3> keys;
  std::uint64_t backtracks = 0;
};

SearchResult run_search(const Circuit& c, std::size_t target_key, Polarity polarity, const KeyBits& constraints,
                        const AtpgOptions& opts);

}  // namespace afia::detail
