#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ttune {

struct CandidatePlan {
  std::vector<int> loop_order;  // 1-based axis ids, outermost first
  std::int64_t block_a = 0;     // tile extent on A's stride-1 axis (2nd axis when stride-1 is shared)
  std::int64_t block_b = 0;     // tile extent on the axis that is stride-1 in B
  int prefetch_distance = 0;
  bool streaming_stores = false;
  int micro_width = 1;

  std::int64_t micro_tiles_per_macro() const {
    if (micro_width < 1) return 0;
    return (block_a / micro_width) * (block_b / micro_width);
  }

  // "order=3,1,2;bA=32;bB=16;d=0;ss=0;w=8"
  std::string serialize() const;
  static CandidatePlan parse(const std::string& text);  // throws std::invalid_argument

  bool operator==(const CandidatePlan&) const = default;
};

}  // namespace ttune
