#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lsp/mapping.hpp"

namespace lsp {

// A maximal 8-connected set of known-free cells that touch unknown space.
// These are the planner's high-level action set.
struct Frontier {
    std::vector<Cell> cells;  // sorted by (y, x)
    Cell centroid;            // member cell nearest the arithmetic mean
    std::uint64_t id = 0;     // stable hash of the sorted cell set
};

// A frontier cell is free with at least one unknown 4-neighbor; grouping uses
// 8-connectivity. Result is sorted by id.
std::vector<Frontier> extract_frontiers(const PartialMap& map);

// Keeps frontiers whose centroid is reachable from the pose's cell through
// known-free space (8-connected, no corner cutting).
std::vector<Frontier> filter_reachable(std::vector<Frontier> frontiers, const PartialMap& map,
                                       const Pose& pose);

// Drops frontiers smaller than min_cells (raycast artifacts the robot cannot
// pass through).
std::vector<Frontier> filter_min_size(std::vector<Frontier> frontiers, int min_cells = 3);

std::uint64_t frontier_hash(const std::vector<Cell>& sorted_cells);

// Map text dump with one letter per frontier, for debugging.
void dump_frontiers(const PartialMap& map, const std::vector<Frontier>& frontiers,
                    std::ostream& os);

}  // namespace lsp
