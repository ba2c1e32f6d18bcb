#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lsp/frontier.hpp"
#include "lsp/mapping.hpp"

namespace lsp {

// Geodesic distances in meters over the 8-connected grid metric with step
// costs {res, res*sqrt(2)} and no corner cutting. Unreachable or
// non-traversable cells hold kInfCost.
struct DistanceField {
    int width = 0, height = 0;
    double resolution = 0.05;
    std::vector<double> dist;
    std::vector<std::uint8_t> traversable;
    std::vector<Cell> sources;

    double at(Cell c) const { return dist[static_cast<size_t>(c.y) * width + c.x]; }
    bool reachable(Cell c) const { return at(c) < kInfCost; }
    bool traversable_at(Cell c) const {
        return traversable[static_cast<size_t>(c.y) * width + c.x] != 0;
    }
    bool in_bounds(Cell c) const {
        return static_cast<unsigned>(c.x) < static_cast<unsigned>(width) &&
               static_cast<unsigned>(c.y) < static_cast<unsigned>(height);
    }
};

// Traversability masks (row-major, 1 = traversable).
std::vector<std::uint8_t> known_free_mask(const PartialMap& map);
std::vector<std::uint8_t> optimistic_mask(const PartialMap& map);  // unknown treated as free
std::vector<std::uint8_t> env_free_mask(const GroundTruthEnvironment& env);
// Known-free minus cells touching a known obstacle (1-cell clearance for the
// robot body). `keep` cells stay traversable regardless, so a target hugging
// a wall can still seed a field.
std::vector<std::uint8_t> inflated_known_free_mask(const PartialMap& map,
                                                   std::span<const Cell> keep = {});

// Exact multi-source Dijkstra. Throws std::invalid_argument when sources are
// empty or any source is non-traversable.
DistanceField dijkstra_field(int width, int height, double resolution,
                             std::vector<std::uint8_t> traversable,
                             std::span<const Cell> sources);

DistanceField distance_field(const PartialMap& map, std::span<const Cell> sources);

// Known-space geodesic between two cells; kInfCost when unreachable.
double known_distance(const PartialMap& map, Cell from, Cell to);

// Symmetric (n+1)x(n+1) table of known-space geodesics; index 0 is the robot
// pose, 1..n the frontier centroids.
struct DistanceTable {
    int n = 0;  // nodes = n (table is n x n)
    std::vector<double> d;
    double at(int i, int j) const { return d[static_cast<size_t>(i) * n + j]; }
    double& at(int i, int j) { return d[static_cast<size_t>(i) * n + j]; }
};

DistanceTable pairwise_subgoal_distances(const PartialMap& map, const Pose& pose,
                                         std::span<const Frontier> frontiers);

// Steepest-descent path from `start` to the nearest field source, inclusive.
// Empty when start is unreachable. Field values strictly decrease along the
// path and diagonal moves never cut corners.
std::vector<Cell> extract_path(const DistanceField& field, Cell start);

// Discrete pursuit of a path: bearing to the waypoint `lookahead` cells ahead;
// within 15 degrees of the heading drive forward, otherwise turn toward it
// (exact 180-degree ties turn left).
PrimitiveAction next_action(std::span<const Cell> path, const Pose& pose, double resolution,
                            int lookahead = 5);

inline constexpr double kHeadingGateDeg = 15.0;

}  // namespace lsp
