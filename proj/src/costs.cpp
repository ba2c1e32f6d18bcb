#include "lsp/costs.hpp"

#include <cmath>
#include <queue>

namespace lsp {

std::vector<std::uint8_t> known_free_mask(const PartialMap& map) {
    std::vector<std::uint8_t> m(map.occupancy_grid().size());
    const auto& occ = map.occupancy_grid().data();
    for (size_t i = 0; i < occ.size(); ++i) m[i] = occ[i] == kFree;
    return m;
}

std::vector<std::uint8_t> optimistic_mask(const PartialMap& map) {
    std::vector<std::uint8_t> m(map.occupancy_grid().size());
    const auto& occ = map.occupancy_grid().data();
    for (size_t i = 0; i < occ.size(); ++i) m[i] = occ[i] != kOccupied;
    return m;
}

std::vector<std::uint8_t> env_free_mask(const GroundTruthEnvironment& env) {
    std::vector<std::uint8_t> m(env.occupancy.size());
    const auto& occ = env.occupancy.data();
    for (size_t i = 0; i < occ.size(); ++i) m[i] = occ[i] == 0;
    return m;
}

std::vector<std::uint8_t> inflated_known_free_mask(const PartialMap& map,
                                                   std::span<const Cell> keep) {
    std::vector<std::uint8_t> m = known_free_mask(map);
    const int w = map.width(), h = map.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!m[static_cast<size_t>(y) * w + x]) continue;
            for (Cell d : kNeighbors8) {
                const Cell n{x + d.x, y + d.y};
                if (map.in_bounds(n) && map.occupancy(n) == kOccupied) {
                    m[static_cast<size_t>(y) * w + x] = 0;
                    break;
                }
            }
        }
    }
    for (Cell c : keep)
        if (map.in_bounds(c) && map.free(c)) m[static_cast<size_t>(c.y) * w + c.x] = 1;
    return m;
}

DistanceField dijkstra_field(int width, int height, double resolution,
                             std::vector<std::uint8_t> traversable,
                             std::span<const Cell> sources) {
    if (sources.empty()) throw std::invalid_argument("dijkstra_field: no sources");
    DistanceField f;
    f.width = width;
    f.height = height;
    f.resolution = resolution;
    f.traversable = std::move(traversable);
    f.dist.assign(static_cast<size_t>(width) * height, kInfCost);
    f.sources.assign(sources.begin(), sources.end());

    using QItem = std::pair<double, int>;  // (distance, flat index)
    std::priority_queue<QItem, std::vector<QItem>, std::greater<>> pq;
    // Distances are reconstructed from integer step counts so a geodesic and
    // its reverse produce bit-identical values regardless of summation order.
    std::vector<std::int32_t> cardinal(f.dist.size(), 0), diagonal(f.dist.size(), 0);
    const double card = resolution;
    const double diag = resolution * kSqrt2;
    auto value_of = [&](std::int32_t k, std::int32_t m) { return k * card + m * diag; };

    for (Cell s : sources) {
        if (!f.in_bounds(s) || !f.traversable_at(s))
            throw std::invalid_argument("dijkstra_field: non-traversable source");
        f.dist[static_cast<size_t>(s.y) * width + s.x] = 0.0;
        pq.emplace(0.0, s.y * width + s.x);
    }

    auto trav = [&](int x, int y) {
        return static_cast<unsigned>(x) < static_cast<unsigned>(width) &&
               static_cast<unsigned>(y) < static_cast<unsigned>(height) &&
               f.traversable[static_cast<size_t>(y) * width + x];
    };
    while (!pq.empty()) {
        const auto [d, i] = pq.top();
        pq.pop();
        if (d > f.dist[i]) continue;
        const int x = i % width, y = i / width;
        for (Cell nd : kNeighbors8) {
            const int nx = x + nd.x, ny = y + nd.y;
            if (!trav(nx, ny)) continue;
            const bool is_diag = nd.x != 0 && nd.y != 0;
            if (is_diag && (!trav(x + nd.x, y) || !trav(x, y + nd.y))) continue;
            const size_t ni = static_cast<size_t>(ny) * width + nx;
            const double cand = value_of(cardinal[i] + !is_diag, diagonal[i] + is_diag);
            if (cand < f.dist[ni]) {
                f.dist[ni] = cand;
                cardinal[ni] = cardinal[i] + !is_diag;
                diagonal[ni] = diagonal[i] + is_diag;
                pq.emplace(cand, static_cast<int>(ni));
            }
        }
    }
    return f;
}

DistanceField distance_field(const PartialMap& map, std::span<const Cell> sources) {
    return dijkstra_field(map.width(), map.height(), map.resolution(), known_free_mask(map),
                          sources);
}

double known_distance(const PartialMap& map, Cell from, Cell to) {
    if (!map.in_bounds(from) || !map.in_bounds(to)) return kInfCost;
    if (!map.free(from) || !map.free(to)) return kInfCost;
    if (from == to) return 0.0;
    const Cell src[1] = {from};
    return distance_field(map, src).at(to);
}

DistanceTable pairwise_subgoal_distances(const PartialMap& map, const Pose& pose,
                                         std::span<const Frontier> frontiers) {
    const int n = static_cast<int>(frontiers.size()) + 1;
    std::vector<Cell> nodes(n);
    nodes[0] = map.cell_of(pose.position());
    for (int i = 1; i < n; ++i) nodes[i] = frontiers[i - 1].centroid;

    DistanceTable table;
    table.n = n;
    table.d.assign(static_cast<size_t>(n) * n, kInfCost);
    const auto mask = known_free_mask(map);
    for (int i = 0; i < n; ++i) {
        const Cell src[1] = {nodes[i]};
        const DistanceField f =
            dijkstra_field(map.width(), map.height(), map.resolution(), mask, src);
        for (int j = 0; j < n; ++j) table.at(i, j) = f.at(nodes[j]);
    }
    return table;
}

std::vector<Cell> extract_path(const DistanceField& field, Cell start) {
    std::vector<Cell> path;
    if (!field.in_bounds(start) || !field.reachable(start)) return path;
    Cell cur = start;
    path.push_back(cur);
    size_t guard = field.dist.size() + 1;
    while (field.at(cur) > 0.0 && guard-- > 0) {
        Cell best = cur;
        double best_d = field.at(cur);
        for (Cell d : kNeighbors8) {
            const Cell n{cur.x + d.x, cur.y + d.y};
            if (!field.in_bounds(n) || !field.traversable_at(n)) continue;
            if (d.x != 0 && d.y != 0) {
                if (!field.traversable_at({cur.x + d.x, cur.y}) ||
                    !field.traversable_at({cur.x, cur.y + d.y}))
                    continue;
            }
            const double nd = field.at(n);
            if (nd < best_d ||
                (nd == best_d && best != cur && std::tie(n.y, n.x) < std::tie(best.y, best.x))) {
                best_d = nd;
                best = n;
            }
        }
        if (best == cur) break;  // local minimum (cannot happen on a Dijkstra field)
        cur = best;
        path.push_back(cur);
    }
    return path;
}

PrimitiveAction next_action(std::span<const Cell> path, const Pose& pose, double resolution,
                            int lookahead) {
    if (path.empty()) return PrimitiveAction::Stop;
    const size_t wp_index = std::min<size_t>(std::max(lookahead, 0), path.size() - 1);
    const Cell wp = path[wp_index];
    const Point target{(wp.x + 0.5) * resolution, (wp.y + 0.5) * resolution};
    const double dx = target.x - pose.x, dy = target.y - pose.y;
    if (std::abs(dx) < 1e-12 && std::abs(dy) < 1e-12) return PrimitiveAction::Forward;
    const double bearing = std::atan2(dy, dx) / kDegToRad;
    const double err = wrap_angle(bearing - pose.heading_deg);
    if (std::abs(err) <= kHeadingGateDeg + 1e-9) return PrimitiveAction::Forward;
    return err > 0 ? PrimitiveAction::TurnRight : PrimitiveAction::TurnLeft;
}

}  // namespace lsp
