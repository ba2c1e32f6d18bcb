#pragma once
// Shared oracles for the test suites. Everything here is implemented
// independently of the library code it checks: brute-force relaxation,
// flood fills, union-find grouping, permutation enumeration, dense ray
// marching.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "lsp/estimator.hpp"
#include "lsp/gridworld.hpp"
#include "lsp/mapping.hpp"

namespace testutil {

using namespace lsp;

// --- Bellman-Ford relaxation over the 8-connected no-corner-cut metric ----

inline std::vector<double> bellman_ford(int w, int h, double res,
                                        const std::vector<std::uint8_t>& trav,
                                        const std::vector<Cell>& sources) {
    std::vector<double> d(static_cast<size_t>(w) * h, kInfCost);
    auto at = [&](int x, int y) -> double& { return d[static_cast<size_t>(y) * w + x]; };
    auto ok = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < w && y < h && trav[static_cast<size_t>(y) * w + x];
    };
    for (const Cell& s : sources) at(s.x, s.y) = 0.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!ok(x, y) || at(x, y) >= kInfCost) continue;
                for (const Cell& nd : kNeighbors8) {
                    const int nx = x + nd.x, ny = y + nd.y;
                    if (!ok(nx, ny)) continue;
                    if (nd.x != 0 && nd.y != 0 && (!ok(x + nd.x, y) || !ok(x, y + nd.y))) continue;
                    const double step = (nd.x != 0 && nd.y != 0) ? res * kSqrt2 : res;
                    if (at(x, y) + step < at(nx, ny) - 1e-15) {
                        at(nx, ny) = at(x, y) + step;
                        changed = true;
                    }
                }
            }
        }
    }
    return d;
}

// --- Flood fill over known-free cells (corner rule) -----------------------

inline Grid<std::uint8_t> flood_known_free(const PartialMap& map, Cell start) {
    Grid<std::uint8_t> seen(map.width(), map.height(), 0);
    if (!map.in_bounds(start) || !map.free(start)) return seen;
    std::vector<Cell> stack{start};
    seen.at(start) = 1;
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (const Cell& nd : kNeighbors8) {
            const Cell n{c.x + nd.x, c.y + nd.y};
            if (!map.in_bounds(n) || seen.at(n) || !map.free(n)) continue;
            if (nd.x != 0 && nd.y != 0 &&
                (!map.free({c.x + nd.x, c.y}) || !map.free({c.x, c.y + nd.y})))
                continue;
            seen.at(n) = 1;
            stack.push_back(n);
        }
    }
    return seen;
}

// --- Union-find frontier oracle -------------------------------------------

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Groups of frontier cells by the per-cell definition (free with an unknown
// 4-neighbor) joined under 8-connectivity; each group sorted by (y, x) and
// the list of groups sorted lexicographically.
inline std::vector<std::vector<Cell>> frontier_groups_oracle(const PartialMap& map) {
    const int w = map.width(), h = map.height();
    std::vector<int> cell_to_slot(static_cast<size_t>(w) * h, -1);
    std::vector<Cell> frontier_cells;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!map.free({x, y})) continue;
            bool touches_unknown = false;
            for (const Cell& d : kNeighbors4) {
                const Cell n{x + d.x, y + d.y};
                if (map.in_bounds(n) && map.occupancy(n) == kUnknown) touches_unknown = true;
            }
            if (touches_unknown) {
                cell_to_slot[static_cast<size_t>(y) * w + x] = static_cast<int>(frontier_cells.size());
                frontier_cells.push_back({x, y});
            }
        }
    }
    Dsu dsu(static_cast<int>(frontier_cells.size()));
    for (size_t i = 0; i < frontier_cells.size(); ++i) {
        const Cell c = frontier_cells[i];
        for (const Cell& d : kNeighbors8) {
            const Cell n{c.x + d.x, c.y + d.y};
            if (!map.in_bounds(n)) continue;
            const int j = cell_to_slot[static_cast<size_t>(n.y) * w + n.x];
            if (j >= 0) dsu.unite(static_cast<int>(i), j);
        }
    }
    std::vector<std::vector<Cell>> groups(frontier_cells.size());
    for (size_t i = 0; i < frontier_cells.size(); ++i)
        groups[dsu.find(static_cast<int>(i))].push_back(frontier_cells[i]);
    std::vector<std::vector<Cell>> out;
    for (auto& g : groups) {
        if (g.empty()) continue;
        std::sort(g.begin(), g.end(),
                  [](const Cell& a, const Cell& b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// --- Dense ray marching line-of-sight --------------------------------------

// True when no sampled point lies strictly inside an occupied cell. Points on
// a grid line belong to no cell interior, so corner and edge grazes pass.
inline bool dense_los(const GroundTruthEnvironment& env, Point a, Point b, double step = 0.004) {
    const double len = euclid(a, b);
    const int n = std::max(2, static_cast<int>(std::ceil(len / step)));
    const Cell target = env.cell_of(b);
    const double res = env.resolution;
    constexpr double kBoundaryEps = 1e-9;
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        const Point p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        const double fx = p.x - std::floor(p.x / res) * res;
        const double fy = p.y - std::floor(p.y / res) * res;
        if (fx < kBoundaryEps || fx > res - kBoundaryEps || fy < kBoundaryEps ||
            fy > res - kBoundaryEps)
            continue;  // on or next to a grid line: interior of no cell
        const Cell c = env.cell_of(p);
        if (c == target) continue;
        if (!env.in_bounds(c) || env.occupied(c)) return false;
    }
    return true;
}

// --- Ordering-enumeration oracle for the expected-cost recursion ----------

struct OracleSubgoal {
    double p_s = 0, r_s = 0, r_e = 0;
};

// Cost of committing to a fixed ordering: each failure pays the exploration
// cost and moves on; exhausting the list costs the terminal penalty.
inline double chain_cost(int from_node, const std::vector<int>& order, size_t k,
                         const std::vector<std::vector<double>>& dist,
                         const std::vector<OracleSubgoal>& props, double terminal) {
    if (k == order.size()) return terminal;
    const int a = order[k];
    const OracleSubgoal& p = props[a];
    return dist[from_node][a + 1] + p.p_s * p.r_s +
           (1.0 - p.p_s) * (p.r_e + chain_cost(a + 1, order, k + 1, dist, props, terminal));
}

// Q(a) by brute force: best ordering of the remaining subgoals after a.
inline double brute_force_q(int a, int n, const std::vector<std::vector<double>>& dist,
                            const std::vector<OracleSubgoal>& props, double terminal) {
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
        if (i != a) rest.push_back(i);
    std::sort(rest.begin(), rest.end());
    double best_tail = kInfCost;
    if (rest.empty()) {
        best_tail = terminal;
    } else {
        do {
            best_tail = std::min(best_tail, chain_cost(a + 1, rest, 0, dist, props, terminal));
        } while (std::next_permutation(rest.begin(), rest.end()));
    }
    const OracleSubgoal& p = props[a];
    return dist[0][a + 1] + p.p_s * p.r_s + (1.0 - p.p_s) * (p.r_e + best_tail);
}

// --- Random structures ------------------------------------------------------

// Tri-state map with independent per-cell states.
inline PartialMap random_tristate(std::mt19937_64& rng, int w, int h, double p_unknown = 0.35,
                                  double p_occupied = 0.2) {
    PartialMap map(w, h, 0.05, 5);
    Observation obs;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> sem(0, 5);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double r = u(rng);
            if (r < p_unknown) continue;
            const bool occ = r < p_unknown + p_occupied;
            obs.revealed.push_back(
                {{x, y}, static_cast<std::uint8_t>(occ), static_cast<std::uint16_t>(sem(rng))});
        }
    }
    map.integrate(obs);
    return map;
}

// Random 8-connected blob: union of random rectangles, largest component kept.
inline std::vector<Cell> random_blob(std::mt19937_64& rng, int w, int h, int n_rects = 6) {
    Grid<std::uint8_t> img(w, h, 0);
    std::uniform_int_distribution<int> ux(0, w - 1), uy(0, h - 1), us(1, std::max(2, w / 4));
    for (int i = 0; i < n_rects; ++i) {
        const int x0 = ux(rng), y0 = uy(rng), rw = us(rng), rh = us(rng);
        for (int y = y0; y < std::min(h, y0 + rh); ++y)
            for (int x = x0; x < std::min(w, x0 + rw); ++x) img.at(x, y) = 1;
    }
    // Largest 8-connected component.
    Grid<int> comp(w, h, -1);
    std::vector<std::vector<Cell>> comps;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!img.at(x, y) || comp.at(x, y) >= 0) continue;
            std::vector<Cell> cells{{x, y}};
            comp.at(x, y) = static_cast<int>(comps.size());
            for (size_t i = 0; i < cells.size(); ++i) {
                for (const Cell& d : kNeighbors8) {
                    const Cell n{cells[i].x + d.x, cells[i].y + d.y};
                    if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h) continue;
                    if (img.at(n) && comp.at(n) < 0) {
                        comp.at(n) = static_cast<int>(comps.size());
                        cells.push_back(n);
                    }
                }
            }
            comps.push_back(std::move(cells));
        }
    }
    if (comps.empty()) return {{w / 2, h / 2}};
    size_t best = 0;
    for (size_t i = 1; i < comps.size(); ++i)
        if (comps[i].size() > comps[best].size()) best = i;
    return comps[best];
}

// --- Topology counters -------------------------------------------------------

inline int count_components8(const std::vector<Cell>& cells) {
    if (cells.empty()) return 0;
    int min_x = cells[0].x, max_x = cells[0].x, min_y = cells[0].y, max_y = cells[0].y;
    for (const Cell& c : cells) {
        min_x = std::min(min_x, c.x);
        max_x = std::max(max_x, c.x);
        min_y = std::min(min_y, c.y);
        max_y = std::max(max_y, c.y);
    }
    const int w = max_x - min_x + 1, h = max_y - min_y + 1;
    Grid<std::uint8_t> img(w, h, 0);
    for (const Cell& c : cells) img.at(c.x - min_x, c.y - min_y) = 1;
    Grid<std::uint8_t> seen(w, h, 0);
    int components = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!img.at(x, y) || seen.at(x, y)) continue;
            ++components;
            std::vector<Cell> stack{{x, y}};
            seen.at(x, y) = 1;
            while (!stack.empty()) {
                const Cell c = stack.back();
                stack.pop_back();
                for (const Cell& d : kNeighbors8) {
                    const Cell n{c.x + d.x, c.y + d.y};
                    if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h) continue;
                    if (img.at(n) && !seen.at(n)) {
                        seen.at(n) = 1;
                        stack.push_back(n);
                    }
                }
            }
        }
    }
    return components;
}

// Holes: 4-connected background components not reaching the padded border.
inline int count_holes4(const std::vector<Cell>& cells) {
    if (cells.empty()) return 0;
    int min_x = cells[0].x, max_x = cells[0].x, min_y = cells[0].y, max_y = cells[0].y;
    for (const Cell& c : cells) {
        min_x = std::min(min_x, c.x);
        max_x = std::max(max_x, c.x);
        min_y = std::min(min_y, c.y);
        max_y = std::max(max_y, c.y);
    }
    const int w = max_x - min_x + 3, h = max_y - min_y + 3;  // 1-cell pad all around
    Grid<std::uint8_t> img(w, h, 0);
    for (const Cell& c : cells) img.at(c.x - min_x + 1, c.y - min_y + 1) = 1;
    Grid<std::uint8_t> seen(w, h, 0);
    std::vector<Cell> stack{{0, 0}};
    seen.at(0, 0) = 1;
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (const Cell& d : kNeighbors4) {
            const Cell n{c.x + d.x, c.y + d.y};
            if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h) continue;
            if (!img.at(n) && !seen.at(n)) {
                seen.at(n) = 1;
                stack.push_back(n);
            }
        }
    }
    int holes = 0;
    Grid<std::uint8_t> hole_seen(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (img.at(x, y) || seen.at(x, y) || hole_seen.at(x, y)) continue;
            ++holes;
            std::vector<Cell> stack2{{x, y}};
            hole_seen.at(x, y) = 1;
            while (!stack2.empty()) {
                const Cell c = stack2.back();
                stack2.pop_back();
                for (const Cell& d : kNeighbors4) {
                    const Cell n{c.x + d.x, c.y + d.y};
                    if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h) continue;
                    if (!img.at(n) && !seen.at(n) && !hole_seen.at(n)) {
                        hole_seen.at(n) = 1;
                        stack2.push_back(n);
                    }
                }
            }
        }
    }
    return holes;
}

// --- Hand-built environments -----------------------------------------------

// Empty room with a closed boundary ring.
inline GroundTruthEnvironment make_empty_env(int w, int h, double res = 0.05, int n_cat = 5) {
    GroundTruthEnvironment env;
    env.width = w;
    env.height = h;
    env.resolution = res;
    env.num_categories = n_cat;
    env.occupancy = Grid<std::uint8_t>(w, h, 0);
    env.semantic = Grid<std::uint16_t>(w, h, 0);
    env.id = "test-empty";
    for (int x = 0; x < w; ++x) {
        env.occupancy.at(x, 0) = 1;
        env.occupancy.at(x, h - 1) = 1;
    }
    for (int y = 0; y < h; ++y) {
        env.occupancy.at(0, y) = 1;
        env.occupancy.at(w - 1, y) = 1;
    }
    return env;
}

// PartialMap from a character sketch: '#' occupied, '.' free, '?' unknown.
inline PartialMap map_from_rows(const std::vector<std::string>& rows, double res = 0.05,
                                int n_cat = 5) {
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows[0].size());
    for (const std::string& r : rows)
        if (static_cast<int>(r.size()) != w) throw std::invalid_argument("ragged sketch row");
    PartialMap map(w, h, res, n_cat);
    Observation obs;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (rows[y][x] == '?') continue;
            obs.revealed.push_back({{x, y}, rows[y][x] == '#', 0});
        }
    map.integrate(obs);
    return map;
}

// Environment from a character sketch: '#' occupied, anything else free.
inline GroundTruthEnvironment env_from_rows(const std::vector<std::string>& rows,
                                            double res = 0.05, int n_cat = 5) {
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows[0].size());
    for (const std::string& r : rows)
        if (static_cast<int>(r.size()) != w) throw std::invalid_argument("ragged sketch row");
    GroundTruthEnvironment env = make_empty_env(w, h, res, n_cat);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) env.occupancy.at(x, y) = rows[y][x] == '#';
    env.id = "test-sketch";
    return env;
}

}  // namespace testutil
