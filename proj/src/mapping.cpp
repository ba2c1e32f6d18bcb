#include "lsp/mapping.hpp"

#include <ostream>
#include <vector>

namespace lsp {

PartialMap::PartialMap(int width, int height, double resolution, int num_categories)
    : width_(width),
      height_(height),
      resolution_(resolution),
      num_categories_(num_categories),
      occ_(width, height, kUnknown),
      sem_(width, height, 0) {
    if (resolution <= 0.0) throw std::invalid_argument("PartialMap: bad resolution");
}

PartialMap PartialMap::for_environment(const GroundTruthEnvironment& env) {
    return PartialMap(env.width, env.height, env.resolution, env.num_categories);
}

void PartialMap::set_cell(Cell c, std::uint8_t occ, std::uint16_t sem) {
    std::uint8_t& slot = occ_.at(c);
    if (slot == kUnknown && occ != kUnknown) ++known_count_;
    if (slot != occ || sem_.at(c) != sem) ++revision_;
    slot = occ;
    sem_.at(c) = sem;
}

void PartialMap::integrate(const Observation& obs) {
    for (const RevealedCell& rc : obs.revealed)
        if (!in_bounds(rc.cell))
            throw std::out_of_range("integrate: observation cell outside map");
    for (const RevealedCell& rc : obs.revealed)
        set_cell(rc.cell, rc.occupied ? kOccupied : kFree, rc.semantic);
}

void PartialMap::mark_occupied(Cell c) {
    if (!in_bounds(c)) throw std::out_of_range("mark_occupied: cell outside map");
    set_cell(c, kOccupied, sem_.at(c));
}

bool goal_reachable_known(const PartialMap& map, const Pose& pose, Point goal) {
    const Cell start = map.cell_of(pose.position());
    const Cell target = map.cell_of(goal);
    if (!map.in_bounds(start) || !map.in_bounds(target)) return false;
    if (!map.free(start) || !map.free(target)) return false;
    if (start == target) return true;

    Grid<std::uint8_t> seen(map.width(), map.height(), 0);
    std::vector<Cell> stack{start};
    seen.at(start) = 1;
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (Cell d : kNeighbors8) {
            const Cell n{c.x + d.x, c.y + d.y};
            if (!map.in_bounds(n) || seen.at(n) || !map.free(n)) continue;
            if (d.x != 0 && d.y != 0) {
                if (!map.free({c.x + d.x, c.y}) || !map.free({c.x, c.y + d.y})) continue;
            }
            if (n == target) return true;
            seen.at(n) = 1;
            stack.push_back(n);
        }
    }
    return false;
}

void save_partial_map(const PartialMap& map, std::ostream& os) {
    os << map.width() << ' ' << map.height() << ' ' << map.resolution() << ' '
       << map.num_categories() << '\n';
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            const std::uint8_t v = map.occupancy({x, y});
            os << (v == kUnknown ? '?' : v == kOccupied ? '#' : '.');
        }
        os << '\n';
    }
    os << '\n';
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            if (x) os << ' ';
            os << map.semantic({x, y});
        }
        os << '\n';
    }
}

}  // namespace lsp
