#include "lsp/frontier.hpp"

#include <algorithm>
#include <ostream>

namespace lsp {

std::uint64_t frontier_hash(const std::vector<Cell>& sorted_cells) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const Cell& c : sorted_cells) {
        const std::uint32_t xy[2] = {static_cast<std::uint32_t>(c.x),
                                     static_cast<std::uint32_t>(c.y)};
        h = fnv1a64(xy, sizeof(xy), h);
    }
    return h;
}

namespace {

bool is_frontier_cell(const PartialMap& map, Cell c) {
    if (!map.free(c)) return false;
    for (Cell d : kNeighbors4) {
        const Cell n{c.x + d.x, c.y + d.y};
        if (map.in_bounds(n) && map.occupancy(n) == kUnknown) return true;
    }
    return false;
}

Cell snap_centroid(const std::vector<Cell>& cells) {
    double mx = 0, my = 0;
    for (const Cell& c : cells) {
        mx += c.x;
        my += c.y;
    }
    mx /= cells.size();
    my /= cells.size();
    Cell best = cells.front();
    double best_d = kInfCost;
    for (const Cell& c : cells) {
        const double d = (c.x - mx) * (c.x - mx) + (c.y - my) * (c.y - my);
        // Ties break toward the lowest (row, col); cells are sorted that way.
        if (d < best_d - 1e-12) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace

std::vector<Frontier> extract_frontiers(const PartialMap& map) {
    Grid<std::uint8_t> mark(map.width(), map.height(), 0);
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x)
            if (is_frontier_cell(map, {x, y})) mark.at(x, y) = 1;

    std::vector<Frontier> out;
    Grid<std::uint8_t> grouped(map.width(), map.height(), 0);
    std::vector<Cell> stack;
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            if (!mark.at(x, y) || grouped.at(x, y)) continue;
            Frontier f;
            grouped.at(x, y) = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Cell c = stack.back();
                stack.pop_back();
                f.cells.push_back(c);
                for (Cell d : kNeighbors8) {
                    const Cell n{c.x + d.x, c.y + d.y};
                    if (map.in_bounds(n) && mark.at(n) && !grouped.at(n)) {
                        grouped.at(n) = 1;
                        stack.push_back(n);
                    }
                }
            }
            std::sort(f.cells.begin(), f.cells.end(),
                      [](const Cell& a, const Cell& b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
            f.centroid = snap_centroid(f.cells);
            f.id = frontier_hash(f.cells);
            out.push_back(std::move(f));
        }
    }
    std::sort(out.begin(), out.end(), [](const Frontier& a, const Frontier& b) {
        return a.id != b.id ? a.id < b.id : a.cells < b.cells;
    });
    return out;
}

std::vector<Frontier> filter_reachable(std::vector<Frontier> frontiers, const PartialMap& map,
                                       const Pose& pose) {
    const Cell start = map.cell_of(pose.position());
    Grid<std::uint8_t> seen(map.width(), map.height(), 0);
    if (map.in_bounds(start) && map.free(start)) {
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
                seen.at(n) = 1;
                stack.push_back(n);
            }
        }
    }
    std::erase_if(frontiers, [&](const Frontier& f) { return !seen.at(f.centroid); });
    return frontiers;
}

std::vector<Frontier> filter_min_size(std::vector<Frontier> frontiers, int min_cells) {
    std::erase_if(frontiers, [&](const Frontier& f) {
        return static_cast<int>(f.cells.size()) < min_cells;
    });
    return frontiers;
}

void dump_frontiers(const PartialMap& map, const std::vector<Frontier>& frontiers,
                    std::ostream& os) {
    Grid<char> canvas(map.width(), map.height(), ' ');
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            const std::uint8_t v = map.occupancy({x, y});
            canvas.at(x, y) = v == kUnknown ? '?' : v == kOccupied ? '#' : '.';
        }
    for (size_t i = 0; i < frontiers.size(); ++i) {
        const char letter = static_cast<char>('a' + i % 26);
        for (const Cell& c : frontiers[i].cells) canvas.at(c) = letter;
        canvas.at(frontiers[i].centroid) = static_cast<char>('A' + i % 26);
    }
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) os << canvas.at(x, y);
        os << '\n';
    }
}

}  // namespace lsp
