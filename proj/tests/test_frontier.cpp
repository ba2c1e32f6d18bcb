#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <set>

#include "doctest.h"
#include "lsp/frontier.hpp"
#include "test_util.hpp"

using namespace lsp;
using namespace testutil;

namespace {

// Independent centroid rule: arithmetic mean snapped to the nearest member,
// ties to the lowest (row, col).
Cell centroid_oracle(const std::vector<Cell>& cells) {
    double mx = 0, my = 0;
    for (const Cell& c : cells) {
        mx += c.x;
        my += c.y;
    }
    mx /= cells.size();
    my /= cells.size();
    Cell best{-1, -1};
    double best_d = kInfCost;
    for (const Cell& c : cells) {
        const double d = (c.x - mx) * (c.x - mx) + (c.y - my) * (c.y - my);
        if (d < best_d - 1e-12 ||
            (std::abs(d - best_d) <= 1e-12 && std::tie(c.y, c.x) < std::tie(best.y, best.x))) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("a fully known map has no frontiers") {
    const PartialMap map = map_from_rows({
        "#####",
        "#...#",
        "#...#",
        "#####",
    });
    CHECK(extract_frontiers(map).empty());
}

TEST_CASE("a single unrevealed doorway produces one frontier spanning it") {
    const PartialMap map = map_from_rows({
        "#########",
        "#.......#",
        "#.......#",
        "#.......#",
        "###???###",
        "?????????",
    });
    const auto frontiers = extract_frontiers(map);
    REQUIRE(frontiers.size() == 1);
    // The free cells above the 3-cell unknown gap.
    CHECK(frontiers[0].cells == std::vector<Cell>{{3, 3}, {4, 3}, {5, 3}});
    CHECK(frontiers[0].centroid == Cell{4, 3});
}

TEST_CASE("extraction matches the brute-force definition on random tri-state grids") {
    std::mt19937_64 rng(900);
    for (int trial = 0; trial < 1000; ++trial) {
        const PartialMap map = random_tristate(rng, 32, 32);
        const auto frontiers = extract_frontiers(map);
        std::vector<std::vector<Cell>> got;
        std::set<Cell> all_cells;
        for (const Frontier& f : frontiers) {
            got.push_back(f.cells);
            CHECK(f.id == frontier_hash(f.cells));
            CHECK(f.centroid == centroid_oracle(f.cells));
            for (const Cell& c : f.cells) {
                const bool fresh = all_cells.insert(c).second;
                CHECK(fresh);  // partition: no cell in two frontiers
            }
        }
        std::sort(got.begin(), got.end());
        CHECK(got == frontier_groups_oracle(map));
    }
}

TEST_CASE("extraction order and ids are stable") {
    std::mt19937_64 rng(7);
    const PartialMap map = random_tristate(rng, 32, 32);
    const auto a = extract_frontiers(map);
    const auto b = extract_frontiers(map);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].cells == b[i].cells);
        if (i > 0) CHECK(a[i - 1].id < a[i].id);
    }
}

TEST_CASE("reachability filter keeps exactly the flood-reachable centroids") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> coord(0, 27);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const PartialMap map = random_tristate(rng, 28, 28);
        const Cell start{coord(rng), coord(rng)};
        if (!map.free(start)) continue;
        ++checked;
        const Pose pose{map.center_of(start).x, map.center_of(start).y, 0};
        const auto frontiers = extract_frontiers(map);
        const auto kept = filter_reachable(frontiers, map, pose);
        const Grid<std::uint8_t> reach = flood_known_free(map, start);
        std::set<std::uint64_t> kept_ids;
        for (const Frontier& f : kept) kept_ids.insert(f.id);
        for (const Frontier& f : frontiers)
            CHECK(kept_ids.count(f.id) == static_cast<size_t>(reach.at(f.centroid) ? 1 : 0));
    }
    CHECK(checked > 100);
}

TEST_CASE("frontier behind an unbroken known wall is filtered out") {
    const PartialMap map = map_from_rows({
        "#########",
        "#...#..??",
        "#...#..??",
        "#########",
    });
    const auto frontiers = extract_frontiers(map);
    REQUIRE(frontiers.size() == 1);
    const Pose pose{map.center_of({1, 1}).x, map.center_of({1, 1}).y, 0};
    CHECK(filter_reachable(frontiers, map, pose).empty());
}

TEST_CASE("minimum size filter") {
    const PartialMap map = map_from_rows({
        "########",
        "#.#....#",
        "#?#....#",
        "###???##",
    });
    auto frontiers = extract_frontiers(map);
    std::vector<size_t> sizes;
    for (const Frontier& f : frontiers) sizes.push_back(f.cells.size());
    std::sort(sizes.begin(), sizes.end());
    REQUIRE(sizes.size() == 2);
    CHECK(sizes[0] == 1);
    CHECK(sizes[1] == 3);
    CHECK(filter_min_size(frontiers, 3).size() == 1);
    CHECK(filter_min_size(frontiers, 3)[0].cells.size() == 3);
    CHECK(filter_min_size(frontiers, 1).size() == frontiers.size());
    CHECK(filter_min_size(frontiers, 4).empty());
}
