#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "lsp/costs.hpp"
#include "lsp/planner.hpp"
#include "test_util.hpp"

using namespace lsp;
using namespace testutil;

TEST_CASE("corridor distances advance by one cell step") {
    const PartialMap map = map_from_rows({
        "##########",
        "#........#",
        "##########",
    });
    const Cell src[1] = {{1, 1}};
    const DistanceField f = distance_field(map, src);
    for (int k = 0; k < 8; ++k)
        CHECK(f.at({1 + k, 1}) == doctest::Approx(k * 0.05).epsilon(1e-12));
}

TEST_CASE("diagonal neighbor costs res * sqrt(2)") {
    const PartialMap map = map_from_rows({
        "....",
        "....",
        "....",
    });
    const Cell src[1] = {{1, 1}};
    const DistanceField f = distance_field(map, src);
    CHECK(f.at({2, 2}) == doctest::Approx(0.05 * kSqrt2).epsilon(1e-12));
    CHECK(f.at({2, 2}) == doctest::Approx(0.070710678).epsilon(1e-6));
}

TEST_CASE("non-traversable source is rejected") {
    const PartialMap map = map_from_rows({
        "##",
        "#.",
    });
    const Cell src[1] = {{0, 0}};
    CHECK_THROWS_AS(distance_field(map, src), std::invalid_argument);
    CHECK_THROWS_AS(distance_field(map, std::span<const Cell>{}), std::invalid_argument);
}

TEST_CASE("dijkstra equals brute-force relaxation on random maps") {
    std::mt19937_64 rng(5150);
    for (int trial = 0; trial < 60; ++trial) {
        const int size = trial % 2 == 0 ? 20 : 32;
        const PartialMap map = random_tristate(rng, size, size, 0.2, 0.25);
        Cell src{-1, -1};
        for (int y = 0; y < size && src.x < 0; ++y)
            for (int x = 0; x < size && src.x < 0; ++x)
                if (map.free({x, y})) src = {x, y};
        if (src.x < 0) continue;
        const Cell sources[1] = {src};
        const DistanceField f = distance_field(map, sources);
        const auto oracle =
            bellman_ford(size, size, map.resolution(), known_free_mask(map), {src});
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double got = f.at({x, y});
                const double want = oracle[static_cast<size_t>(y) * size + x];
                if (want >= kInfCost) {
                    CHECK(got == kInfCost);
                } else {
                    CHECK(got == doctest::Approx(want).epsilon(1e-9));
                }
            }
    }
}

TEST_CASE("known_distance basics and exact symmetry") {
    const PartialMap walled = map_from_rows({
        "#######",
        "#..#..#",
        "#..#..#",
        "#######",
    });
    CHECK(known_distance(walled, {1, 1}, {1, 1}) == 0.0);
    CHECK(known_distance(walled, {1, 1}, {5, 1}) == kInfCost);

    std::mt19937_64 rng(808);
    std::uniform_int_distribution<int> coord(0, 23);
    int pairs = 0;
    while (pairs < 100) {
        const PartialMap map = random_tristate(rng, 24, 24, 0.2, 0.2);
        for (int k = 0; k < 5 && pairs < 100; ++k) {
            const Cell a{coord(rng), coord(rng)}, b{coord(rng), coord(rng)};
            if (!map.free(a) || !map.free(b)) continue;
            ++pairs;
            const double ab = known_distance(map, a, b);
            const double ba = known_distance(map, b, a);
            if (ab >= kInfCost) {
                CHECK(ba == kInfCost);
            } else {
                CHECK(ab == ba);  // bit-exact by integer step-count reconstruction
            }
        }
    }
}

TEST_CASE("pairwise table: shape, symmetry, per-source agreement") {
    const PartialMap map = map_from_rows({
        "#########",
        "#.......#",
        "#.??....#",
        "#.......#",
        "#########",
    });
    const Pose pose{map.center_of({1, 1}).x, map.center_of({1, 1}).y, 0};
    const auto frontiers = extract_frontiers(map);
    REQUIRE(frontiers.size() >= 1);

    const DistanceTable table = pairwise_subgoal_distances(map, pose, frontiers);
    const int n = static_cast<int>(frontiers.size()) + 1;
    REQUIRE(table.n == n);
    for (int i = 0; i < n; ++i) {
        CHECK(table.at(i, i) == 0.0);
        for (int j = 0; j < n; ++j) CHECK(table.at(i, j) == table.at(j, i));
    }
    if (frontiers.size() == 1) {
        CHECK(table.at(0, 1) ==
              known_distance(map, map.cell_of(pose.position()), frontiers[0].centroid));
    }
    // Independent per-source fields.
    std::vector<Cell> nodes{map.cell_of(pose.position())};
    for (const Frontier& f : frontiers) nodes.push_back(f.centroid);
    for (int i = 0; i < n; ++i) {
        const Cell src[1] = {nodes[i]};
        const DistanceField f = distance_field(map, src);
        for (int j = 0; j < n; ++j) CHECK(table.at(i, j) == f.at(nodes[j]));
    }
}

TEST_CASE("extract_path descends to the source without cutting corners") {
    const PartialMap map = map_from_rows({
        "##########",
        "#........#",
        "##########",
    });
    const Cell src[1] = {{8, 1}};
    const DistanceField f = distance_field(map, src);
    SUBCASE("start at source") {
        const auto path = extract_path(f, {8, 1});
        REQUIRE(path.size() == 1);
        CHECK(path[0] == Cell{8, 1});
    }
    SUBCASE("corridor path length equals the field value") {
        const auto path = extract_path(f, {1, 1});
        REQUIRE(path.size() == 8);
        CHECK((path.size() - 1) * 0.05 == doctest::Approx(f.at({1, 1})).epsilon(1e-12));
        CHECK(path.front() == Cell{1, 1});
        CHECK(path.back() == Cell{8, 1});
    }

    SUBCASE("random fields: strict descent, corner-free, ends at a source") {
        std::mt19937_64 rng(99);
        std::uniform_int_distribution<int> coord(0, 27);
        int checked = 0;
        for (int trial = 0; trial < 300 && checked < 100; ++trial) {
            const PartialMap rmap = random_tristate(rng, 28, 28, 0.2, 0.2);
            const Cell s{coord(rng), coord(rng)}, t{coord(rng), coord(rng)};
            if (!rmap.free(s) || !rmap.free(t)) continue;
            const Cell sources[1] = {t};
            const DistanceField rf = distance_field(rmap, sources);
            if (!rf.reachable(s)) continue;
            ++checked;
            const auto path = extract_path(rf, s);
            REQUIRE(!path.empty());
            CHECK(path.back() == t);
            for (size_t i = 1; i < path.size(); ++i) {
                CHECK(rf.at(path[i]) < rf.at(path[i - 1]));
                const int dx = path[i].x - path[i - 1].x, dy = path[i].y - path[i - 1].y;
                CHECK(std::abs(dx) <= 1);
                CHECK(std::abs(dy) <= 1);
                if (dx != 0 && dy != 0) {
                    CHECK(rmap.free({path[i - 1].x + dx, path[i - 1].y}));
                    CHECK(rmap.free({path[i - 1].x, path[i - 1].y + dy}));
                }
            }
        }
        CHECK(checked == 100);
    }

    SUBCASE("unreachable start yields no path") {
        const PartialMap rmap = map_from_rows({
            "#####",
            "#.#.#",
            "#####",
        });
        const Cell sources[1] = {{1, 1}};
        const DistanceField rf = distance_field(rmap, sources);
        CHECK(extract_path(rf, {3, 1}).empty());
    }
}

TEST_CASE("next_action pursuit rules") {
    const double res = 0.05;
    const Pose pose{0.525, 0.525, 0};  // center of cell (10, 10)
    SUBCASE("waypoint dead ahead: forward") {
        const std::vector<Cell> path{{10, 10}, {11, 10}, {12, 10}, {13, 10}, {14, 10}, {15, 10}};
        CHECK(next_action(path, pose, res) == PrimitiveAction::Forward);
    }
    SUBCASE("waypoint at heading+90: turn right") {
        const std::vector<Cell> path{{10, 10}, {10, 11}, {10, 12}, {10, 13}, {10, 14}, {10, 15}};
        CHECK(next_action(path, pose, res) == PrimitiveAction::TurnRight);
    }
    SUBCASE("waypoint at heading-90: turn left") {
        const std::vector<Cell> path{{10, 10}, {10, 9}, {10, 8}, {10, 7}, {10, 6}, {10, 5}};
        CHECK(next_action(path, pose, res) == PrimitiveAction::TurnLeft);
    }
    SUBCASE("exact 180-degree tie: turn left") {
        const std::vector<Cell> path{{10, 10}, {9, 10}, {8, 10}, {7, 10}, {6, 10}, {5, 10}};
        CHECK(next_action(path, pose, res) == PrimitiveAction::TurnLeft);
    }
    SUBCASE("short path uses its last cell as the waypoint") {
        const std::vector<Cell> path{{10, 10}, {11, 10}};
        CHECK(next_action(path, pose, res) == PrimitiveAction::Forward);
    }
    SUBCASE("15-degree gate boundary is forward") {
        // Waypoint bearing atan2(1, 5) = 11.3 degrees: inside the gate.
        const std::vector<Cell> path{{10, 10}, {11, 10}, {12, 10}, {13, 11}, {14, 11}, {15, 11}};
        CHECK(next_action(path, pose, res) == PrimitiveAction::Forward);
    }
}

TEST_CASE("replanned pursuit reaches any reachable goal within 4x the geodesic steps") {
    std::mt19937_64 rng(4242);
    int runs = 0;
    for (std::uint64_t seed = 1; runs < 100; ++seed) {
        const GroundTruthEnvironment env = generate_environment(seed);
        // Fully known belief map.
        PartialMap map = PartialMap::for_environment(env);
        Observation all;
        for (int y = 0; y < env.height; ++y)
            for (int x = 0; x < env.width; ++x)
                all.revealed.push_back({{x, y}, env.occupancy.at(x, y), env.semantic.at(x, y)});
        map.integrate(all);

        std::uniform_int_distribution<int> ux(1, env.width - 2), uy(1, env.height - 2);
        for (int ep = 0; ep < 4 && runs < 100; ++ep) {
            const Cell start{ux(rng), uy(rng)}, goal{ux(rng), uy(rng)};
            if (!env.free(start) || !env.free(goal)) continue;
            const double geodesic = known_distance(map, start, goal);
            if (geodesic >= kInfCost || geodesic < 0.5) continue;
            ++runs;
            const Point goal_m = env.center_of(goal);
            Pose pose{env.center_of(start).x, env.center_of(start).y, 0};
            const int budget =
                4 * (static_cast<int>(std::ceil(geodesic / kForwardStepM)) + 12);
            bool reached = false;
            LocalController controller;
            for (int t = 0; t < budget && !reached; ++t) {
                if (euclid(pose.position(), goal_m) <= 0.2) {
                    reached = true;
                    break;
                }
                const auto path = plan_local_path(map, map.cell_of(pose.position()), goal);
                REQUIRE(!path.empty());
                const PrimitiveAction a = controller.decide(map, pose, path);
                REQUIRE_FALSE(controller.exhausted());
                pose = step(env, pose, a).pose;
            }
            CHECK_MESSAGE(reached, "seed ", seed, " start (", start.x, ",", start.y, ") goal (",
                          goal.x, ",", goal.y, ") geodesic ", geodesic);
        }
    }
}
