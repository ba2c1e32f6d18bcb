#include "lsp/gridworld.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace lsp {

void GroundTruthEnvironment::validate() const {
    if (width <= 0 || height <= 0)
        throw std::runtime_error("environment: non-positive dimensions");
    if (resolution <= 0.0)
        throw std::runtime_error("environment: non-positive resolution");
    if (occupancy.width() != width || occupancy.height() != height ||
        semantic.width() != width || semantic.height() != height)
        throw std::runtime_error("environment: grid dimensions disagree");
    for (size_t i = 0; i < semantic.size(); ++i) {
        if (semantic[i] > num_categories)
            throw std::runtime_error("environment: semantic id out of range");
    }
    for (int x = 0; x < width; ++x) {
        if (!occupied({x, 0}) || !occupied({x, height - 1}))
            throw std::runtime_error("environment: boundary not closed");
    }
    for (int y = 0; y < height; ++y) {
        if (!occupied({0, y}) || !occupied({width - 1, y}))
            throw std::runtime_error("environment: boundary not closed");
    }
}

const char* to_string(PrimitiveAction a) {
    switch (a) {
        case PrimitiveAction::Forward: return "forward";
        case PrimitiveAction::TurnLeft: return "turn_left";
        case PrimitiveAction::TurnRight: return "turn_right";
        case PrimitiveAction::Stop: return "stop";
    }
    return "?";
}

bool pose_valid(const GroundTruthEnvironment& env, const Pose& pose) {
    Cell c = env.cell_of(pose.position());
    return env.in_bounds(c) && env.free(c) && pose.heading_deg % kTurnDeg == 0 &&
           pose.heading_deg >= 0 && pose.heading_deg < 360;
}

void trace_segment(Point a, Point b, double resolution,
                   const std::function<bool(Cell)>& visit, bool strict_corners) {
    const double res = resolution;
    Cell cur{static_cast<int>(std::floor(a.x / res)), static_cast<int>(std::floor(a.y / res))};
    const Cell end{static_cast<int>(std::floor(b.x / res)), static_cast<int>(std::floor(b.y / res))};
    if (!visit(cur)) return;
    if (cur == end) return;

    const double dx = b.x - a.x, dy = b.y - a.y;
    const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    // t parameterizes the segment on [0, 1].
    double t_max_x = kInfCost, t_max_y = kInfCost, t_dx = kInfCost, t_dy = kInfCost;
    if (step_x != 0) {
        const double edge = (cur.x + (step_x > 0 ? 1 : 0)) * res;
        t_max_x = (edge - a.x) / dx;
        t_dx = res / std::abs(dx);
    }
    if (step_y != 0) {
        const double edge = (cur.y + (step_y > 0 ? 1 : 0)) * res;
        t_max_y = (edge - a.y) / dy;
        t_dy = res / std::abs(dy);
    }

    constexpr double kTieEps = 1e-12;
    // Generous cap against float drift near the endpoint.
    int guard = std::abs(end.x - cur.x) + std::abs(end.y - cur.y) + 4;
    while (guard-- > 0) {
        if (std::abs(t_max_x - t_max_y) <= kTieEps) {
            // Exact corner crossing: the side cells share only a boundary
            // point with the segment.
            if (std::min(t_max_x, t_max_y) > 1.0) return;
            if (strict_corners) {
                if (!visit({cur.x + step_x, cur.y})) return;
                if (!visit({cur.x, cur.y + step_y})) return;
            }
            cur.x += step_x;
            cur.y += step_y;
            t_max_x += t_dx;
            t_max_y += t_dy;
        } else if (t_max_x < t_max_y) {
            if (t_max_x > 1.0) return;
            cur.x += step_x;
            t_max_x += t_dx;
        } else {
            if (t_max_y > 1.0) return;
            cur.y += step_y;
            t_max_y += t_dy;
        }
        if (!visit(cur)) return;
        if (cur == end) return;
    }
}

StepResult step(const GroundTruthEnvironment& env, const Pose& pose, PrimitiveAction action) {
    assert(pose_valid(env, pose));
    StepResult out{pose, false, std::nullopt};
    switch (action) {
        case PrimitiveAction::Stop:
            return out;
        case PrimitiveAction::TurnLeft:
            out.pose.heading_deg = wrap_heading(pose.heading_deg - kTurnDeg);
            return out;
        case PrimitiveAction::TurnRight:
            out.pose.heading_deg = wrap_heading(pose.heading_deg + kTurnDeg);
            return out;
        case PrimitiveAction::Forward:
            break;
    }
    const double rad = pose.heading_deg * kDegToRad;
    const Point from = pose.position();
    const Point to{from.x + kForwardStepM * std::cos(rad), from.y + kForwardStepM * std::sin(rad)};
    bool blocked = false;
    std::optional<Cell> blocker;
    trace_segment(from, to, env.resolution,
                  [&](Cell c) {
                      if (!env.in_bounds(c) || env.occupied(c)) {
                          blocked = true;
                          if (env.in_bounds(c)) blocker = c;
                          return false;
                      }
                      return true;
                  },
                  /*strict_corners=*/true);
    if (blocked) {
        out.collided = true;
        out.blocked_cell = blocker;
        return out;
    }
    out.pose.x = to.x;
    out.pose.y = to.y;
    return out;
}

Observation sense(const GroundTruthEnvironment& env, const Pose& pose,
                  double fov_deg, double max_range) {
    assert(pose_valid(env, pose));
    Observation obs;
    obs.sensor_pose = pose;

    const Point origin = pose.position();
    // Candidate cells from per-ray grid traversal, deduplicated in first-hit order.
    Grid<std::uint8_t> stamped(env.width, env.height, 0);
    std::vector<Cell> candidates;

    const int n_steps = std::max(1, static_cast<int>(std::ceil(fov_deg / 0.5)));
    const double ang_step = fov_deg / n_steps;
    const double ang0 = pose.heading_deg - fov_deg / 2.0;
    for (int k = 0; k <= n_steps; ++k) {
        const double rad = (ang0 + k * ang_step) * kDegToRad;
        const Point tip{origin.x + max_range * std::cos(rad), origin.y + max_range * std::sin(rad)};
        trace_segment(origin, tip, env.resolution, [&](Cell c) {
            if (!env.in_bounds(c)) return false;
            if (!stamped.at(c)) {
                stamped.at(c) = 1;
                candidates.push_back(c);
            }
            return !env.occupied(c);  // occupied cell terminates the ray
        });
    }

    obs.revealed.reserve(candidates.size());
    for (Cell c : candidates) {
        const Point center = env.center_of(c);
        if (euclid(center, origin) > max_range) continue;
        if (env.free(c)) {
            // Keep only cells whose center is reachable by an unobstructed
            // straight segment; ray traversal alone can graze past blockers.
            bool clear = true;
            trace_segment(origin, center, env.resolution, [&](Cell v) {
                if (v == c) return false;
                if (!env.in_bounds(v) || env.occupied(v)) {
                    clear = false;
                    return false;
                }
                return true;
            });
            if (!clear) continue;
        }
        obs.revealed.push_back({c, env.occupancy.at(c), env.semantic.at(c)});
    }
    return obs;
}

// ---------------------------------------------------------------------------
// Procedural generator
// ---------------------------------------------------------------------------

namespace {

void carve_rect(GroundTruthEnvironment& env, const Rect& r) {
    for (int y = std::max(1, r.y); y < std::min(env.height - 1, r.y + r.h); ++y)
        for (int x = std::max(1, r.x); x < std::min(env.width - 1, r.x + r.w); ++x)
            env.occupancy.at(x, y) = 0;
}

void carve_corridor(GroundTruthEnvironment& env, Cell a, Cell b, int width, bool horizontal_first) {
    const int half_lo = (width - 1) / 2;
    auto carve_h = [&](int y, int x0, int x1) {
        if (x0 > x1) std::swap(x0, x1);
        carve_rect(env, {x0, y - half_lo, x1 - x0 + 1, width});
    };
    auto carve_v = [&](int x, int y0, int y1) {
        if (y0 > y1) std::swap(y0, y1);
        carve_rect(env, {x - half_lo, y0, width, y1 - y0 + 1});
    };
    if (horizontal_first) {
        carve_h(a.y, a.x, b.x);
        carve_v(b.x, a.y, b.y);
    } else {
        carve_v(a.x, a.y, b.y);
        carve_h(b.y, a.x, b.x);
    }
}

int free_component_count(const GroundTruthEnvironment& env) {
    Grid<std::uint8_t> seen(env.width, env.height, 0);
    int components = 0;
    std::vector<Cell> stack;
    for (int y = 0; y < env.height; ++y) {
        for (int x = 0; x < env.width; ++x) {
            if (env.occupied({x, y}) || seen.at(x, y)) continue;
            ++components;
            seen.at(x, y) = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                Cell c = stack.back();
                stack.pop_back();
                for (Cell d : kNeighbors4) {
                    Cell n{c.x + d.x, c.y + d.y};
                    if (env.in_bounds(n) && !env.occupied(n) && !seen.at(n)) {
                        seen.at(n) = 1;
                        stack.push_back(n);
                    }
                }
            }
        }
    }
    return components;
}

}  // namespace

GeneratedWorld generate_world(std::uint64_t seed, const GeneratorConfig& cfg) {
    if (cfg.corridor_width < 3)
        throw std::invalid_argument("generate_world: corridor_width < 3, robot cannot pass");
    if (cfg.width < 24 || cfg.height < 24)
        throw std::invalid_argument("generate_world: grid too small");
    if (cfg.rooms_min < 1 || cfg.rooms_max < cfg.rooms_min)
        throw std::invalid_argument("generate_world: bad room count range");
    if (cfg.room_size_min < 4 || cfg.room_size_max < cfg.room_size_min)
        throw std::invalid_argument("generate_world: bad room size range");
    if (cfg.dead_end_density < 0.0 || cfg.resolution <= 0.0)
        throw std::invalid_argument("generate_world: bad parameters");

    GeneratedWorld world;
    GroundTruthEnvironment& env = world.env;
    env.width = cfg.width;
    env.height = cfg.height;
    env.resolution = cfg.resolution;
    env.num_categories = cfg.num_categories;
    env.occupancy = Grid<std::uint8_t>(cfg.width, cfg.height, 1);
    env.semantic = Grid<std::uint16_t>(cfg.width, cfg.height, 0);
    env.id = "world-" + std::to_string(seed);

    std::mt19937_64 rng(seed);
    auto uniform = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    const int n_rooms = uniform(cfg.rooms_min, cfg.rooms_max);
    for (int i = 0; i < n_rooms; ++i) {
        for (int attempt = 0; attempt < 400; ++attempt) {
            const int rw = uniform(cfg.room_size_min, std::min(cfg.room_size_max, cfg.width - 6));
            const int rh = uniform(cfg.room_size_min, std::min(cfg.room_size_max, cfg.height - 6));
            const Rect room{uniform(2, cfg.width - 2 - rw), uniform(2, cfg.height - 2 - rh), rw, rh};
            const Rect padded{room.x - 2, room.y - 2, room.w + 4, room.h + 4};
            bool ok = true;
            for (const Rect& other : world.rooms)
                if (padded.intersects(other)) { ok = false; break; }
            if (ok) {
                world.rooms.push_back(room);
                break;
            }
        }
    }
    if (world.rooms.empty())
        throw std::runtime_error("generate_world: could not place any room");

    for (const Rect& room : world.rooms) carve_rect(env, room);

    // Spanning connections: each room links to its nearest predecessor.
    for (size_t i = 1; i < world.rooms.size(); ++i) {
        const Cell a = world.rooms[i].center();
        size_t best = 0;
        long best_d2 = std::numeric_limits<long>::max();
        for (size_t j = 0; j < i; ++j) {
            const Cell b = world.rooms[j].center();
            const long d2 = long(a.x - b.x) * (a.x - b.x) + long(a.y - b.y) * (a.y - b.y);
            if (d2 < best_d2) { best_d2 = d2; best = j; }
        }
        carve_corridor(env, a, world.rooms[best].center(), cfg.corridor_width, uniform(0, 1) == 0);
    }
    for (int i = 0; i < cfg.extra_connections && world.rooms.size() > 2; ++i) {
        const int a = uniform(0, static_cast<int>(world.rooms.size()) - 1);
        int b = uniform(0, static_cast<int>(world.rooms.size()) - 2);
        if (b >= a) ++b;
        carve_corridor(env, world.rooms[a].center(), world.rooms[b].center(),
                       cfg.corridor_width, uniform(0, 1) == 0);
    }

    // Dead-end stubs carved into solid rock; the surrounding shell must be
    // occupied so the far end stays blind.
    const int n_stubs = static_cast<int>(std::llround(cfg.dead_end_density * world.rooms.size()));
    const int half_lo = (cfg.corridor_width - 1) / 2;
    int placed = 0;
    for (int attempt = 0; attempt < 400 && placed < n_stubs; ++attempt) {
        const Cell f{uniform(2, cfg.width - 3), uniform(2, cfg.height - 3)};
        if (env.occupied(f)) continue;
        std::vector<Cell> dirs;
        for (Cell d : kNeighbors4)
            if (env.occupied({f.x + d.x, f.y + d.y})) dirs.push_back(d);
        if (dirs.empty()) continue;
        const Cell d = dirs[uniform(0, static_cast<int>(dirs.size()) - 1)];
        const int len = uniform(cfg.dead_end_len_min, cfg.dead_end_len_max);

        Rect band;
        if (d.x != 0) {
            const int x0 = d.x > 0 ? f.x + 1 : f.x - len;
            band = {x0, f.y - half_lo, len, cfg.corridor_width};
        } else {
            const int y0 = d.y > 0 ? f.y + 1 : f.y - len;
            band = {f.x - half_lo, y0, cfg.corridor_width, len};
        }
        const Rect outer{band.x - 1, band.y - 1, band.w + 2, band.h + 2};
        if (outer.x < 1 || outer.y < 1 || outer.x + outer.w > cfg.width - 1 ||
            outer.y + outer.h > cfg.height - 1)
            continue;

        bool ok = true;
        for (int y = outer.y; y < outer.y + outer.h && ok; ++y) {
            for (int x = outer.x; x < outer.x + outer.w && ok; ++x) {
                const Cell c{x, y};
                const bool entrance_face =
                    (d.x > 0 && x == outer.x) || (d.x < 0 && x == outer.x + outer.w - 1) ||
                    (d.y > 0 && y == outer.y) || (d.y < 0 && y == outer.y + outer.h - 1);
                if (entrance_face) continue;
                if (!env.occupied(c)) ok = false;
            }
        }
        if (!ok) continue;
        carve_rect(env, band);
        world.dead_end_stubs.push_back(band);
        ++placed;
    }

    // Scatter semantic object blobs inside rooms.
    for (const Rect& room : world.rooms) {
        const int n_objects = uniform(1, std::max(1, cfg.objects_per_room_max));
        for (int i = 0; i < n_objects; ++i) {
            const auto cat = static_cast<std::uint16_t>(uniform(1, std::max(1, cfg.num_categories)));
            Cell c{uniform(room.x, room.x + room.w - 1), uniform(room.y, room.y + room.h - 1)};
            const int blob = uniform(1, 4);
            for (int k = 0; k < blob; ++k) {
                if (env.in_bounds(c) && env.free(c)) env.semantic.at(c) = cat;
                const Cell d4 = kNeighbors4[uniform(0, 3)];
                Cell next{c.x + d4.x, c.y + d4.y};
                if (room.contains(next)) c = next;
            }
        }
    }

    if (free_component_count(env) != 1)
        throw std::runtime_error("generate_world: free space not a single component");
    env.validate();
    return world;
}

GroundTruthEnvironment generate_environment(std::uint64_t seed, const GeneratorConfig& cfg) {
    return generate_world(seed, cfg).env;
}

// ---------------------------------------------------------------------------
// Text map format
// ---------------------------------------------------------------------------

void save_environment(const GroundTruthEnvironment& env, std::ostream& os) {
    os << env.width << ' ' << env.height << ' ' << env.resolution << ' '
       << env.num_categories << '\n';
    for (int y = 0; y < env.height; ++y) {
        for (int x = 0; x < env.width; ++x) os << (env.occupied({x, y}) ? '#' : '.');
        os << '\n';
    }
    os << '\n';
    for (int y = 0; y < env.height; ++y) {
        for (int x = 0; x < env.width; ++x) {
            if (x) os << ' ';
            os << env.semantic.at(x, y);
        }
        os << '\n';
    }
}

GroundTruthEnvironment load_environment(std::istream& is, const std::string& id) {
    GroundTruthEnvironment env;
    env.id = id;
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("map load: missing header");
    {
        std::istringstream hs(header);
        if (!(hs >> env.width >> env.height >> env.resolution >> env.num_categories))
            throw std::runtime_error("map load: bad header");
    }
    if (env.width <= 0 || env.height <= 0)
        throw std::runtime_error("map load: bad dimensions");
    env.occupancy = Grid<std::uint8_t>(env.width, env.height, 1);
    env.semantic = Grid<std::uint16_t>(env.width, env.height, 0);
    std::string line;
    for (int y = 0; y < env.height; ++y) {
        if (!std::getline(is, line) || static_cast<int>(line.size()) < env.width)
            throw std::runtime_error("map load: truncated occupancy rows");
        for (int x = 0; x < env.width; ++x) {
            if (line[x] == '.') env.occupancy.at(x, y) = 0;
            else if (line[x] == '#') env.occupancy.at(x, y) = 1;
            else throw std::runtime_error("map load: bad occupancy character");
        }
    }
    std::getline(is, line);  // blank separator
    for (int y = 0; y < env.height; ++y) {
        if (!std::getline(is, line)) throw std::runtime_error("map load: truncated semantic rows");
        std::istringstream ls(line);
        for (int x = 0; x < env.width; ++x) {
            int v = 0;
            if (!(ls >> v)) throw std::runtime_error("map load: truncated semantic row");
            if (v < 0 || v > env.num_categories)
                throw std::runtime_error("map load: semantic id out of range");
            env.semantic.at(x, y) = static_cast<std::uint16_t>(v);
        }
    }
    env.validate();
    return env;
}

void save_environment_file(const GroundTruthEnvironment& env, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    save_environment(env, os);
}

GroundTruthEnvironment load_environment_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::string id = path;
    if (const auto slash = id.find_last_of('/'); slash != std::string::npos)
        id = id.substr(slash + 1);
    if (const auto dot = id.find_last_of('.'); dot != std::string::npos) id = id.substr(0, dot);
    return load_environment(is, id);
}

}  // namespace lsp
