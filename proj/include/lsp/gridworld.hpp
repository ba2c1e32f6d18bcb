#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsp/core.hpp"

namespace lsp {

// Ground-truth world the robot never observes directly. Occupancy is binary
// (the robot-facing tri-state lives in PartialMap); semantic ids are 0..N
// with 0 meaning "no object".
struct GroundTruthEnvironment {
    int width = 0;
    int height = 0;
    double resolution = 0.05;  // meters per cell
    int num_categories = 40;   // N
    Grid<std::uint8_t> occupancy;   // 0 = free, 1 = occupied
    Grid<std::uint16_t> semantic;   // 0..num_categories
    std::string id;

    bool in_bounds(Cell c) const { return occupancy.in_bounds(c); }
    bool occupied(Cell c) const { return occupancy.at(c) != 0; }
    bool free(Cell c) const { return occupancy.at(c) == 0; }

    Cell cell_of(Point p) const {
        return {static_cast<int>(std::floor(p.x / resolution)),
                static_cast<int>(std::floor(p.y / resolution))};
    }
    Point center_of(Cell c) const {
        return {(c.x + 0.5) * resolution, (c.y + 0.5) * resolution};
    }
    double diagonal_m() const { return std::hypot(width, height) * resolution; }

    // Throws std::runtime_error on a violated invariant.
    void validate() const;
};

struct Pose {
    double x = 0.0;          // meters
    double y = 0.0;          // meters
    int heading_deg = 0;     // multiple of 30 in [0, 360)

    Point position() const { return {x, y}; }
};

enum class PrimitiveAction : std::uint8_t { Forward, TurnLeft, TurnRight, Stop };

const char* to_string(PrimitiveAction a);

struct RevealedCell {
    Cell cell;
    std::uint8_t occupied = 0;
    std::uint16_t semantic = 0;
};

struct Observation {
    Pose sensor_pose;
    std::vector<RevealedCell> revealed;
};

struct StepResult {
    Pose pose;
    bool collided = false;
    std::optional<Cell> blocked_cell;  // first occupied swept cell, when collided
};

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;
    bool contains(Cell c) const {
        return c.x >= x && c.y >= y && c.x < x + w && c.y < y + h;
    }
    bool intersects(const Rect& r) const {
        return !(x + w <= r.x || r.x + r.w <= x || y + h <= r.y || r.y + r.h <= y);
    }
    Cell center() const { return {x + w / 2, y + h / 2}; }
};

struct GeneratorConfig {
    int width = 96;
    int height = 96;
    double resolution = 0.05;
    int num_categories = 40;
    int rooms_min = 4;
    int rooms_max = 8;
    int room_size_min = 10;
    int room_size_max = 22;
    // >= 3 is the hard floor (1-cell clearance around the robot); the default
    // of 4 leaves room to change lanes with 0.25 m steps at 30-degree
    // heading quanta, which a 3-cell corridor cannot always accommodate.
    int corridor_width = 4;
    int extra_connections = 1;       // cycle-forming extra corridors
    double dead_end_density = 0.25;  // stubs carved = round(density * room count)
    int dead_end_len_min = 6;
    int dead_end_len_max = 20;
    int objects_per_room_max = 3;
};

struct GeneratedWorld {
    GroundTruthEnvironment env;
    std::vector<Rect> rooms;
    std::vector<Rect> dead_end_stubs;
};

// Rooms-and-corridors world. Deterministic in (seed, config); free space is a
// single 4-connected component and the boundary ring is occupied.
// Throws std::invalid_argument for configs the robot cannot traverse
// (corridor_width < 3) or that cannot fit a room.
GeneratedWorld generate_world(std::uint64_t seed, const GeneratorConfig& cfg = {});
GroundTruthEnvironment generate_environment(std::uint64_t seed, const GeneratorConfig& cfg = {});

bool pose_valid(const GroundTruthEnvironment& env, const Pose& pose);

// Forward displaces 0.25 m along heading when the swept segment stays free;
// a blocked move leaves the pose unchanged and flags the first occupied cell.
StepResult step(const GroundTruthEnvironment& env, const Pose& pose, PrimitiveAction action);

inline constexpr double kForwardStepM = 0.25;
inline constexpr int kTurnDeg = 30;
inline constexpr double kDefaultFovDeg = 90.0;
inline constexpr double kDefaultSensorRangeM = 5.0;

// Noiseless raycast reveal. Rays at <= 0.5 degree spacing across the field of
// view; a free cell is revealed only if the straight segment from the sensor
// to its center crosses no occupied cell interior; each ray also reveals the
// occupied cell that terminates it.
Observation sense(const GroundTruthEnvironment& env, const Pose& pose,
                  double fov_deg = kDefaultFovDeg, double max_range = kDefaultSensorRangeM);

// Enumerates the cells whose interior the segment a->b crosses, in order,
// starting with a's cell. When `strict_corners` is set, cells touched only at
// an exact corner crossing are included as well (used for collision sweeps).
// The callback returns false to stop the walk.
void trace_segment(Point a, Point b, double resolution,
                   const std::function<bool(Cell)>& visit, bool strict_corners = false);

// Text map format: "width height resolution N", `height` occupancy rows
// ('.' free, '#' occupied), a blank line, then `height` semantic id rows.
void save_environment(const GroundTruthEnvironment& env, std::ostream& os);
GroundTruthEnvironment load_environment(std::istream& is, const std::string& id = "");
void save_environment_file(const GroundTruthEnvironment& env, const std::string& path);
GroundTruthEnvironment load_environment_file(const std::string& path);

}  // namespace lsp
