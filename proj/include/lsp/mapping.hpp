#pragma once

#include <iosfwd>

#include "lsp/gridworld.hpp"

namespace lsp {

// Occupancy belief values.
inline constexpr std::uint8_t kUnknown = 0;
inline constexpr std::uint8_t kOccupied = 1;
inline constexpr std::uint8_t kFree = 2;

// The robot's tri-state belief map. Cells only ever move from unknown to a
// known value; in the noiseless regime every known value equals ground truth.
class PartialMap {
public:
    PartialMap() = default;
    PartialMap(int width, int height, double resolution, int num_categories = 40);
    static PartialMap for_environment(const GroundTruthEnvironment& env);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    int num_categories() const { return num_categories_; }
    double diagonal_m() const { return std::hypot(width_, height_) * resolution_; }

    bool in_bounds(Cell c) const { return occ_.in_bounds(c); }
    std::uint8_t occupancy(Cell c) const { return occ_.at(c); }
    std::uint16_t semantic(Cell c) const { return sem_.at(c); }
    bool known(Cell c) const { return occ_.at(c) != kUnknown; }
    bool free(Cell c) const { return occ_.at(c) == kFree; }

    Cell cell_of(Point p) const {
        return {static_cast<int>(std::floor(p.x / resolution_)),
                static_cast<int>(std::floor(p.y / resolution_))};
    }
    Point center_of(Cell c) const {
        return {(c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_};
    }

    int known_cells() const { return known_count_; }
    double unknown_fraction() const {
        return 1.0 - static_cast<double>(known_count_) / static_cast<double>(occ_.size());
    }
    // Bumped on every mutation that changes a cell; cheap change detection.
    std::uint64_t revision() const { return revision_; }

    // Writes every revealed cell's occupancy and semantic id. Throws
    // std::out_of_range if the observation touches a cell outside the map;
    // the map is left unchanged in that case. Idempotent.
    void integrate(const Observation& obs);

    // Collision feedback: marks a cell occupied even though it was never
    // sensed. The caller must pass the true blocking cell.
    void mark_occupied(Cell c);

    const Grid<std::uint8_t>& occupancy_grid() const { return occ_; }
    const Grid<std::uint16_t>& semantic_grid() const { return sem_; }

    bool operator==(const PartialMap&) const = default;

private:
    void set_cell(Cell c, std::uint8_t occ, std::uint16_t sem);

    int width_ = 0, height_ = 0;
    double resolution_ = 0.05;
    int num_categories_ = 40;
    Grid<std::uint8_t> occ_;
    Grid<std::uint16_t> sem_;
    int known_count_ = 0;
    std::uint64_t revision_ = 0;
};

// True iff an 8-connected path of known-free cells joins the pose's cell to
// the goal's cell. Diagonal steps require both adjacent cardinal cells free
// (no corner cutting), matching the distance-field metric.
bool goal_reachable_known(const PartialMap& map, const Pose& pose, Point goal);

// Debug dump in the environment text format with '?' for unknown cells.
void save_partial_map(const PartialMap& map, std::ostream& os);

}  // namespace lsp
