#pragma once

#include <functional>
#include <optional>
#include <unordered_map>

#include "lsp/costs.hpp"
#include "lsp/estimator.hpp"

namespace lsp {

// Planner state: partial map, robot pose, subgoal action set, and the goal.
struct Belief {
    const PartialMap* map = nullptr;
    Pose pose;
    std::vector<Frontier> subgoals;
    Point goal;
};

struct SubgoalEvaluation {
    std::uint64_t frontier_id = 0;
    double q = 0.0;  // NaN when the subgoal fell outside the exact-DP cap
};

struct PlannerDecision {
    Frontier chosen;
    double expected_cost = 0.0;
    std::vector<SubgoalEvaluation> per_subgoal;
};

struct ExpectedCostOptions {
    // Cost charged when the recursion exhausts all subgoals with failure mass
    // left; negative derives 2x the map diagonal.
    double terminal_cost = -1.0;
    // Exact subset DP handles up to this many subgoals; beyond it the
    // lowest-myopic-score subset of this size is evaluated.
    int exact_cap = 12;
};

double default_terminal_cost(const PartialMap& map);

// Expected cost Q of committing to each subgoal, evaluated exactly by dynamic
// programming over (remaining-set, location) states: travel to the frontier,
// succeed with p_s (paying r_s), or fail (paying r_e) and continue optimally
// with the remaining subgoals from there. Subgoals outside the evaluated
// subset get NaN. Distances index 0 is the robot, 1.. the subgoals.
std::vector<double> expected_cost(const Belief& belief,
                                  std::span<const SubgoalProperties> props,
                                  const DistanceTable& dists,
                                  const ExpectedCostOptions& opts = {});

// Per-episode memo of estimator outputs keyed by frontier id.
class PropertyCache {
public:
    const SubgoalProperties* find(std::uint64_t id) const {
        auto it = cache_.find(id);
        return it == cache_.end() ? nullptr : &it->second;
    }
    void insert(std::uint64_t id, const SubgoalProperties& p) { cache_.emplace(id, p); }
    void clear() { cache_.clear(); }

private:
    std::unordered_map<std::uint64_t, SubgoalProperties> cache_;
};

struct SelectOptions {
    int min_frontier_cells = 3;
    ExpectedCostOptions cost;
    PropertyCache* cache = nullptr;
};

// The stage-1 action set: extracted frontiers filtered by size then
// reachability; when that leaves nothing, tiny frontiers are kept rather than
// abandoning an incompletely explored map.
std::vector<Frontier> planning_frontiers(const PartialMap& map, const Pose& pose, int min_cells);

// Local navigation plan from the robot's cell to a target cell: steepest
// descent on a distance field seeded at the target over the 1-cell-inflated
// known map, falling back to the raw known map when clearance walls the
// robot in. Empty when no known path exists.
std::vector<Cell> plan_local_path(const PartialMap& map, Cell robot, Cell target);

// True when a Forward from this pose sweeps only cells not known occupied.
bool forward_safe(const PartialMap& map, const Pose& pose);

// Collision-aware pursuit: follows next_action but never emits a Forward
// whose sweep crosses a known-occupied cell; when pursuit wants such a
// Forward it scans headings one turn at a time until a safe one appears.
// exhausted() reports a full fruitless scan (the robot is boxed in).
class LocalController {
public:
    PrimitiveAction decide(const PartialMap& map, const Pose& pose, std::span<const Cell> path,
                           int lookahead = 5);
    bool exhausted() const { return spin_count_ > 13; }
    void reset() { spin_count_ = 0; }

private:
    int spin_count_ = 0;
    PrimitiveAction spin_turn_ = PrimitiveAction::TurnRight;
};

// Full stage-1 decision: extract and filter frontiers, estimate properties,
// evaluate Q, return the argmin (ties to the lowest frontier id). Empty
// result = no reachable frontier, the episode-failure signal.
std::optional<PlannerDecision> select_subgoal(const PartialMap& map, const Pose& pose, Point goal,
                                              const PropertyEstimator& estimator,
                                              const SelectOptions& opts = {});

// Baseline that treats unknown space as free: picks the frontier minimizing
// known-distance(robot, frontier) + optimistic-distance(frontier, goal).
std::optional<PlannerDecision> optimistic_select(const PartialMap& map, const Pose& pose,
                                                 Point goal, const SelectOptions& opts = {});

// ---------------------------------------------------------------------------
// Episode orchestration
// ---------------------------------------------------------------------------

struct Policy {
    enum class Kind { Optimistic, LspEstimator };
    Kind kind = Kind::Optimistic;
    const PropertyEstimator* estimator = nullptr;  // required for LspEstimator
    std::string name = "optimistic";

    static Policy optimistic() { return {}; }
    static Policy lsp(const PropertyEstimator& e) {
        return {Kind::LspEstimator, &e, e.name()};
    }
};

struct StepEvent {
    int t = 0;
    const GroundTruthEnvironment* env = nullptr;
    const PartialMap* map = nullptr;  // belief at decision time
    Pose pose;                        // pose at decision time
    bool goal_known_reachable = false;
    const PlannerDecision* decision = nullptr;  // stage 1 only
    PrimitiveAction action = PrimitiveAction::Stop;
};

using StepObserver = std::function<void(const StepEvent&)>;

struct TimestepRecord {
    int t = 0;
    Pose pose;
    PrimitiveAction action = PrimitiveAction::Stop;
    std::optional<std::uint64_t> chosen_subgoal;
    std::vector<SubgoalEvaluation> q_values;
};

struct NavConfig {
    int budget = 500;
    double stop_radius = 0.2;
    double fov_deg = kDefaultFovDeg;
    double sensor_range = kDefaultSensorRangeM;
    int lookahead = 5;
    int min_frontier_cells = 3;
    // Steps without a position change or any newly known cell before the
    // episode is declared stuck.
    int stuck_patience = 50;
    bool record_timesteps = false;
    StepObserver observer;
};

struct NavResult {
    bool success = false;
    double traveled_m = 0.0;  // 0.25 m per executed (non-blocked) Forward
    double final_euclid_to_goal = 0.0;
    int steps = 0;
    std::string failure_mode;  // empty on success: timeout | stuck | no-frontier
    std::vector<Pose> trajectory;  // start pose, then pose after each action
    std::vector<TimestepRecord> records;
};

// Two-stage loop: sense, integrate, and either head for the goal on the known
// map (emitting Stop inside the stop radius) or commit to the policy's chosen
// frontier, replanning every step. Collisions mark the blocking cell occupied.
NavResult navigate_episode(const GroundTruthEnvironment& env, const Pose& start, Point goal,
                           const Policy& policy, const NavConfig& cfg = {});

void write_trajectory_jsonl(const NavResult& result, std::ostream& os);

}  // namespace lsp
