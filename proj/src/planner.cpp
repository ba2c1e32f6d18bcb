#include "lsp/planner.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <ostream>

#include "json.hpp"

namespace lsp {

double default_terminal_cost(const PartialMap& map) { return 2.0 * map.diagonal_m(); }

std::vector<double> expected_cost(const Belief& belief,
                                  std::span<const SubgoalProperties> props,
                                  const DistanceTable& dists,
                                  const ExpectedCostOptions& opts) {
    const int n = static_cast<int>(belief.subgoals.size());
    if (n == 0) return {};
    if (static_cast<int>(props.size()) != n || dists.n != n + 1)
        throw std::invalid_argument("expected_cost: props/distances misaligned with subgoals");
    const double terminal =
        opts.terminal_cost >= 0 ? opts.terminal_cost : default_terminal_cost(*belief.map);

    // Subset selection when the exact DP would blow up: keep the subgoals
    // with the lowest myopic one-step score.
    std::vector<int> active(n);
    std::iota(active.begin(), active.end(), 0);
    if (n > opts.exact_cap) {
        std::vector<double> myopic(n);
        for (int i = 0; i < n; ++i) {
            const SubgoalProperties& p = props[i];
            myopic[i] = dists.at(0, i + 1) + p.p_s * p.r_s + (1.0 - p.p_s) * p.r_e;
        }
        std::stable_sort(active.begin(), active.end(), [&](int a, int b) {
            return myopic[a] != myopic[b] ? myopic[a] < myopic[b] : a < b;
        });
        active.resize(opts.exact_cap);
        std::sort(active.begin(), active.end());
    }
    const int m = static_cast<int>(active.size());

    // V[j][S]: optimal expected cost continuing from subgoal j's frontier with
    // remaining set S (bitmask over `active`).
    const size_t n_masks = size_t{1} << m;
    std::vector<double> value(static_cast<size_t>(m) * n_masks, 0.0);
    auto table_index = [&](int j) { return active[j] + 1; };  // distance-table node
    for (size_t mask = 0; mask < n_masks; ++mask) {
        for (int j = 0; j < m; ++j) {
            double& slot = value[static_cast<size_t>(j) * n_masks + mask];
            if (mask == 0) {
                slot = terminal;
                continue;
            }
            double best = kInfCost;
            for (int a = 0; a < m; ++a) {
                if (!(mask & (size_t{1} << a))) continue;
                const SubgoalProperties& p = props[active[a]];
                const double tail = value[static_cast<size_t>(a) * n_masks + (mask & ~(size_t{1} << a))];
                const double q = dists.at(table_index(j), table_index(a)) + p.p_s * p.r_s +
                                 (1.0 - p.p_s) * (p.r_e + tail);
                best = std::min(best, q);
            }
            slot = best;
        }
    }

    std::vector<double> q_values(n, std::numeric_limits<double>::quiet_NaN());
    const size_t full = n_masks - 1;
    for (int a = 0; a < m; ++a) {
        const SubgoalProperties& p = props[active[a]];
        const double tail = value[static_cast<size_t>(a) * n_masks + (full & ~(size_t{1} << a))];
        q_values[active[a]] = dists.at(0, table_index(a)) + p.p_s * p.r_s +
                              (1.0 - p.p_s) * (p.r_e + tail);
    }
    return q_values;
}

std::vector<Frontier> planning_frontiers(const PartialMap& map, const Pose& pose, int min_cells) {
    std::vector<Frontier> frontiers = extract_frontiers(map);
    std::vector<Frontier> filtered =
        filter_reachable(filter_min_size(frontiers, min_cells), map, pose);
    if (filtered.empty() && min_cells > 1)
        filtered = filter_reachable(std::move(frontiers), map, pose);  // keep tiny frontiers
    return filtered;
}

namespace {

std::optional<PlannerDecision> pick_argmin(std::vector<Frontier> frontiers,
                                           const std::vector<double>& q) {
    int best = -1;
    for (size_t i = 0; i < frontiers.size(); ++i) {
        if (std::isnan(q[i]) || std::isinf(q[i])) continue;
        if (best < 0 || q[i] < q[best]) best = static_cast<int>(i);
    }
    if (best < 0) return std::nullopt;
    PlannerDecision d;
    d.expected_cost = q[best];
    d.per_subgoal.reserve(frontiers.size());
    for (size_t i = 0; i < frontiers.size(); ++i)
        d.per_subgoal.push_back({frontiers[i].id, q[i]});
    d.chosen = std::move(frontiers[best]);
    return d;
}

}  // namespace

std::optional<PlannerDecision> select_subgoal(const PartialMap& map, const Pose& pose, Point goal,
                                              const PropertyEstimator& estimator,
                                              const SelectOptions& opts) {
    std::vector<Frontier> frontiers = planning_frontiers(map, pose, opts.min_frontier_cells);
    if (frontiers.empty()) return std::nullopt;

    std::vector<SubgoalProperties> props;
    props.reserve(frontiers.size());
    for (const Frontier& f : frontiers) {
        if (opts.cache) {
            if (const SubgoalProperties* hit = opts.cache->find(f.id)) {
                props.push_back(*hit);
                continue;
            }
        }
        const SubgoalProperties p = estimator.estimate(map, pose, f, goal);
        if (opts.cache) opts.cache->insert(f.id, p);
        props.push_back(p);
    }

    const DistanceTable dists = pairwise_subgoal_distances(map, pose, frontiers);
    Belief belief{&map, pose, frontiers, goal};
    const std::vector<double> q = expected_cost(belief, props, dists, opts.cost);
    return pick_argmin(std::move(frontiers), q);
}

std::optional<PlannerDecision> optimistic_select(const PartialMap& map, const Pose& pose,
                                                 Point goal, const SelectOptions& opts) {
    std::vector<Frontier> frontiers = planning_frontiers(map, pose, opts.min_frontier_cells);
    if (frontiers.empty()) return std::nullopt;

    const Cell robot = map.cell_of(pose.position());
    const Cell goal_cell = map.cell_of(goal);
    if (!map.in_bounds(goal_cell)) return std::nullopt;

    const Cell robot_src[1] = {robot};
    const DistanceField known = distance_field(map, robot_src);

    std::vector<std::uint8_t> opt_mask = optimistic_mask(map);
    if (!opt_mask[static_cast<size_t>(goal_cell.y) * map.width() + goal_cell.x])
        return std::nullopt;  // goal unreachable even optimistically
    const Cell goal_src[1] = {goal_cell};
    const DistanceField optimistic = dijkstra_field(map.width(), map.height(), map.resolution(),
                                                    std::move(opt_mask), goal_src);

    std::vector<double> score(frontiers.size(), kInfCost);
    for (size_t i = 0; i < frontiers.size(); ++i) {
        const double d_known = known.at(frontiers[i].centroid);
        const double d_opt = optimistic.at(frontiers[i].centroid);
        if (d_known < kInfCost && d_opt < kInfCost) score[i] = d_known + d_opt;
    }
    return pick_argmin(std::move(frontiers), score);
}

// ---------------------------------------------------------------------------
// Episode loop
// ---------------------------------------------------------------------------

// A Forward is emitted only when its swept segment crosses no known-occupied
// cell; unknown space is given the benefit of the doubt (a surprise collision
// marks the blocker and changes the map, so the retry differs).
bool forward_safe(const PartialMap& map, const Pose& pose) {
    const double rad = pose.heading_deg * kDegToRad;
    const Point from = pose.position();
    const Point to{from.x + kForwardStepM * std::cos(rad), from.y + kForwardStepM * std::sin(rad)};
    bool safe = true;
    trace_segment(from, to, map.resolution(),
                  [&](Cell c) {
                      if (!map.in_bounds(c) || map.occupancy(c) == kOccupied) {
                          safe = false;
                          return false;
                      }
                      return true;
                  },
                  /*strict_corners=*/true);
    return safe;
}

std::vector<Cell> plan_local_path(const PartialMap& map, Cell robot, Cell target) {
    const Cell keep[2] = {target, robot};
    const Cell src[1] = {target};
    {
        std::vector<std::uint8_t> mask = inflated_known_free_mask(map, keep);
        if (mask[static_cast<size_t>(target.y) * map.width() + target.x]) {
            const DistanceField field =
                dijkstra_field(map.width(), map.height(), map.resolution(), std::move(mask), src);
            if (field.reachable(robot)) return extract_path(field, robot);
        }
    }
    if (!map.free(target)) return {};
    const DistanceField field = distance_field(map, src);
    if (!field.reachable(robot)) return {};
    return extract_path(field, robot);
}

PrimitiveAction LocalController::decide(const PartialMap& map, const Pose& pose,
                                        std::span<const Cell> path, int lookahead) {
    if (spin_count_ > 0) {
        if (forward_safe(map, pose)) {
            spin_count_ = 0;
            return PrimitiveAction::Forward;
        }
        ++spin_count_;
        return spin_turn_;
    }
    const PrimitiveAction action = next_action(path, pose, map.resolution(), lookahead);
    if (action != PrimitiveAction::Forward || forward_safe(map, pose)) return action;
    // Scan toward the waypoint side first.
    const Cell wp = path[std::min<size_t>(lookahead, path.size() - 1)];
    const Point wp_m = map.center_of(wp);
    const double bearing = std::atan2(wp_m.y - pose.y, wp_m.x - pose.x) / kDegToRad;
    spin_turn_ = wrap_angle(bearing - pose.heading_deg) >= 0 ? PrimitiveAction::TurnRight
                                                             : PrimitiveAction::TurnLeft;
    spin_count_ = 1;
    return spin_turn_;
}

NavResult navigate_episode(const GroundTruthEnvironment& env, const Pose& start, Point goal,
                           const Policy& policy, const NavConfig& cfg) {
    if (!pose_valid(env, start))
        throw std::invalid_argument("navigate_episode: invalid start pose");
    if (!env.in_bounds(env.cell_of(goal)) || env.occupied(env.cell_of(goal)))
        throw std::invalid_argument("navigate_episode: goal not in free space");
    if (policy.kind == Policy::Kind::LspEstimator && policy.estimator == nullptr)
        throw std::invalid_argument("navigate_episode: policy needs an estimator");

    NavResult result;
    Pose pose = start;
    PartialMap map = PartialMap::for_environment(env);
    PropertyCache cache;
    result.trajectory.push_back(pose);

    SelectOptions select_opts;
    select_opts.min_frontier_cells = cfg.min_frontier_cells;
    select_opts.cache = &cache;

    int last_progress_t = 0;
    std::uint64_t last_revision = map.revision();
    LocalController controller;
    for (int t = 0; t < cfg.budget; ++t) {
        map.integrate(sense(env, pose, cfg.fov_deg, cfg.sensor_range));

        const bool stage2 = goal_reachable_known(map, pose, goal);
        PrimitiveAction action;
        std::optional<PlannerDecision> decision;

        if (stage2 && euclid(pose.position(), goal) <= cfg.stop_radius) {
            action = PrimitiveAction::Stop;
        } else {
            Cell target;
            if (stage2) {
                target = map.cell_of(goal);
            } else {
                decision = policy.kind == Policy::Kind::LspEstimator
                               ? select_subgoal(map, pose, goal, *policy.estimator, select_opts)
                               : optimistic_select(map, pose, goal, select_opts);
                if (!decision) {
                    result.failure_mode = "no-frontier";
                    result.steps = t;
                    break;
                }
                target = decision->chosen.centroid;
            }
            const std::vector<Cell> path = plan_local_path(map, map.cell_of(pose.position()), target);
            if (path.empty()) {
                result.failure_mode = "stuck";
                result.steps = t;
                break;
            }
            action = controller.decide(map, pose, path, cfg.lookahead);
            if (controller.exhausted()) {
                result.failure_mode = "stuck";
                result.steps = t;
                break;
            }
        }

        if (cfg.observer || cfg.record_timesteps) {
            StepEvent ev;
            ev.t = t;
            ev.env = &env;
            ev.map = &map;
            ev.pose = pose;
            ev.goal_known_reachable = stage2;
            ev.decision = decision ? &*decision : nullptr;
            ev.action = action;
            if (cfg.observer) cfg.observer(ev);
            if (cfg.record_timesteps) {
                TimestepRecord rec;
                rec.t = t;
                rec.pose = pose;
                rec.action = action;
                if (decision) {
                    rec.chosen_subgoal = decision->chosen.id;
                    rec.q_values = decision->per_subgoal;
                }
                result.records.push_back(std::move(rec));
            }
        }

        if (action == PrimitiveAction::Stop) {
            result.success = true;
            result.steps = t + 1;
            result.trajectory.push_back(pose);
            break;
        }

        const StepResult sr = step(env, pose, action);
        if (sr.collided) {
            if (sr.blocked_cell) map.mark_occupied(*sr.blocked_cell);
        } else if (action == PrimitiveAction::Forward) {
            result.traveled_m += kForwardStepM;
        }
        const bool moved = std::abs(sr.pose.x - pose.x) > 1e-12 ||
                           std::abs(sr.pose.y - pose.y) > 1e-12;
        pose = sr.pose;
        result.trajectory.push_back(pose);
        result.steps = t + 1;

        // Progress = displacement or any newly known cell this timestep
        // (including collision feedback).
        if (moved || map.revision() != last_revision) last_progress_t = t;
        last_revision = map.revision();
        if (t - last_progress_t >= cfg.stuck_patience) {
            result.failure_mode = "stuck";
            break;
        }
    }

    if (!result.success && result.failure_mode.empty()) result.failure_mode = "timeout";
    result.final_euclid_to_goal = euclid(pose.position(), goal);
    return result;
}

void write_trajectory_jsonl(const NavResult& result, std::ostream& os) {
    for (const TimestepRecord& rec : result.records) {
        nlohmann::json j;
        j["t"] = rec.t;
        j["pose"] = {{"x", rec.pose.x}, {"y", rec.pose.y}, {"heading", rec.pose.heading_deg}};
        j["action"] = to_string(rec.action);
        if (rec.chosen_subgoal) {
            j["chosen_subgoal_id"] = *rec.chosen_subgoal;
            nlohmann::json qs = nlohmann::json::array();
            for (const SubgoalEvaluation& e : rec.q_values) {
                nlohmann::json q;
                q["id"] = e.frontier_id;
                if (std::isfinite(e.q)) q["q"] = e.q;
                qs.push_back(std::move(q));
            }
            j["q_values"] = std::move(qs);
        }
        os << j.dump() << '\n';
    }
}

}  // namespace lsp
