#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lsp/frontier.hpp"
#include "lsp/gridworld.hpp"
#include "lsp/mapping.hpp"

namespace lsp {

// Ground-truth training label for one subgoal. Exactly one of r_s / r_e is
// defined, matching p_s; the masks gate the regression losses.
struct LabeledSubgoal {
    std::uint64_t frontier_id = 0;
    int p_s = 0;        // {0, 1}
    double r_s = 0.0;   // meters, defined iff p_s == 1
    double r_e = 0.0;   // meters, defined iff p_s == 0
    bool mask_ps = true;
    bool mask_rs = false;
    bool mask_re = false;
};

struct PsRsLabel {
    int p_s = 0;
    double r_s = 0.0;  // valid iff p_s == 1
};

// p_s = 1 iff the goal cell is reachable from the frontier through cells that
// are ground-truth free but still unknown on the partial map (the frontier's
// own cells bridge into that region); r_s is the masked geodesic from the
// frontier centroid to the goal.
PsRsLabel label_ps_rs(const GroundTruthEnvironment& env, const PartialMap& map,
                      const Frontier& frontier, Point goal);

// Closed exploration tour length over the skeleton of the unknown free-space
// component(s) behind the frontier: skeletonize, take junction/endpoint nodes
// plus the anchor, and solve the start-and-return tour (exact for <= 10
// nodes). Zero when nothing lies beyond the frontier.
double label_re(const GroundTruthEnvironment& env, const PartialMap& map,
                const Frontier& frontier);

LabeledSubgoal label_subgoal(const GroundTruthEnvironment& env, const PartialMap& map,
                             const Frontier& frontier, Point goal);

// ---------------------------------------------------------------------------
// Skeletonization
// ---------------------------------------------------------------------------

struct SkeletonGraph {
    std::vector<Cell> nodes;
    struct Edge {
        int a = 0, b = 0;
        double length = 0.0;  // meters along the skeleton
    };
    std::vector<Edge> edges;
    int anchor = 0;  // node index nearest the frontier
};

// Topology-preserving sequential thinning (simple-point deletion with curve
// endpoints kept). Returns the surviving cells.
std::vector<Cell> thin_region(int width, int height, std::span<const Cell> region);

// Thins the region and builds the node/edge graph: nodes at skeleton cells of
// degree != 2 plus the cell nearest anchor_hint. An empty region yields a
// single anchor node at the hint with no edges. The region must be
// 8-connected.
SkeletonGraph skeletonize(int width, int height, double resolution,
                          std::span<const Cell> region, Cell anchor_hint);

// ---------------------------------------------------------------------------
// Tour solvers (closed tour from `start` visiting every node exactly once)
// ---------------------------------------------------------------------------

double held_karp_tour(const std::vector<std::vector<double>>& dist, int start);
double heuristic_tour(const std::vector<std::vector<double>>& dist, int start);  // NN + 2-opt
// Held-Karp up to kExactTourNodes nodes, the heuristic beyond.
double tsp_tour_length(const std::vector<std::vector<double>>& dist, int start);
inline constexpr int kExactTourNodes = 10;

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

struct DatasetRecord {
    std::string env_id;
    int episode = 0;
    int t = 0;
    std::uint64_t frontier_id = 0;
    std::vector<double> features;
    double map_diag = 0.0;  // meters; training normalizes costs by this
    int p_s = 0;
    double r_s = 0.0;
    double r_e = 0.0;
    bool mask_rs = false;
    bool mask_re = false;
};

struct DatasetConfig {
    int episodes_per_env = 5;
    std::uint64_t seed = 0;
    double dist_min = 2.0;
    double dist_max = 15.0;
    int budget = 500;
    int min_frontier_cells = 3;
    double fov_deg = kDefaultFovDeg;
    double sensor_range = kDefaultSensorRangeM;
    int parallelism = 0;  // 0 = hardware concurrency
    long max_records = 0;  // 0 = unlimited
};

struct DatasetSummary {
    long records = 0;
    int episodes = 0;
    int envs = 0;
};

using RecordSink = std::function<void(const DatasetRecord&)>;

// Drives an optimistic planner through seeded episodes on each environment and
// emits one labeled record per frontier at every timestep where the frontier
// set changed (while the goal is still unreachable on the known map). Records
// arrive in deterministic (env, episode, t) order regardless of parallelism.
DatasetSummary generate_dataset(std::span<const GroundTruthEnvironment> corpus,
                                const DatasetConfig& cfg, const RecordSink& sink);

// JSON-lines file with a header record carrying the feature schema.
DatasetSummary generate_dataset_file(std::span<const GroundTruthEnvironment> corpus,
                                     const DatasetConfig& cfg, const std::string& out_path);

struct Dataset {
    int feature_dim = 0;
    int num_categories = 0;
    int schema_version = 0;
    std::vector<DatasetRecord> records;
};

Dataset load_dataset_file(const std::string& path);

}  // namespace lsp
