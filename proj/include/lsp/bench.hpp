#pragma once

#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lsp/planner.hpp"

namespace lsp {

struct Episode {
    std::string env_id;
    Pose start;
    Point goal;
    double geodesic_length = 0.0;  // ground-truth shortest path, meters
};

struct EpisodeResult {
    int episode_index = -1;
    std::string env_id;
    bool success = false;
    double path_length = 0.0;          // p, meters traveled
    double final_goal_distance = 0.0;  // d_T, meters
    double initial_goal_distance = 0.0;  // d_init = geodesic_length
    int steps = 0;
    std::string failure_mode;  // empty on success
};

struct MetricsSummary {
    int episodes = 0;
    double success_rate = 0.0;
    double spl = 0.0;
    double softspl = 0.0;
};

// One rejection-sampled episode on this environment: start/goal at free cell
// centers with a ground-truth geodesic inside [dist_min, dist_max].
std::optional<Episode> sample_episode(const GroundTruthEnvironment& env, std::mt19937_64& rng,
                                      double dist_min, double dist_max, int max_start_tries = 30);

// Deterministic under (corpus order, seed); infeasible environments are
// skipped with a note on stderr.
std::vector<Episode> generate_episodes(std::span<const GroundTruthEnvironment> corpus, int count,
                                       std::uint64_t seed, double dist_min, double dist_max);

void save_episodes(std::span<const Episode> episodes, std::uint64_t seed, const std::string& path);
std::vector<Episode> load_episodes(const std::string& path);

// Success weighted by path length: mean of S * l / max(p, l).
double spl(std::span<const EpisodeResult> results);
// Progress-weighted variant: mean of max(0, 1 - d_T/d_init) * l / max(p, l);
// episodes with d_init = 0 are excluded with a warning.
double softspl(std::span<const EpisodeResult> results);
MetricsSummary summarize(std::span<const EpisodeResult> results);

struct PolicySpec {
    enum class Kind { Optimistic, LspOracle, LspLearned };
    Kind kind = Kind::Optimistic;
    std::string name = "optimistic";
    std::string model_path;  // LspLearned only

    static PolicySpec parse(const std::string& name, const std::string& model_path = "");
};

struct ExperimentConfig {
    int budget = 500;
    double fov_deg = kDefaultFovDeg;
    double sensor_range = kDefaultSensorRangeM;
    double stop_radius = 0.2;
    int min_frontier_cells = 3;
    int parallelism = 0;  // 0 = hardware concurrency
    std::uint64_t seed = 0;  // recorded in output headers
    std::string out_dir;     // empty = no files written
};

struct ExperimentOutput {
    std::vector<std::string> policy_names;
    std::map<std::string, MetricsSummary> summaries;
    std::map<std::string, std::vector<EpisodeResult>> results;
};

// Runs every policy over every episode. Per-episode output is identical
// whatever the parallelism; a crashing episode is recorded as failure_mode
// "internal" without aborting the sweep. When out_dir is set, writes
// <policy>/results.jsonl, <policy>/summary.csv, and comparison.csv.
ExperimentOutput run_experiment(std::span<const GroundTruthEnvironment> corpus,
                                std::span<const Episode> episodes,
                                std::span<const PolicySpec> policies,
                                const ExperimentConfig& cfg);

EpisodeResult run_episode(const GroundTruthEnvironment& env, const Episode& episode,
                          int episode_index, const PolicySpec& policy,
                          const ExperimentConfig& cfg);

void write_summary_csv(const std::string& policy, const MetricsSummary& summary,
                       std::uint64_t seed, std::ostream& os);
// Merges summary CSVs; a metric absent from a run shows as '-'.
void write_comparison_csv(std::span<const std::string> summary_paths, std::ostream& os);

// Corpus helpers: a directory of .txt maps, loaded in filename order.
std::vector<GroundTruthEnvironment> load_corpus(const std::string& dir);

}  // namespace lsp
