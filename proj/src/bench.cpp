#include "lsp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lsp/estimator.hpp"

namespace lsp {

namespace fs = std::filesystem;

std::optional<Episode> sample_episode(const GroundTruthEnvironment& env, std::mt19937_64& rng,
                                      double dist_min, double dist_max, int max_start_tries) {
    auto uniform = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    const std::vector<std::uint8_t> mask = env_free_mask(env);
    for (int attempt = 0; attempt < max_start_tries; ++attempt) {
        Cell start{uniform(1, env.width - 2), uniform(1, env.height - 2)};
        if (env.occupied(start)) continue;
        const Cell src[1] = {start};
        const DistanceField field =
            dijkstra_field(env.width, env.height, env.resolution, mask, src);
        std::vector<Cell> eligible;
        for (int y = 1; y < env.height - 1; ++y)
            for (int x = 1; x < env.width - 1; ++x) {
                const double d = field.at({x, y});
                if (d >= dist_min && d <= dist_max) eligible.push_back({x, y});
            }
        if (eligible.empty()) continue;
        const Cell goal = eligible[uniform(0, static_cast<int>(eligible.size()) - 1)];
        Episode ep;
        ep.env_id = env.id;
        const Point start_m = env.center_of(start);
        ep.start = {start_m.x, start_m.y, kTurnDeg * uniform(0, 11)};
        ep.goal = env.center_of(goal);
        ep.geodesic_length = field.at(goal);
        return ep;
    }
    return std::nullopt;
}

std::vector<Episode> generate_episodes(std::span<const GroundTruthEnvironment> corpus, int count,
                                       std::uint64_t seed, double dist_min, double dist_max) {
    if (corpus.empty()) throw std::invalid_argument("generate_episodes: empty corpus");
    if (dist_min < 0 || dist_max < dist_min)
        throw std::invalid_argument("generate_episodes: bad distance range");
    std::vector<Episode> episodes;
    episodes.reserve(count);
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 rng(derive_seed(seed, i));
        bool placed = false;
        for (size_t offset = 0; offset < corpus.size() && !placed; ++offset) {
            const GroundTruthEnvironment& env = corpus[(i + offset) % corpus.size()];
            if (auto ep = sample_episode(env, rng, dist_min, dist_max)) {
                episodes.push_back(std::move(*ep));
                placed = true;
            } else if (offset == 0) {
                std::cerr << "generate_episodes: no start/goal at distance [" << dist_min << ", "
                          << dist_max << "] in " << env.id << ", trying next environment\n";
            }
        }
        if (!placed)
            std::cerr << "generate_episodes: skipped episode " << i << " (range infeasible)\n";
    }
    return episodes;
}

void save_episodes(std::span<const Episode> episodes, std::uint64_t seed,
                   const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    nlohmann::json header;
    header["type"] = "header";
    header["seed"] = seed;
    header["count"] = episodes.size();
    os << header.dump() << '\n';
    for (const Episode& ep : episodes) {
        nlohmann::json j;
        j["env"] = ep.env_id;
        j["start"] = {{"x", ep.start.x}, {"y", ep.start.y}, {"heading", ep.start.heading_deg}};
        j["goal"] = {{"x", ep.goal.x}, {"y", ep.goal.y}};
        j["geodesic"] = ep.geodesic_length;
        os << j.dump() << '\n';
    }
}

std::vector<Episode> load_episodes(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::vector<Episode> episodes;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        if (first && j.value("type", "") == "header") {
            first = false;
            continue;
        }
        first = false;
        Episode ep;
        ep.env_id = j.at("env").get<std::string>();
        ep.start.x = j.at("start").at("x").get<double>();
        ep.start.y = j.at("start").at("y").get<double>();
        ep.start.heading_deg = j.at("start").at("heading").get<int>();
        ep.goal.x = j.at("goal").at("x").get<double>();
        ep.goal.y = j.at("goal").at("y").get<double>();
        ep.geodesic_length = j.at("geodesic").get<double>();
        episodes.push_back(std::move(ep));
    }
    return episodes;
}

double spl(std::span<const EpisodeResult> results) {
    if (results.empty()) throw std::invalid_argument("spl: no results");
    double total = 0.0;
    for (const EpisodeResult& r : results) {
        if (!r.success) continue;
        const double l = r.initial_goal_distance;
        total += l / std::max(r.path_length, l);
    }
    return total / static_cast<double>(results.size());
}

double softspl(std::span<const EpisodeResult> results) {
    if (results.empty()) throw std::invalid_argument("softspl: no results");
    double total = 0.0;
    long counted = 0;
    for (const EpisodeResult& r : results) {
        const double l = r.initial_goal_distance;
        if (l <= 0.0) {
            std::cerr << "softspl: excluding episode " << r.episode_index
                      << " with zero initial distance\n";
            continue;
        }
        const double progress = std::max(0.0, 1.0 - r.final_goal_distance / l);
        total += progress * (l / std::max(r.path_length, l));
        ++counted;
    }
    return counted > 0 ? total / static_cast<double>(counted) : 0.0;
}

MetricsSummary summarize(std::span<const EpisodeResult> results) {
    MetricsSummary s;
    s.episodes = static_cast<int>(results.size());
    if (results.empty()) return s;
    long successes = 0;
    for (const EpisodeResult& r : results) successes += r.success;
    s.success_rate = static_cast<double>(successes) / static_cast<double>(results.size());
    s.spl = spl(results);
    s.softspl = softspl(results);
    return s;
}

PolicySpec PolicySpec::parse(const std::string& name, const std::string& model_path) {
    PolicySpec spec;
    spec.name = name;
    if (name == "optimistic") {
        spec.kind = Kind::Optimistic;
    } else if (name == "lsp-oracle") {
        spec.kind = Kind::LspOracle;
    } else if (name == "lsp-learned") {
        spec.kind = Kind::LspLearned;
        if (model_path.empty())
            throw std::invalid_argument("policy lsp-learned requires a model file");
        spec.model_path = model_path;
    } else {
        throw std::invalid_argument("unknown policy: " + name);
    }
    return spec;
}

EpisodeResult run_episode(const GroundTruthEnvironment& env, const Episode& episode,
                          int episode_index, const PolicySpec& policy,
                          const ExperimentConfig& cfg) {
    EpisodeResult result;
    result.episode_index = episode_index;
    result.env_id = episode.env_id;
    result.initial_goal_distance = episode.geodesic_length;

    NavConfig nav;
    nav.budget = cfg.budget;
    nav.fov_deg = cfg.fov_deg;
    nav.sensor_range = cfg.sensor_range;
    nav.stop_radius = cfg.stop_radius;
    nav.min_frontier_cells = cfg.min_frontier_cells;

    try {
        NavResult nr;
        switch (policy.kind) {
            case PolicySpec::Kind::Optimistic:
                nr = navigate_episode(env, episode.start, episode.goal, Policy::optimistic(), nav);
                break;
            case PolicySpec::Kind::LspOracle: {
                OracleEstimator oracle(env);
                nr = navigate_episode(env, episode.start, episode.goal, Policy::lsp(oracle), nav);
                break;
            }
            case PolicySpec::Kind::LspLearned: {
                LearnedEstimator learned(load_model_file(policy.model_path));
                nr = navigate_episode(env, episode.start, episode.goal, Policy::lsp(learned), nav);
                break;
            }
        }
        result.success = nr.success;
        result.path_length = nr.traveled_m;
        result.final_goal_distance = nr.final_euclid_to_goal;
        result.steps = nr.steps;
        result.failure_mode = nr.failure_mode;
    } catch (const std::exception& e) {
        result.success = false;
        result.failure_mode = "internal";
        result.final_goal_distance = episode.geodesic_length;
        std::cerr << "episode " << episode_index << " (" << policy.name
                  << ") failed internally: " << e.what() << '\n';
    }
    return result;
}

namespace {

void write_results_jsonl(const std::string& path, const std::string& policy,
                         const ExperimentConfig& cfg, std::span<const EpisodeResult> results) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    nlohmann::json header;
    header["type"] = "header";
    header["policy"] = policy;
    header["seed"] = cfg.seed;
    header["budget"] = cfg.budget;
    os << header.dump() << '\n';
    for (const EpisodeResult& r : results) {
        nlohmann::json j;
        j["episode"] = r.episode_index;
        j["env"] = r.env_id;
        j["success"] = r.success;
        j["path_length"] = r.path_length;
        j["final_goal_distance"] = r.final_goal_distance;
        j["initial_goal_distance"] = r.initial_goal_distance;
        j["steps"] = r.steps;
        j["failure_mode"] = r.failure_mode;
        os << j.dump() << '\n';
    }
}

}  // namespace

void write_summary_csv(const std::string& policy, const MetricsSummary& summary,
                       std::uint64_t seed, std::ostream& os) {
    os << "policy,seed,episodes,success_rate,spl,softspl\n";
    char buf[192];
    std::snprintf(buf, sizeof(buf), "%s,%llu,%d,%.6f,%.6f,%.6f\n", policy.c_str(),
                  static_cast<unsigned long long>(seed), summary.episodes, summary.success_rate,
                  summary.spl, summary.softspl);
    os << buf;
}

void write_comparison_csv(std::span<const std::string> summary_paths, std::ostream& os) {
    os << "policy,episodes,success_rate,spl,softspl\n";
    for (const std::string& path : summary_paths) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("cannot read " + path);
        std::string header_line, row;
        if (!std::getline(is, header_line) || !std::getline(is, row))
            throw std::runtime_error("summary file too short: " + path);
        std::vector<std::string> header, cells;
        for (std::stringstream ss(header_line); ss.good();) {
            std::string cell;
            std::getline(ss, cell, ',');
            header.push_back(cell);
        }
        for (std::stringstream ss(row); ss.good();) {
            std::string cell;
            std::getline(ss, cell, ',');
            cells.push_back(cell);
        }
        auto field = [&](const std::string& name) -> std::string {
            for (size_t i = 0; i < header.size() && i < cells.size(); ++i)
                if (header[i] == name && !cells[i].empty()) return cells[i];
            return "-";
        };
        os << field("policy") << ',' << field("episodes") << ',' << field("success_rate") << ','
           << field("spl") << ',' << field("softspl") << '\n';
    }
}

ExperimentOutput run_experiment(std::span<const GroundTruthEnvironment> corpus,
                                std::span<const Episode> episodes,
                                std::span<const PolicySpec> policies,
                                const ExperimentConfig& cfg) {
    std::map<std::string, size_t> env_index;
    for (size_t i = 0; i < corpus.size(); ++i) env_index[corpus[i].id] = i;
    for (const Episode& ep : episodes)
        if (!env_index.count(ep.env_id))
            throw std::invalid_argument("run_experiment: episode references unknown env " +
                                        ep.env_id);

    ExperimentOutput out;
    for (const PolicySpec& policy : policies) {
        out.policy_names.push_back(policy.name);
        std::vector<EpisodeResult> results(episodes.size());
        std::atomic<size_t> cursor{0};
        unsigned workers =
            cfg.parallelism > 0 ? cfg.parallelism : std::thread::hardware_concurrency();
        workers = std::max(1u, std::min<unsigned>(workers, episodes.size()));
        auto run = [&] {
            for (size_t i = cursor.fetch_add(1); i < episodes.size(); i = cursor.fetch_add(1)) {
                const Episode& ep = episodes[i];
                results[i] = run_episode(corpus[env_index.at(ep.env_id)], ep,
                                         static_cast<int>(i), policy, cfg);
            }
        };
        if (workers <= 1) {
            run();
        } else {
            std::vector<std::thread> pool;
            for (unsigned i = 0; i < workers; ++i) pool.emplace_back(run);
            for (std::thread& th : pool) th.join();
        }
        out.summaries[policy.name] = summarize(results);
        out.results[policy.name] = std::move(results);
    }

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        std::vector<std::string> summary_paths;
        for (const PolicySpec& policy : policies) {
            const fs::path dir = fs::path(cfg.out_dir) / policy.name;
            fs::create_directories(dir);
            write_results_jsonl((dir / "results.jsonl").string(), policy.name, cfg,
                                out.results[policy.name]);
            std::ofstream os(dir / "summary.csv");
            write_summary_csv(policy.name, out.summaries[policy.name], cfg.seed, os);
            summary_paths.push_back((dir / "summary.csv").string());
        }
        std::ofstream cmp(fs::path(cfg.out_dir) / "comparison.csv");
        write_comparison_csv(summary_paths, cmp);
    }
    return out;
}

std::vector<GroundTruthEnvironment> load_corpus(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .txt maps in " + dir);
    std::vector<GroundTruthEnvironment> corpus;
    corpus.reserve(files.size());
    for (const std::string& f : files) corpus.push_back(load_environment_file(f));
    return corpus;
}

}  // namespace lsp
