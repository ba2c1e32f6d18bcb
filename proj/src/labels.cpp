#include "lsp/labels.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cassert>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "lsp/bench.hpp"
#include "lsp/costs.hpp"
#include "lsp/estimator.hpp"
#include "lsp/planner.hpp"

namespace lsp {

// ---------------------------------------------------------------------------
// Topology-preserving thinning
// ---------------------------------------------------------------------------

namespace {

// 3x3 neighborhood offsets, reading order without the center.
constexpr Cell kRing[8] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                           {1, 0},   {-1, 1}, {0, 1},  {1, 1}};

// A pixel is "simple" when deleting it preserves both the foreground
// 8-topology and the background 4-topology of its 3x3 neighborhood:
// exactly one 8-component of set neighbors and exactly one 4-component of
// clear neighbors touching a cardinal position.
std::array<bool, 256> build_simple_table() {
    std::array<bool, 256> table{};
    auto adjacent8 = [](int i, int j) {
        return std::abs(kRing[i].x - kRing[j].x) <= 1 && std::abs(kRing[i].y - kRing[j].y) <= 1;
    };
    auto adjacent4 = [](int i, int j) {
        return std::abs(kRing[i].x - kRing[j].x) + std::abs(kRing[i].y - kRing[j].y) == 1;
    };
    auto is_cardinal = [](int i) { return i == 1 || i == 3 || i == 4 || i == 6; };
    for (int pattern = 0; pattern < 256; ++pattern) {
        int fg_components = 0, bg_components = 0;
        int comp[8];
        std::fill(std::begin(comp), std::end(comp), -1);
        // Foreground 8-components.
        for (int i = 0; i < 8; ++i) {
            if (!(pattern & (1 << i)) || comp[i] >= 0) continue;
            comp[i] = fg_components++;
            // Tiny fixpoint union over 8 positions.
            for (bool grew = true; grew;) {
                grew = false;
                for (int a = 0; a < 8; ++a) {
                    if (!(pattern & (1 << a)) || comp[a] != comp[i]) continue;
                    for (int b = 0; b < 8; ++b) {
                        if ((pattern & (1 << b)) && comp[b] < 0 && adjacent8(a, b)) {
                            comp[b] = comp[i];
                            grew = true;
                        }
                    }
                }
            }
        }
        // Background 4-components that touch a cardinal position.
        std::fill(std::begin(comp), std::end(comp), -1);
        int bg_total = 0;
        bool comp_touches[8] = {};
        for (int i = 0; i < 8; ++i) {
            if ((pattern & (1 << i)) || comp[i] >= 0) continue;
            const int id = bg_total++;
            comp[i] = id;
            for (bool grew = true; grew;) {
                grew = false;
                for (int a = 0; a < 8; ++a) {
                    if ((pattern & (1 << a)) || comp[a] != id) continue;
                    for (int b = 0; b < 8; ++b) {
                        if (!(pattern & (1 << b)) && comp[b] < 0 && adjacent4(a, b)) {
                            comp[b] = id;
                            grew = true;
                        }
                    }
                }
            }
        }
        for (int i = 0; i < 8; ++i)
            if (comp[i] >= 0 && is_cardinal(i)) comp_touches[comp[i]] = true;
        for (int id = 0; id < bg_total; ++id) bg_components += comp_touches[id];
        table[pattern] = fg_components == 1 && bg_components == 1;
    }
    return table;
}

const std::array<bool, 256>& simple_table() {
    static const std::array<bool, 256> table = build_simple_table();
    return table;
}

struct Raster {
    int w = 0, h = 0;
    int x0 = 0, y0 = 0;  // bounding box origin in grid coordinates
    Grid<std::uint8_t> img;

    bool at(int x, int y) const { return img.in_bounds(x, y) && img.at(x, y); }
    int pattern(int x, int y) const {
        int p = 0;
        for (int i = 0; i < 8; ++i)
            if (at(x + kRing[i].x, y + kRing[i].y)) p |= 1 << i;
        return p;
    }
    int neighbor_count(int x, int y) const {
        int c = 0;
        for (const Cell& d : kRing) c += at(x + d.x, y + d.y);
        return c;
    }
};

Raster rasterize(std::span<const Cell> region) {
    Raster r;
    if (region.empty()) return r;
    int min_x = region[0].x, max_x = region[0].x, min_y = region[0].y, max_y = region[0].y;
    for (const Cell& c : region) {
        min_x = std::min(min_x, c.x);
        max_x = std::max(max_x, c.x);
        min_y = std::min(min_y, c.y);
        max_y = std::max(max_y, c.y);
    }
    r.x0 = min_x;
    r.y0 = min_y;
    r.w = max_x - min_x + 1;
    r.h = max_y - min_y + 1;
    r.img = Grid<std::uint8_t>(r.w, r.h, 0);
    for (const Cell& c : region) r.img.at(c.x - min_x, c.y - min_y) = 1;
    return r;
}

}  // namespace

std::vector<Cell> thin_region(int width, int height, std::span<const Cell> region) {
    (void)width;
    (void)height;
    if (region.empty()) return {};
    Raster r = rasterize(region);
    const auto& simple = simple_table();

    // Directional border passes; deletion is sequential so every removal
    // re-checks simplicity against the current image.
    constexpr Cell kPassDirs[4] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Cell& d : kPassDirs) {
            for (int y = 0; y < r.h; ++y) {
                for (int x = 0; x < r.w; ++x) {
                    if (!r.img.at(x, y)) continue;
                    if (r.at(x + d.x, y + d.y)) continue;  // not a border pixel for this pass
                    const int nb = r.neighbor_count(x, y);
                    if (nb <= 1) continue;  // keep endpoints and isolated pixels
                    if (!simple[r.pattern(x, y)]) continue;
                    r.img.at(x, y) = 0;
                    changed = true;
                }
            }
        }
    }

    std::vector<Cell> out;
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x)
            if (r.img.at(x, y)) out.push_back({x + r.x0, y + r.y0});
    return out;
}

SkeletonGraph skeletonize(int width, int height, double resolution,
                          std::span<const Cell> region, Cell anchor_hint) {
    SkeletonGraph g;
    if (region.empty()) {
        g.nodes.push_back(anchor_hint);
        g.anchor = 0;
        return g;
    }
    const std::vector<Cell> skeleton = thin_region(width, height, region);
    Raster r = rasterize(skeleton);

    auto degree = [&](Cell c) { return r.neighbor_count(c.x - r.x0, c.y - r.y0); };

    Cell anchor_cell = skeleton.front();
    long best = std::numeric_limits<long>::max();
    for (const Cell& c : skeleton) {
        const long d2 = long(c.x - anchor_hint.x) * (c.x - anchor_hint.x) +
                        long(c.y - anchor_hint.y) * (c.y - anchor_hint.y);
        if (d2 < best) {
            best = d2;
            anchor_cell = c;
        }
    }

    std::vector<Cell> node_cells;
    for (const Cell& c : skeleton)
        if (degree(c) != 2 || c == anchor_cell) node_cells.push_back(c);
    // A pure cycle through the anchor still lands here because the anchor is
    // always a node.
    g.nodes = node_cells;
    Grid<int> node_index(r.w, r.h, -1);
    for (size_t i = 0; i < node_cells.size(); ++i)
        node_index.at(node_cells[i].x - r.x0, node_cells[i].y - r.y0) = static_cast<int>(i);
    g.anchor = node_index.at(anchor_cell.x - r.x0, anchor_cell.y - r.y0);

    auto step_len = [&](Cell a, Cell b) {
        return (a.x != b.x && a.y != b.y) ? resolution * kSqrt2 : resolution;
    };
    std::unordered_set<std::uint64_t> walked;  // directed (node cell -> first step)
    auto key = [&](Cell a, Cell b) {
        return (std::uint64_t(std::uint32_t(a.y * width + a.x)) << 32) |
               std::uint32_t(b.y * width + b.x);
    };
    for (const Cell& n : node_cells) {
        for (const Cell& d : kRing) {
            Cell cur{n.x + d.x, n.y + d.y};
            if (!r.at(cur.x - r.x0, cur.y - r.y0)) continue;
            if (walked.count(key(n, cur))) continue;
            walked.insert(key(n, cur));
            Cell prev = n;
            double len = step_len(n, cur);
            while (node_index.at(cur.x - r.x0, cur.y - r.y0) < 0) {
                Cell next = cur;
                for (const Cell& dd : kRing) {
                    const Cell cand{cur.x + dd.x, cur.y + dd.y};
                    if (cand == prev) continue;
                    if (r.at(cand.x - r.x0, cand.y - r.y0)) {
                        next = cand;
                        break;
                    }
                }
                if (next == cur) break;  // dangling chain end (degree-1 cells are nodes, so unreachable)
                len += step_len(cur, next);
                prev = cur;
                cur = next;
            }
            const int end_index = node_index.at(cur.x - r.x0, cur.y - r.y0);
            if (end_index < 0) continue;
            walked.insert(key(cur, prev));
            const int start_index = node_index.at(n.x - r.x0, n.y - r.y0);
            g.edges.push_back({start_index, end_index, len});
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Tour solvers
// ---------------------------------------------------------------------------

double held_karp_tour(const std::vector<std::vector<double>>& dist, int start) {
    const int n = static_cast<int>(dist.size());
    if (n <= 1) return 0.0;
    std::vector<int> others;
    for (int i = 0; i < n; ++i)
        if (i != start) others.push_back(i);
    const int m = n - 1;
    const size_t n_masks = size_t{1} << m;
    std::vector<double> dp(n_masks * m, kInfCost);
    for (int j = 0; j < m; ++j)
        dp[(size_t{1} << j) * m + j] = dist[start][others[j]];
    for (size_t mask = 1; mask < n_masks; ++mask) {
        for (int j = 0; j < m; ++j) {
            if (!(mask & (size_t{1} << j))) continue;
            const double base = dp[mask * m + j];
            if (base >= kInfCost) continue;
            for (int k = 0; k < m; ++k) {
                if (mask & (size_t{1} << k)) continue;
                const size_t next = mask | (size_t{1} << k);
                double& slot = dp[next * m + k];
                const double cand = base + dist[others[j]][others[k]];
                if (cand < slot) slot = cand;
            }
        }
    }
    double best = kInfCost;
    for (int j = 0; j < m; ++j)
        best = std::min(best, dp[(n_masks - 1) * m + j] + dist[others[j]][start]);
    return best;
}

namespace {

double tour_length(const std::vector<std::vector<double>>& dist, const std::vector<int>& tour) {
    double len = 0.0;
    for (size_t i = 0; i < tour.size(); ++i)
        len += dist[tour[i]][tour[(i + 1) % tour.size()]];
    return len;
}

}  // namespace

double heuristic_tour(const std::vector<std::vector<double>>& dist, int start) {
    const int n = static_cast<int>(dist.size());
    if (n <= 1) return 0.0;
    std::vector<int> tour{start};
    std::vector<bool> used(n, false);
    used[start] = true;
    for (int k = 1; k < n; ++k) {
        const int cur = tour.back();
        int best = -1;
        for (int j = 0; j < n; ++j)
            if (!used[j] && (best < 0 || dist[cur][j] < dist[cur][best])) best = j;
        used[best] = true;
        tour.push_back(best);
    }
    // 2-opt until no improving segment reversal remains.
    bool improved = true;
    int rounds = 0;
    while (improved && rounds++ < 200) {
        improved = false;
        for (int i = 0; i < n - 1; ++i) {
            for (int k = i + 1; k < n; ++k) {
                if (i == 0 && k == n - 1) continue;  // same edge pair
                const int a = tour[i == 0 ? n - 1 : i - 1], b = tour[i];
                const int c = tour[k], d = tour[(k + 1) % n];
                const double delta = dist[a][c] + dist[b][d] - dist[a][b] - dist[c][d];
                if (delta < -1e-12) {
                    std::reverse(tour.begin() + i, tour.begin() + k + 1);
                    improved = true;
                }
            }
        }
    }
    return tour_length(dist, tour);
}

double tsp_tour_length(const std::vector<std::vector<double>>& dist, int start) {
    return static_cast<int>(dist.size()) <= kExactTourNodes ? held_karp_tour(dist, start)
                                                            : heuristic_tour(dist, start);
}

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint8_t> unknown_free_mask(const GroundTruthEnvironment& env,
                                            const PartialMap& map) {
    std::vector<std::uint8_t> mask(static_cast<size_t>(env.width) * env.height, 0);
    for (int y = 0; y < env.height; ++y)
        for (int x = 0; x < env.width; ++x)
            mask[static_cast<size_t>(y) * env.width + x] =
                env.free({x, y}) && map.occupancy({x, y}) == kUnknown;
    return mask;
}

}  // namespace

PsRsLabel label_ps_rs(const GroundTruthEnvironment& env, const PartialMap& map,
                      const Frontier& frontier, Point goal) {
    const Cell goal_cell = env.cell_of(goal);
    if (!env.in_bounds(goal_cell) || env.occupied(goal_cell))
        throw std::invalid_argument("label_ps_rs: goal not in free space");

    std::vector<std::uint8_t> mask = unknown_free_mask(env, map);
    for (const Cell& c : frontier.cells)
        mask[static_cast<size_t>(c.y) * env.width + c.x] = 1;

    const DistanceField any = dijkstra_field(env.width, env.height, env.resolution, mask,
                                             std::span<const Cell>(frontier.cells));
    if (!any.reachable(goal_cell)) return {0, 0.0};

    const Cell src[1] = {frontier.centroid};
    const DistanceField from_centroid =
        dijkstra_field(env.width, env.height, env.resolution, std::move(mask), src);
    const double r_s =
        from_centroid.reachable(goal_cell) ? from_centroid.at(goal_cell) : any.at(goal_cell);
    return {1, r_s};
}

double label_re(const GroundTruthEnvironment& env, const PartialMap& map,
                const Frontier& frontier) {
    const std::vector<std::uint8_t> mask = unknown_free_mask(env, map);
    const int w = env.width;

    // Flood the unknown free space behind the frontier, component by
    // component (seeds are the unknown 4-neighbors of frontier cells).
    Grid<std::uint8_t> seen(env.width, env.height, 0);
    std::vector<std::vector<Cell>> components;
    for (const Cell& fc : frontier.cells) {
        for (const Cell& d : kNeighbors4) {
            const Cell seed{fc.x + d.x, fc.y + d.y};
            if (!env.in_bounds(seed) || seen.at(seed)) continue;
            if (!mask[static_cast<size_t>(seed.y) * w + seed.x]) continue;
            std::vector<Cell> component;
            std::vector<Cell> stack{seed};
            seen.at(seed) = 1;
            while (!stack.empty()) {
                const Cell c = stack.back();
                stack.pop_back();
                component.push_back(c);
                for (const Cell& dd : kNeighbors8) {
                    const Cell n{c.x + dd.x, c.y + dd.y};
                    if (!env.in_bounds(n) || seen.at(n)) continue;
                    if (!mask[static_cast<size_t>(n.y) * w + n.x]) continue;
                    seen.at(n) = 1;
                    stack.push_back(n);
                }
            }
            components.push_back(std::move(component));
        }
    }
    if (components.empty()) return 0.0;

    double total = 0.0;
    for (const std::vector<Cell>& component : components) {
        const SkeletonGraph g =
            skeletonize(env.width, env.height, env.resolution, component, frontier.centroid);
        const int n = static_cast<int>(g.nodes.size());
        if (n <= 1) continue;
        // Pairwise skeleton geodesics between graph nodes.
        std::vector<std::vector<std::pair<int, double>>> adj(n);
        for (const SkeletonGraph::Edge& e : g.edges) {
            if (e.a == e.b) continue;
            adj[e.a].push_back({e.b, e.length});
            adj[e.b].push_back({e.a, e.length});
        }
        std::vector<std::vector<double>> dist(n, std::vector<double>(n, kInfCost));
        for (int s = 0; s < n; ++s) {
            std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                                std::greater<>> pq;
            dist[s][s] = 0.0;
            pq.emplace(0.0, s);
            while (!pq.empty()) {
                const auto [d, u] = pq.top();
                pq.pop();
                if (d > dist[s][u]) continue;
                for (const auto& [v, len] : adj[u]) {
                    if (d + len < dist[s][v]) {
                        dist[s][v] = d + len;
                        pq.emplace(dist[s][v], v);
                    }
                }
            }
        }
        total += tsp_tour_length(dist, g.anchor);
    }
    return total;
}

LabeledSubgoal label_subgoal(const GroundTruthEnvironment& env, const PartialMap& map,
                             const Frontier& frontier, Point goal) {
    LabeledSubgoal out;
    out.frontier_id = frontier.id;
    const PsRsLabel ps = label_ps_rs(env, map, frontier, goal);
    out.p_s = ps.p_s;
    out.mask_ps = true;
    if (ps.p_s == 1) {
        out.r_s = ps.r_s;
        out.mask_rs = true;
    } else {
        out.r_e = label_re(env, map, frontier);
        out.mask_re = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

namespace {

struct EpisodeWork {
    int env_index = 0;
    int episode = 0;
};

std::vector<DatasetRecord> run_label_episode(const GroundTruthEnvironment& env, int episode,
                                             const DatasetConfig& cfg) {
    std::mt19937_64 rng(derive_seed(cfg.seed, fnv1a64(env.id.data(), env.id.size()) + episode));
    const auto sampled = sample_episode(env, rng, cfg.dist_min, cfg.dist_max);
    if (!sampled) return {};

    std::vector<DatasetRecord> records;
    std::vector<std::uint64_t> prev_ids;
    const Point goal = sampled->goal;

    NavConfig nav;
    nav.budget = cfg.budget;
    nav.fov_deg = cfg.fov_deg;
    nav.sensor_range = cfg.sensor_range;
    nav.min_frontier_cells = cfg.min_frontier_cells;
    nav.observer = [&](const StepEvent& ev) {
        if (ev.goal_known_reachable) return;
        std::vector<Frontier> frontiers =
            planning_frontiers(*ev.map, ev.pose, cfg.min_frontier_cells);
        std::vector<std::uint64_t> ids;
        ids.reserve(frontiers.size());
        for (const Frontier& f : frontiers) ids.push_back(f.id);
        if (ids == prev_ids) return;
        prev_ids = std::move(ids);
        for (const Frontier& f : frontiers) {
            const LabeledSubgoal label = label_subgoal(env, *ev.map, f, goal);
            DatasetRecord rec;
            rec.env_id = env.id;
            rec.episode = episode;
            rec.t = ev.t;
            rec.frontier_id = f.id;
            rec.features = featurize(*ev.map, ev.pose, f, goal);
            rec.map_diag = ev.map->diagonal_m();
            rec.p_s = label.p_s;
            rec.r_s = label.r_s;
            rec.r_e = label.r_e;
            rec.mask_rs = label.mask_rs;
            rec.mask_re = label.mask_re;
            records.push_back(std::move(rec));
        }
    };
    navigate_episode(env, sampled->start, goal, Policy::optimistic(), nav);
    return records;
}

}  // namespace

DatasetSummary generate_dataset(std::span<const GroundTruthEnvironment> corpus,
                                const DatasetConfig& cfg, const RecordSink& sink) {
    if (corpus.empty()) throw std::invalid_argument("generate_dataset: empty corpus");
    std::vector<EpisodeWork> work;
    for (int e = 0; e < static_cast<int>(corpus.size()); ++e)
        for (int k = 0; k < cfg.episodes_per_env; ++k) work.push_back({e, k});

    std::vector<std::vector<DatasetRecord>> buffers(work.size());
    unsigned workers = cfg.parallelism > 0 ? cfg.parallelism : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, work.size()));
    std::atomic<size_t> cursor{0};
    auto run = [&] {
        for (size_t i = cursor.fetch_add(1); i < work.size(); i = cursor.fetch_add(1))
            buffers[i] = run_label_episode(corpus[work[i].env_index], work[i].episode, cfg);
    };
    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(run);
        for (std::thread& th : pool) th.join();
    }

    DatasetSummary summary;
    summary.envs = static_cast<int>(corpus.size());
    for (size_t i = 0; i < buffers.size(); ++i) {
        summary.episodes += 1;
        for (DatasetRecord& rec : buffers[i]) {
            if (cfg.max_records > 0 && summary.records >= cfg.max_records) return summary;
            sink(rec);
            ++summary.records;
        }
    }
    return summary;
}

DatasetSummary generate_dataset_file(std::span<const GroundTruthEnvironment> corpus,
                                     const DatasetConfig& cfg, const std::string& out_path) {
    if (corpus.empty()) throw std::invalid_argument("generate_dataset: empty corpus");
    const int num_categories = corpus.front().num_categories;
    for (const GroundTruthEnvironment& env : corpus)
        if (env.num_categories != num_categories)
            throw std::invalid_argument("generate_dataset: corpus mixes category counts");

    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot write " + out_path);
    const FeatureSchema schema{num_categories};
    nlohmann::json header;
    header["type"] = "header";
    header["schema_version"] = FeatureSchema::kVersion;
    header["feature_dim"] = schema.dim();
    header["num_categories"] = num_categories;
    header["seed"] = cfg.seed;
    os << header.dump() << '\n';

    return generate_dataset(corpus, cfg, [&](const DatasetRecord& rec) {
        nlohmann::json j;
        j["env"] = rec.env_id;
        j["episode"] = rec.episode;
        j["t"] = rec.t;
        j["frontier"] = rec.frontier_id;
        j["features"] = rec.features;
        j["map_diag"] = rec.map_diag;
        j["p_s"] = rec.p_s;
        j["r_s"] = rec.r_s;
        j["r_e"] = rec.r_e;
        j["mask_rs"] = rec.mask_rs;
        j["mask_re"] = rec.mask_re;
        os << j.dump() << '\n';
    });
}

Dataset load_dataset_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    Dataset ds;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("dataset: empty file");
    {
        const nlohmann::json header = nlohmann::json::parse(line);
        if (header.value("type", "") != "header")
            throw std::runtime_error("dataset: missing header record");
        ds.schema_version = header.at("schema_version").get<int>();
        ds.feature_dim = header.at("feature_dim").get<int>();
        ds.num_categories = header.at("num_categories").get<int>();
        if (ds.schema_version != FeatureSchema::kVersion)
            throw std::runtime_error("dataset: unsupported schema version");
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        DatasetRecord rec;
        rec.env_id = j.at("env").get<std::string>();
        rec.episode = j.at("episode").get<int>();
        rec.t = j.at("t").get<int>();
        rec.frontier_id = j.at("frontier").get<std::uint64_t>();
        rec.features = j.at("features").get<std::vector<double>>();
        rec.map_diag = j.at("map_diag").get<double>();
        rec.p_s = j.at("p_s").get<int>();
        rec.r_s = j.at("r_s").get<double>();
        rec.r_e = j.at("r_e").get<double>();
        rec.mask_rs = j.at("mask_rs").get<bool>();
        rec.mask_re = j.at("mask_re").get<bool>();
        if (static_cast<int>(rec.features.size()) != ds.feature_dim)
            throw std::runtime_error("dataset: record feature dim mismatch");
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace lsp
