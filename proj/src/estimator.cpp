#include "lsp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"
#include "lsp/labels.hpp"

namespace lsp {

std::uint64_t FeatureSchema::hash() const {
    const std::uint32_t fields[3] = {kVersion, static_cast<std::uint32_t>(num_categories),
                                     static_cast<std::uint32_t>(dim())};
    return fnv1a64(fields, sizeof(fields));
}

std::vector<double> featurize(const PartialMap& map, const Pose& pose, const Frontier& frontier,
                              Point goal) {
    const FeatureSchema schema{map.num_categories()};
    std::vector<double> f(schema.dim(), 0.0);
    const Cell centroid = frontier.centroid;
    const Point centroid_m = map.center_of(centroid);

    f[0] = static_cast<double>(frontier.cells.size());

    const double d_robot = known_distance(map, centroid, map.cell_of(pose.position()));
    f[1] = d_robot < kInfCost ? d_robot : map.diagonal_m();

    f[2] = euclid(centroid_m, goal);

    // Bearing to the goal relative to the frontier's outward normal (the mean
    // direction of the unknown cells it touches), folded to [0, pi].
    double nx = 0.0, ny = 0.0;
    for (const Cell& c : frontier.cells) {
        for (const Cell& d : kNeighbors4) {
            const Cell n{c.x + d.x, c.y + d.y};
            if (map.in_bounds(n) && map.occupancy(n) == kUnknown) {
                nx += d.x;
                ny += d.y;
            }
        }
    }
    if (std::abs(nx) < 1e-12 && std::abs(ny) < 1e-12) {
        f[3] = 1.5707963267948966;  // undetermined normal: neutral quarter turn
    } else {
        const double normal_deg = std::atan2(ny, nx) / kDegToRad;
        const double goal_deg =
            std::atan2(goal.y - centroid_m.y, goal.x - centroid_m.x) / kDegToRad;
        f[3] = std::abs(wrap_angle(goal_deg - normal_deg)) * kDegToRad;
    }

    int segment_cells = 0, segment_unknown = 0;
    trace_segment(centroid_m, goal, map.resolution(), [&](Cell c) {
        if (!map.in_bounds(c)) return false;
        ++segment_cells;
        segment_unknown += map.occupancy(c) == kUnknown;
        return true;
    });
    f[4] = segment_cells > 0 ? static_cast<double>(segment_unknown) / segment_cells : 0.0;

    const double width_m = map.width() * map.resolution();
    const double height_m = map.height() * map.resolution();
    f[5] = std::min({centroid_m.x, centroid_m.y, width_m - centroid_m.x, height_m - centroid_m.y});

    // Normalized semantic histogram around the centroid; all-zero when no
    // object has been detected nearby.
    const int radius_cells = static_cast<int>(std::ceil(kSemanticRadiusM / map.resolution()));
    int total = 0;
    for (int dy = -radius_cells; dy <= radius_cells; ++dy) {
        for (int dx = -radius_cells; dx <= radius_cells; ++dx) {
            const Cell c{centroid.x + dx, centroid.y + dy};
            if (!map.in_bounds(c)) continue;
            if (euclid(map.center_of(c), centroid_m) > kSemanticRadiusM) continue;
            const std::uint16_t id = map.semantic(c);
            if (id >= 1 && id <= map.num_categories()) {
                f[6 + id - 1] += 1.0;
                ++total;
            }
        }
    }
    if (total > 0)
        for (int i = 0; i < map.num_categories(); ++i) f[6 + i] /= total;
    return f;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

namespace {

double rng01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double softplus(double z) {
    // log(1 + e^z), stable for large |z|.
    return z > 30.0 ? z : std::log1p(std::exp(z));
}

struct Forward {
    std::vector<double> x;  // standardized input
    std::vector<double> h;  // tanh activations
    double z_p = 0, z_s = 0, z_e = 0;
};

Forward forward_pass(const ModelParams& p, std::span<const double> features) {
    if (static_cast<int>(features.size()) != p.input_dim)
        throw std::invalid_argument("predict: feature dimension mismatch");
    Forward fw;
    fw.x.assign(features.begin(), features.end());
    if (!p.feat_mean.empty()) {
        for (int i = 0; i < p.input_dim; ++i)
            fw.x[i] = (fw.x[i] - p.feat_mean[i]) / p.feat_std[i];
    }
    fw.h.resize(p.hidden);
    for (int j = 0; j < p.hidden; ++j) {
        double a = p.b1[j];
        const double* row = &p.w1[static_cast<size_t>(j) * p.input_dim];
        for (int i = 0; i < p.input_dim; ++i) a += row[i] * fw.x[i];
        fw.h[j] = std::tanh(a);
    }
    fw.z_p = p.b_p;
    fw.z_s = p.b_s;
    fw.z_e = p.b_e;
    for (int j = 0; j < p.hidden; ++j) {
        fw.z_p += p.w_p[j] * fw.h[j];
        fw.z_s += p.w_s[j] * fw.h[j];
        fw.z_e += p.w_e[j] * fw.h[j];
    }
    return fw;
}

}  // namespace

ModelParams init_params(int input_dim, int hidden, std::uint64_t schema_hash, std::uint64_t seed) {
    ModelParams p;
    p.input_dim = input_dim;
    p.hidden = hidden;
    p.schema_hash = schema_hash;
    std::mt19937_64 rng(derive_seed(seed, 0x7ea51));
    auto uniform = [&](double a) { return (2.0 * rng01(rng) - 1.0) * a; };
    const double a1 = std::sqrt(6.0 / (input_dim + hidden));
    p.w1.resize(static_cast<size_t>(hidden) * input_dim);
    for (double& w : p.w1) w = uniform(a1);
    p.b1.assign(hidden, 0.0);
    const double a2 = std::sqrt(6.0 / (hidden + 1));
    p.w_p.resize(hidden);
    p.w_s.resize(hidden);
    p.w_e.resize(hidden);
    for (double& w : p.w_p) w = uniform(a2);
    for (double& w : p.w_s) w = uniform(a2);
    for (double& w : p.w_e) w = uniform(a2);
    return p;
}

SubgoalProperties predict(const ModelParams& params, std::span<const double> features) {
    const Forward fw = forward_pass(params, features);
    SubgoalProperties out;
    out.p_s = sigmoid(fw.z_p);
    out.r_s = softplus(fw.z_s) * params.cost_scale;
    out.r_e = softplus(fw.z_e) * params.cost_scale;
    return out;
}

double loss(const SubgoalProperties& pred, const LabeledSubgoal& label, double lambda) {
    const double p = std::clamp(pred.p_s, kProbClamp, 1.0 - kProbClamp);
    double total = label.p_s == 1 ? -std::log(p) : -std::log(1.0 - p);
    if (label.mask_rs) total += lambda * std::abs(pred.r_s - label.r_s);
    if (label.mask_re) total += lambda * std::abs(pred.r_e - label.r_e);
    return total;
}

void ParamGrad::zero(const ModelParams& p) {
    w1.assign(p.w1.size(), 0.0);
    b1.assign(p.b1.size(), 0.0);
    w_p.assign(p.w_p.size(), 0.0);
    w_s.assign(p.w_s.size(), 0.0);
    w_e.assign(p.w_e.size(), 0.0);
    b_p = b_s = b_e = 0.0;
}

void ParamGrad::accumulate(const ParamGrad& g, double scale) {
    for (size_t i = 0; i < w1.size(); ++i) w1[i] += scale * g.w1[i];
    for (size_t i = 0; i < b1.size(); ++i) b1[i] += scale * g.b1[i];
    for (size_t i = 0; i < w_p.size(); ++i) w_p[i] += scale * g.w_p[i];
    for (size_t i = 0; i < w_s.size(); ++i) w_s[i] += scale * g.w_s[i];
    for (size_t i = 0; i < w_e.size(); ++i) w_e[i] += scale * g.w_e[i];
    b_p += scale * g.b_p;
    b_s += scale * g.b_s;
    b_e += scale * g.b_e;
}

double loss_and_grad(const ModelParams& params, std::span<const double> features,
                     const TrainTarget& target, double lambda, ParamGrad* grad) {
    const Forward fw = forward_pass(params, features);
    const double p = sigmoid(fw.z_p);
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    double total = target.p_s >= 0.5 ? -std::log(pc) : -std::log(1.0 - pc);
    const double r_s = softplus(fw.z_s);
    const double r_e = softplus(fw.z_e);
    if (target.mask_rs) total += lambda * std::abs(r_s - target.r_s);
    if (target.mask_re) total += lambda * std::abs(r_e - target.r_e);
    if (!grad) return total;

    // Clamped probabilities sit on a flat section of the loss.
    const double d_zp = (p > kProbClamp && p < 1.0 - kProbClamp) ? p - target.p_s : 0.0;
    const double sign_s = r_s > target.r_s ? 1.0 : (r_s < target.r_s ? -1.0 : 0.0);
    const double sign_e = r_e > target.r_e ? 1.0 : (r_e < target.r_e ? -1.0 : 0.0);
    const double d_zs = target.mask_rs ? lambda * sign_s * sigmoid(fw.z_s) : 0.0;
    const double d_ze = target.mask_re ? lambda * sign_e * sigmoid(fw.z_e) : 0.0;

    grad->zero(params);
    grad->b_p = d_zp;
    grad->b_s = d_zs;
    grad->b_e = d_ze;
    for (int j = 0; j < params.hidden; ++j) {
        grad->w_p[j] = d_zp * fw.h[j];
        grad->w_s[j] = d_zs * fw.h[j];
        grad->w_e[j] = d_ze * fw.h[j];
        const double d_h = d_zp * params.w_p[j] + d_zs * params.w_s[j] + d_ze * params.w_e[j];
        const double d_a = d_h * (1.0 - fw.h[j] * fw.h[j]);
        grad->b1[j] = d_a;
        double* row = &grad->w1[static_cast<size_t>(j) * params.input_dim];
        for (int i = 0; i < params.input_dim; ++i) row[i] = d_a * fw.x[i];
    }
    return total;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

TrainTarget target_of(const DatasetRecord& rec, double cost_scale) {
    TrainTarget t;
    t.p_s = rec.p_s;
    t.r_s = rec.mask_rs ? rec.r_s / cost_scale : 0.0;
    t.r_e = rec.mask_re ? rec.r_e / cost_scale : 0.0;
    t.mask_rs = rec.mask_rs;
    t.mask_re = rec.mask_re;
    return t;
}

struct SplitEval {
    double loss = 0.0;
    double bce = 0.0;
};

SplitEval evaluate_split(const ModelParams& params, const Dataset& ds,
                         std::span<const size_t> indices, double lambda, double cost_scale) {
    SplitEval ev;
    if (indices.empty()) return ev;
    for (size_t i : indices) {
        const DatasetRecord& rec = ds.records[i];
        const TrainTarget t = target_of(rec, cost_scale);
        ev.loss += loss_and_grad(params, rec.features, t, lambda, nullptr);
        TrainTarget bce_only = t;
        bce_only.mask_rs = bce_only.mask_re = false;
        ev.bce += loss_and_grad(params, rec.features, bce_only, lambda, nullptr);
    }
    ev.loss /= static_cast<double>(indices.size());
    ev.bce /= static_cast<double>(indices.size());
    return ev;
}

}  // namespace

std::pair<ModelParams, TrainReport> train(const Dataset& dataset, const TrainConfig& cfg) {
    if (dataset.records.empty()) throw std::invalid_argument("train: empty dataset");
    if (cfg.epochs < 1 || cfg.lambda <= 0.0) throw std::invalid_argument("train: bad config");

    const FeatureSchema schema{dataset.num_categories};
    if (schema.dim() != dataset.feature_dim)
        throw std::invalid_argument("train: dataset schema mismatch");

    double cost_scale = 0.0;
    for (const DatasetRecord& rec : dataset.records) cost_scale = std::max(cost_scale, rec.map_diag);
    if (cost_scale <= 0.0) cost_scale = 1.0;

    // Deterministic split, then per-feature standardization from the train half.
    const size_t n = dataset.records.size();
    std::vector<size_t> indices(n);
    std::iota(indices.begin(), indices.end(), size_t{0});
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x5717));
    std::shuffle(indices.begin(), indices.end(), rng);
    const size_t n_val = std::min(n - 1, static_cast<size_t>(std::llround(cfg.val_fraction * n)));
    std::vector<size_t> val_idx(indices.end() - n_val, indices.end());
    std::vector<size_t> train_idx(indices.begin(), indices.end() - n_val);

    ModelParams params = init_params(dataset.feature_dim, cfg.hidden, schema.hash(), cfg.seed);
    params.cost_scale = cost_scale;
    params.feat_mean.assign(dataset.feature_dim, 0.0);
    params.feat_std.assign(dataset.feature_dim, 1.0);
    for (size_t i : train_idx)
        for (int j = 0; j < dataset.feature_dim; ++j)
            params.feat_mean[j] += dataset.records[i].features[j];
    for (int j = 0; j < dataset.feature_dim; ++j)
        params.feat_mean[j] /= static_cast<double>(train_idx.size());
    std::vector<double> var(dataset.feature_dim, 0.0);
    for (size_t i : train_idx)
        for (int j = 0; j < dataset.feature_dim; ++j) {
            const double d = dataset.records[i].features[j] - params.feat_mean[j];
            var[j] += d * d;
        }
    for (int j = 0; j < dataset.feature_dim; ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(train_idx.size()));
        params.feat_std[j] = sd > 1e-9 ? sd : 1.0;
    }

    TrainReport report;
    report.train_samples = static_cast<long>(train_idx.size());
    report.val_samples = static_cast<long>(val_idx.size());

    const int batch = std::max(1, cfg.batch_size);
    ParamGrad g, batch_grad;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr =
            cfg.lr * std::pow(cfg.lr_decay, (epoch - 1) / std::max(1, cfg.decay_every_epochs));
        if (cfg.shuffle_each_epoch) std::shuffle(train_idx.begin(), train_idx.end(), rng);

        double epoch_loss = 0.0;
        for (size_t begin = 0; begin < train_idx.size(); begin += batch) {
            const size_t end = std::min(train_idx.size(), begin + batch);
            batch_grad.zero(params);
            double batch_loss = 0.0;
            for (size_t k = begin; k < end; ++k) {
                const DatasetRecord& rec = dataset.records[train_idx[k]];
                const TrainTarget t = target_of(rec, cost_scale);
                batch_loss += loss_and_grad(params, rec.features, t, cfg.lambda, &g);
                batch_grad.accumulate(g, 1.0);
            }
            const double inv = 1.0 / static_cast<double>(end - begin);
            batch_loss *= inv;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch));
            epoch_loss += batch_loss * static_cast<double>(end - begin);
            const double step = lr * inv;
            for (size_t i = 0; i < params.w1.size(); ++i) params.w1[i] -= step * batch_grad.w1[i];
            for (size_t i = 0; i < params.b1.size(); ++i) params.b1[i] -= step * batch_grad.b1[i];
            for (int j = 0; j < params.hidden; ++j) {
                params.w_p[j] -= step * batch_grad.w_p[j];
                params.w_s[j] -= step * batch_grad.w_s[j];
                params.w_e[j] -= step * batch_grad.w_e[j];
            }
            params.b_p -= step * batch_grad.b_p;
            params.b_s -= step * batch_grad.b_s;
            params.b_e -= step * batch_grad.b_e;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr;
        stats.train_loss = epoch_loss / static_cast<double>(train_idx.size());
        const SplitEval train_eval = evaluate_split(params, dataset, train_idx, cfg.lambda, cost_scale);
        const SplitEval val_eval = evaluate_split(params, dataset, val_idx, cfg.lambda, cost_scale);
        stats.train_bce = train_eval.bce;
        stats.val_loss = val_eval.loss;
        stats.val_bce = val_eval.bce;
        report.epochs.push_back(stats);
    }
    return {std::move(params), std::move(report)};
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_model_file(const ModelParams& params, const std::string& path) {
    nlohmann::json j;
    j["format"] = "lspnav-model";
    j["version"] = 1;
    j["input_dim"] = params.input_dim;
    j["hidden"] = params.hidden;
    j["schema_hash"] = params.schema_hash;
    j["cost_scale"] = params.cost_scale;
    j["w1"] = params.w1;
    j["b1"] = params.b1;
    j["w_p"] = params.w_p;
    j["w_s"] = params.w_s;
    j["w_e"] = params.w_e;
    j["b_p"] = params.b_p;
    j["b_s"] = params.b_s;
    j["b_e"] = params.b_e;
    j["feat_mean"] = params.feat_mean;
    j["feat_std"] = params.feat_std;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << j.dump(2) << '\n';
}

ModelParams load_model_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    is >> j;
    if (j.value("format", "") != "lspnav-model")
        throw std::runtime_error("model load: unrecognized file");
    ModelParams p;
    p.input_dim = j.at("input_dim").get<int>();
    p.hidden = j.at("hidden").get<int>();
    p.schema_hash = j.at("schema_hash").get<std::uint64_t>();
    p.cost_scale = j.at("cost_scale").get<double>();
    p.w1 = j.at("w1").get<std::vector<double>>();
    p.b1 = j.at("b1").get<std::vector<double>>();
    p.w_p = j.at("w_p").get<std::vector<double>>();
    p.w_s = j.at("w_s").get<std::vector<double>>();
    p.w_e = j.at("w_e").get<std::vector<double>>();
    p.b_p = j.at("b_p").get<double>();
    p.b_s = j.at("b_s").get<double>();
    p.b_e = j.at("b_e").get<double>();
    p.feat_mean = j.at("feat_mean").get<std::vector<double>>();
    p.feat_std = j.at("feat_std").get<std::vector<double>>();
    if (static_cast<int>(p.w1.size()) != p.hidden * p.input_dim)
        throw std::runtime_error("model load: inconsistent weight shapes");
    return p;
}

void write_train_report_csv(const TrainReport& report, std::ostream& os) {
    os << "epoch,lr,train_loss,train_bce,val_loss,val_bce\n";
    char buf[160];
    for (const EpochStats& e : report.epochs) {
        std::snprintf(buf, sizeof(buf), "%d,%.8f,%.8f,%.8f,%.8f,%.8f\n", e.epoch, e.lr,
                      e.train_loss, e.train_bce, e.val_loss, e.val_bce);
        os << buf;
    }
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

SubgoalProperties LearnedEstimator::estimate(const PartialMap& map, const Pose& pose,
                                             const Frontier& frontier, Point goal) const {
    return predict(params_, featurize(map, pose, frontier, goal));
}

SubgoalProperties OracleEstimator::estimate(const PartialMap& map, const Pose& pose,
                                            const Frontier& frontier, Point goal) const {
    (void)pose;
    const LabeledSubgoal label = label_subgoal(*env_, map, frontier, goal);
    // The undefined member of the pair carries the planner's terminal-penalty
    // convention (twice the map diagonal); it is weighted by zero in Q.
    const double fill = 2.0 * map.diagonal_m();
    SubgoalProperties out;
    out.p_s = label.p_s;
    out.r_s = label.mask_rs ? label.r_s : fill;
    out.r_e = label.mask_re ? label.r_e : fill;
    return out;
}

}  // namespace lsp
