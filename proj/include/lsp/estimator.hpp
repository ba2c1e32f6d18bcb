#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lsp/costs.hpp"
#include "lsp/frontier.hpp"
#include "lsp/labels.hpp"
#include "lsp/mapping.hpp"

namespace lsp {

// Per-subgoal statistics of the unseen space behind a frontier: probability
// of leading to the goal, expected cost to the goal given success, expected
// exploration cost given failure.
struct SubgoalProperties {
    double p_s = 0.0;  // [0, 1]
    double r_s = 0.0;  // meters, >= 0
    double r_e = 0.0;  // meters, >= 0
};

class PropertyEstimator {
public:
    virtual ~PropertyEstimator() = default;
    virtual SubgoalProperties estimate(const PartialMap& map, const Pose& pose,
                                       const Frontier& frontier, Point goal) const = 0;
    virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Featurization
// ---------------------------------------------------------------------------

struct FeatureSchema {
    int num_categories = 40;
    static constexpr int kVersion = 1;

    // frontier size, robot distance, goal distance, goal bearing vs outward
    // normal, unknown fraction toward goal, boundary proximity, then the
    // semantic histogram.
    int dim() const { return 6 + num_categories; }
    std::uint64_t hash() const;
};

std::vector<double> featurize(const PartialMap& map, const Pose& pose, const Frontier& frontier,
                              Point goal);

inline constexpr double kSemanticRadiusM = 0.5;

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

// One hidden tanh layer with three heads: sigmoid for p_s, softplus for the
// two cost heads. Cost outputs are scaled back to meters by cost_scale;
// feat_mean/feat_std standardize inputs when non-empty.
struct ModelParams {
    int input_dim = 0;
    int hidden = 64;
    std::uint64_t schema_hash = 0;
    double cost_scale = 1.0;
    std::vector<double> w1;  // hidden x input_dim, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w_p, w_s, w_e;  // hidden each
    double b_p = 0.0, b_s = 0.0, b_e = 0.0;
    std::vector<double> feat_mean, feat_std;  // input_dim each, may be empty

    size_t weight_count() const {
        return w1.size() + b1.size() + w_p.size() + w_s.size() + w_e.size() + 3;
    }
};

ModelParams init_params(int input_dim, int hidden, std::uint64_t schema_hash, std::uint64_t seed);

// Throws std::invalid_argument on a feature-dimension mismatch.
SubgoalProperties predict(const ModelParams& params, std::span<const double> features);

// BCE on p_s (probabilities clamped to [1e-6, 1 - 1e-6]) plus the masked L1
// terms weighted by lambda.
double loss(const SubgoalProperties& pred, const LabeledSubgoal& label, double lambda);

inline constexpr double kProbClamp = 1e-6;

// Regression target on the model's normalized scale.
struct TrainTarget {
    double p_s = 0.0;
    double r_s = 0.0;  // already divided by cost_scale
    double r_e = 0.0;
    bool mask_rs = false;
    bool mask_re = false;
};

// Flattened-gradient companion of ModelParams (same layout).
struct ParamGrad {
    std::vector<double> w1, b1, w_p, w_s, w_e;
    double b_p = 0.0, b_s = 0.0, b_e = 0.0;
    void zero(const ModelParams& p);
    void accumulate(const ParamGrad& g, double scale);
};

// Loss and analytic gradient of one sample on the normalized scale; `grad`
// may be null for loss-only evaluation. Exposed for the finite-difference
// checks.
double loss_and_grad(const ModelParams& params, std::span<const double> features,
                     const TrainTarget& target, double lambda, ParamGrad* grad);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
    double lambda = 1e-2;
    double lr = 1e-3;
    double lr_decay = 0.1;
    int decay_every_epochs = 2;
    int epochs = 6;
    int batch_size = 32;
    std::uint64_t seed = 0;
    double val_fraction = 0.1;
    int hidden = 64;
    bool shuffle_each_epoch = true;
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double train_bce = 0.0;
    double val_loss = 0.0;
    double val_bce = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    long train_samples = 0;
    long val_samples = 0;
};

// Mini-batch gradient descent on the masked objective. Deterministic under a
// fixed seed; throws std::runtime_error if the loss goes non-finite.
std::pair<ModelParams, TrainReport> train(const Dataset& dataset, const TrainConfig& cfg);

void save_model_file(const ModelParams& params, const std::string& path);
ModelParams load_model_file(const std::string& path);
void write_train_report_csv(const TrainReport& report, std::ostream& os);

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

class LearnedEstimator : public PropertyEstimator {
public:
    explicit LearnedEstimator(ModelParams params) : params_(std::move(params)) {}
    SubgoalProperties estimate(const PartialMap& map, const Pose& pose, const Frontier& frontier,
                               Point goal) const override;
    std::string name() const override { return "lsp-learned"; }
    const ModelParams& params() const { return params_; }

private:
    ModelParams params_;
};

// Diagnostic upper bound: exact labels computed from the hidden full map. The
// undefined member of the (r_s, r_e) pair is filled with the planner's
// terminal penalty (twice the map diagonal).
class OracleEstimator : public PropertyEstimator {
public:
    explicit OracleEstimator(const GroundTruthEnvironment& env) : env_(&env) {}
    SubgoalProperties estimate(const PartialMap& map, const Pose& pose, const Frontier& frontier,
                               Point goal) const override;
    std::string name() const override { return "lsp-oracle"; }

private:
    const GroundTruthEnvironment* env_;
};

}  // namespace lsp
