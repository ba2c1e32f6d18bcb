// Command-line front end: map generation, episode generation, labeled data
// generation, training, evaluation, and run comparison.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lsp/bench.hpp"
#include "lsp/estimator.hpp"
#include "lsp/labels.hpp"

namespace fs = std::filesystem;
using namespace lsp;

namespace {

int cmd_gen_maps(int count, std::uint64_t seed, const std::string& out,
                 const GeneratorConfig& cfg) {
    fs::create_directories(out);
    for (int i = 0; i < count; ++i) {
        GroundTruthEnvironment env = generate_environment(derive_seed(seed, i), cfg);
        char name[64];
        std::snprintf(name, sizeof(name), "map_%04d", i);
        env.id = name;
        save_environment_file(env, (fs::path(out) / (std::string(name) + ".txt")).string());
    }
    std::cout << "wrote " << count << " maps to " << out << "\n";
    return 0;
}

int cmd_gen_episodes(const std::string& corpus_dir, int count, double dist_min, double dist_max,
                     std::uint64_t seed, const std::string& out) {
    const auto corpus = load_corpus(corpus_dir);
    const auto episodes = generate_episodes(corpus, count, seed, dist_min, dist_max);
    save_episodes(episodes, seed, out);
    std::cout << "wrote " << episodes.size() << " episodes to " << out << "\n";
    return 0;
}

int cmd_gen_data(const std::string& corpus_dir, const DatasetConfig& cfg,
                 const std::string& out) {
    const auto corpus = load_corpus(corpus_dir);
    const DatasetSummary s = generate_dataset_file(corpus, cfg, out);
    std::cout << "wrote " << s.records << " records from " << s.episodes << " episodes over "
              << s.envs << " environments to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& data_path, const TrainConfig& cfg, const std::string& out,
              const std::string& report_path) {
    const Dataset ds = load_dataset_file(data_path);
    auto [params, report] = train(ds, cfg);
    save_model_file(params, out);
    if (!report_path.empty()) {
        std::ofstream os(report_path);
        if (!os) throw std::runtime_error("cannot write " + report_path);
        write_train_report_csv(report, os);
    }
    const EpochStats& last = report.epochs.back();
    std::printf("trained on %ld samples (%ld val): train_loss %.4f val_loss %.4f val_bce %.4f\n",
                report.train_samples, report.val_samples, last.train_loss, last.val_loss,
                last.val_bce);
    std::cout << "model written to " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& corpus_dir, const std::string& episodes_path,
             const std::string& policy_name, const std::string& model,
             const ExperimentConfig& cfg) {
    const auto corpus = load_corpus(corpus_dir);
    const auto episodes = load_episodes(episodes_path);
    const PolicySpec policy = PolicySpec::parse(policy_name, model);
    const PolicySpec policies[1] = {policy};
    const ExperimentOutput out = run_experiment(corpus, episodes, policies, cfg);
    const MetricsSummary& s = out.summaries.at(policy.name);
    std::printf("%s: episodes %d success %.3f spl %.3f softspl %.3f\n", policy.name.c_str(),
                s.episodes, s.success_rate, s.spl, s.softspl);
    return 0;
}

int cmd_compare(const std::vector<std::string>& runs, const std::string& out) {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    write_comparison_csv(runs, os);
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frontier-subgoal point-goal navigation benchmark"};
    app.require_subcommand(1);

    // gen-maps
    auto* gen_maps = app.add_subcommand("gen-maps", "Generate a map corpus");
    int gm_count = 10;
    std::uint64_t gm_seed = 0;
    std::string gm_out = "maps";
    GeneratorConfig gm_cfg;
    gen_maps->add_option("--count", gm_count, "Number of maps");
    gen_maps->add_option("--seed", gm_seed, "Root seed");
    gen_maps->add_option("--out", gm_out, "Output directory")->required();
    gen_maps->add_option("--width", gm_cfg.width);
    gen_maps->add_option("--height", gm_cfg.height);
    gen_maps->add_option("--rooms-min", gm_cfg.rooms_min);
    gen_maps->add_option("--rooms-max", gm_cfg.rooms_max);
    gen_maps->add_option("--corridor-width", gm_cfg.corridor_width);
    gen_maps->add_option("--dead-end-density", gm_cfg.dead_end_density);
    gen_maps->add_option("--extra-connections", gm_cfg.extra_connections);

    // gen-episodes
    auto* gen_eps = app.add_subcommand("gen-episodes", "Generate evaluation episodes");
    std::string ge_corpus, ge_out = "episodes.jsonl";
    int ge_count = 100;
    double ge_min = 2.0, ge_max = 15.0;
    std::uint64_t ge_seed = 0;
    gen_eps->add_option("--corpus", ge_corpus, "Map directory")->required();
    gen_eps->add_option("--count", ge_count);
    gen_eps->add_option("--dist-min", ge_min, "Min geodesic length (m)");
    gen_eps->add_option("--dist-max", ge_max, "Max geodesic length (m)");
    gen_eps->add_option("--seed", ge_seed);
    gen_eps->add_option("--out", ge_out);

    // gen-data
    auto* gen_data = app.add_subcommand("gen-data", "Generate labeled subgoal records");
    std::string gd_corpus, gd_out = "dataset.jsonl";
    DatasetConfig gd_cfg;
    gen_data->add_option("--corpus", gd_corpus, "Map directory")->required();
    gen_data->add_option("--episodes-per-env", gd_cfg.episodes_per_env);
    gen_data->add_option("--seed", gd_cfg.seed);
    gen_data->add_option("--dist-min", gd_cfg.dist_min);
    gen_data->add_option("--dist-max", gd_cfg.dist_max);
    gen_data->add_option("--budget", gd_cfg.budget);
    gen_data->add_option("--max-records", gd_cfg.max_records);
    gen_data->add_option("--parallelism", gd_cfg.parallelism);
    gen_data->add_option("--out", gd_out);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the property estimator");
    std::string tr_data, tr_out = "model.json", tr_report;
    TrainConfig tr_cfg;
    train_cmd->add_option("--data", tr_data, "Dataset file")->required();
    train_cmd->add_option("--epochs", tr_cfg.epochs);
    train_cmd->add_option("--lr", tr_cfg.lr);
    train_cmd->add_option("--lambda", tr_cfg.lambda);
    train_cmd->add_option("--batch", tr_cfg.batch_size);
    train_cmd->add_option("--hidden", tr_cfg.hidden);
    train_cmd->add_option("--seed", tr_cfg.seed);
    train_cmd->add_option("--val-fraction", tr_cfg.val_fraction);
    train_cmd->add_option("--out", tr_out, "Model output path");
    train_cmd->add_option("--report", tr_report, "Training report CSV");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy over episodes");
    std::string ev_corpus, ev_episodes, ev_policy = "optimistic", ev_model, ev_out;
    ExperimentConfig ev_cfg;
    eval_cmd->add_option("--corpus", ev_corpus)->required();
    eval_cmd->add_option("--episodes", ev_episodes)->required();
    eval_cmd->add_option("--policy", ev_policy, "optimistic | lsp-oracle | lsp-learned")
        ->check(CLI::IsMember({"optimistic", "lsp-oracle", "lsp-learned"}));
    eval_cmd->add_option("--model", ev_model, "Model file (lsp-learned)");
    eval_cmd->add_option("--budget", ev_cfg.budget);
    eval_cmd->add_option("--parallelism", ev_cfg.parallelism);
    eval_cmd->add_option("--seed", ev_cfg.seed, "Recorded in output headers");
    eval_cmd->add_option("--sensor-range", ev_cfg.sensor_range);
    eval_cmd->add_option("--out", ev_out, "Output directory");

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "Merge run summaries into one table");
    std::vector<std::string> cp_runs;
    std::string cp_out = "table.csv";
    compare_cmd->add_option("--runs", cp_runs, "summary.csv paths")->required();
    compare_cmd->add_option("--out", cp_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_maps->parsed()) return cmd_gen_maps(gm_count, gm_seed, gm_out, gm_cfg);
        if (gen_eps->parsed())
            return cmd_gen_episodes(ge_corpus, ge_count, ge_min, ge_max, ge_seed, ge_out);
        if (gen_data->parsed()) return cmd_gen_data(gd_corpus, gd_cfg, gd_out);
        if (train_cmd->parsed()) return cmd_train(tr_data, tr_cfg, tr_out, tr_report);
        if (eval_cmd->parsed()) {
            ev_cfg.out_dir = ev_out;
            return cmd_eval(ev_corpus, ev_episodes, ev_policy, ev_model, ev_cfg);
        }
        if (compare_cmd->parsed()) return cmd_compare(cp_runs, cp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
