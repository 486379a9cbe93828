// Command-line front end for the grid-world experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vrmc/adaptive.hpp"
#include "vrmc/behavior_learn.hpp"
#include "vrmc/envs.hpp"
#include "vrmc/errors.hpp"
#include "vrmc/exact_dp.hpp"
#include "vrmc/experiment.hpp"
#include "vrmc/serialize.hpp"

namespace fs = std::filesystem;
using namespace vrmc;

namespace {

/// Experiment flags; each one overrides the config file only when given.
struct ExperimentFlags {
    std::string config_path;
    std::optional<std::size_t> n, policies, runs, online_steps, m, behaviors, batch, train_steps,
        threads;
    std::optional<double> slip, lr_r, lr_q, lr_q_hat, split, floor, ucb_c;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> features;
    std::vector<std::size_t> sizes;

    void add_to(CLI::App& app, bool seed_required) {
        app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
        auto* s = app.add_option("--seed", seed, "master seed");
        if (seed_required) s->required();
        app.add_option("--n", n, "grid size (width = height = horizon)");
        app.add_option("--slip", slip, "probability of the intended move");
        app.add_option("--policies", policies, "number of random target policies");
        app.add_option("--runs", runs, "online runs per policy");
        app.add_option("--online-steps", online_steps, "online step budget per run");
        app.add_option("--m", m, "offline tuples");
        app.add_option("--behaviors", behaviors, "random behavior policies besides uniform");
        app.add_option("--features", features, "tabular | linear-time");
        app.add_option("--lr-r", lr_r, "reward learning rate (all grid cells)");
        app.add_option("--lr-q", lr_q, "q learning rate (all grid cells)");
        app.add_option("--lr-q-hat", lr_q_hat, "q_hat learning rate (all grid cells)");
        app.add_option("--batch", batch, "minibatch size");
        app.add_option("--train-steps", train_steps, "SGD steps per stage");
        app.add_option("--split", split, "training fraction of the offline data");
        app.add_option("--floor", floor, "q_hat floor inside the square root");
        app.add_option("--ucb-c", ucb_c, "UCB exploration constant");
        app.add_option("--sizes", sizes, "grid sizes for the variance-ratio table")->delimiter(',');
        app.add_option("--threads", threads, "worker threads (0 = all cores)");
    }

    exp::ExperimentConfig resolve() const {
        try {
            return merge();
        } catch (const Error& e) {
            throw StageError("config", e.what());
        }
    }

private:
    exp::ExperimentConfig merge() const {
        exp::ExperimentConfig c;
        if (!config_path.empty()) c = exp::config_from_json(io::read_json_file(config_path));
        if (seed) c.seed = *seed;
        if (n) c.n = *n;
        if (slip) c.slip = *slip;
        if (policies) c.num_policies = *policies;
        if (runs) c.runs_per_policy = *runs;
        if (online_steps) c.online_steps = *online_steps;
        if (m) c.m = *m;
        if (behaviors) c.num_behaviors = *behaviors;
        if (features) c.feature_kind = feature_kind_from_string(*features);
        if (ucb_c) c.ucb_c = *ucb_c;
        if (!sizes.empty()) c.ratio_sizes = sizes;
        if (threads) c.threads = *threads;
        for (TrainConfig& cell : c.grid) {
            if (lr_r) cell.lr_r = *lr_r;
            if (lr_q) cell.lr_q = *lr_q;
            if (lr_q_hat) cell.lr_q_hat = *lr_q_hat;
            if (batch) cell.batch_size = *batch;
            if (train_steps) cell.steps = *train_steps;
            if (split) cell.train_fraction = *split;
            if (floor) cell.floor = *floor;
        }
        exp::validate(c);
        return c;
    }
};

void emit(const std::string& path, const std::string& contents) {
    if (path.empty() || path == "-") {
        std::cout << contents;
    } else {
        io::write_file(path, contents);
    }
}

template <typename W>
std::string render(W&& write) {
    std::ostringstream out;
    write(out);
    return out.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variance-reducing behavior policies for Monte Carlo policy evaluation"};
    app.require_subcommand(1);
    std::string stage;

    // gen-env
    auto* gen_env = app.add_subcommand("gen-env", "generate a random grid world");
    GridWorldSpec grid_spec;
    std::string env_out, policy_out;
    std::uint64_t policy_seed = 0;
    gen_env->add_option("--n", grid_spec.n, "grid size")->capture_default_str();
    gen_env->add_option("--slip", grid_spec.slip, "probability of the intended move")
        ->capture_default_str();
    gen_env->add_option("--seed", grid_spec.seed, "reward seed")->capture_default_str();
    gen_env->add_option("--out", env_out, "output JSON (default stdout)");
    gen_env->add_option("--policy-out", policy_out, "also write a random target policy here");
    gen_env->add_option("--policy-seed", policy_seed, "seed of that policy")->capture_default_str();
    gen_env->callback([&] {
        const TabularMDP mdp = make_gridworld(grid_spec);
        emit(env_out, io::to_json(mdp).dump(2) + "\n");
        if (!policy_out.empty()) {
            io::write_json_file(policy_out, io::to_json(random_policy(mdp.shape(), policy_seed)));
        }
    });

    // gen-offline
    auto* gen_offline = app.add_subcommand("gen-offline", "sample behavior-agnostic offline tuples");
    std::string env_in, data_out;
    std::size_t m = 100000, num_behaviors = 4;
    std::uint64_t offline_seed = 0;
    gen_offline->add_option("--env", env_in, "environment JSON")->required()->check(CLI::ExistingFile);
    gen_offline->add_option("--m", m, "number of tuples")->capture_default_str();
    gen_offline->add_option("--behaviors", num_behaviors, "random behavior policies besides uniform")
        ->capture_default_str();
    gen_offline->add_option("--seed", offline_seed, "seed")->capture_default_str();
    gen_offline->add_option("--out", data_out, "output CSV (default stdout)");
    gen_offline->callback([&] {
        const TabularMDP mdp = io::mdp_from_json(io::read_json_file(env_in));
        exp::ExperimentConfig c;
        c.seed = offline_seed;
        c.num_behaviors = num_behaviors;
        const auto behaviors = exp::behavior_policies(c, mdp.shape());
        Rng rng(exp::stage_seeds(offline_seed).offline);
        const OfflineDataset data = generate_offline(mdp, behaviors, m, rng);
        emit(data_out, render([&](std::ostream& o) { io::write_dataset_csv(o, data, false); }));
    });

    // train
    auto* train = app.add_subcommand("train", "learn mu_hat from offline data for a target policy");
    std::string data_in, policy_in, train_dir, train_config_path, train_features = "tabular";
    TrainConfig train_cfg;
    train->add_option("--data", data_in, "offline CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--policy", policy_in, "target policy JSON")->required()->check(CLI::ExistingFile);
    train->add_option("--out-dir", train_dir, "output directory")->required();
    train->add_option("--features", train_features, "tabular | linear-time")->capture_default_str();
    train->add_option("--config", train_config_path,
                      "JSON experiment config whose grid is tuned (overrides the flags below)")
        ->check(CLI::ExistingFile);
    train->add_option("--lr-r", train_cfg.lr_r)->capture_default_str();
    train->add_option("--lr-q", train_cfg.lr_q)->capture_default_str();
    train->add_option("--lr-q-hat", train_cfg.lr_q_hat)->capture_default_str();
    train->add_option("--batch", train_cfg.batch_size)->capture_default_str();
    train->add_option("--train-steps", train_cfg.steps)->capture_default_str();
    train->add_option("--split", train_cfg.train_fraction)->capture_default_str();
    train->add_option("--floor", train_cfg.floor)->capture_default_str();
    train->add_option("--seed", train_cfg.seed, "augmentation and SGD seed")->capture_default_str();
    train->callback([&] {
        const TimedPolicy pi = io::policy_from_json(io::read_json_file(policy_in));
        std::ifstream in(data_in);
        const OfflineDataset data = io::read_dataset_csv(in);
        const FeatureKind kind = feature_kind_from_string(train_features);
        std::vector<TrainConfig> grid{train_cfg};
        if (!train_config_path.empty()) {
            grid = exp::config_from_json(io::read_json_file(train_config_path)).grid;
            for (TrainConfig& cell : grid) cell.seed = train_cfg.seed;
        }
        Rng rng(derive_seed(train_cfg.seed, 0));
        const OfflineDataset augmented = augment(data, pi, rng);
        TrainConfig chosen = grid.front();
        io::Json report;
        if (grid.size() > 1) {
            const TuneResult tuned = tune(augmented, pi, kind, grid);
            chosen = tuned.best;
            report["tuning"] = {{"r_loss", tuned.r_loss},
                                {"q_loss", tuned.q_loss},
                                {"q_hat_loss", tuned.q_hat_loss}};
        }
        const LearnedBehavior learned = learn_mu_hat(augmented, pi, kind, chosen);
        const fs::path dir(train_dir);
        io::write_json_file(dir / "mu_hat.json", io::to_json(learned.mu_hat));
        io::write_json_file(dir / "model_r.json", io::to_json(learned.r.model));
        io::write_json_file(dir / "model_q.json", io::to_json(learned.q.model));
        io::write_json_file(dir / "model_q_hat.json", io::to_json(learned.q_hat.model));
        report["config"] = io::to_json(chosen);
        report["test_loss"] = {{"r", learned.r.test_loss},
                               {"q", learned.q.test_loss},
                               {"q_hat", learned.q_hat.test_loss}};
        io::write_json_file(dir / "train_report.json", report);
    });

    // error-curve
    auto* curve = app.add_subcommand("error-curve", "normalized estimation error per online step");
    ExperimentFlags curve_flags;
    std::string curve_out;
    curve_flags.add_to(*curve, false);
    curve->add_option("--out", curve_out, "output CSV (default stdout)");
    curve->callback([&] {
        const exp::ExperimentConfig c = curve_flags.resolve();
        const exp::Environment env = exp::make_environment(c, c.n);
        const auto studies = exp::study_policies(c, env);
        const auto rows = exp::error_curve(c, env.mdp, studies);
        emit(curve_out, render([&](std::ostream& o) { exp::write_curve_csv(o, rows); }));
    });

    // variance-ratio
    auto* ratio = app.add_subcommand("variance-ratio", "exact variance ratio of learned mu_hat vs pi");
    ExperimentFlags ratio_flags;
    std::string ratio_out;
    ratio_flags.add_to(*ratio, false);
    ratio->add_option("--out", ratio_out, "output CSV (default stdout)");
    ratio->callback([&] {
        const auto rows = exp::variance_ratio(ratio_flags.resolve());
        emit(ratio_out, render([&](std::ostream& o) { exp::write_ratio_csv(o, rows); }));
    });

    // adaptive
    auto* adaptive = app.add_subcommand("adaptive", "UCB selection between mu_hat and pi");
    std::string a_env, a_policy, a_mu, a_out;
    std::size_t a_episodes = 100;
    double a_c = kDefaultUcbC;
    std::uint64_t a_seed = 0;
    adaptive->add_option("--env", a_env, "environment JSON")->required()->check(CLI::ExistingFile);
    adaptive->add_option("--policy", a_policy, "target policy JSON")->required()->check(CLI::ExistingFile);
    adaptive->add_option("--mu-hat", a_mu, "behavior policy JSON")->required()->check(CLI::ExistingFile);
    adaptive->add_option("--episodes", a_episodes)->capture_default_str();
    adaptive->add_option("--ucb-c", a_c)->capture_default_str();
    adaptive->add_option("--seed", a_seed)->capture_default_str();
    adaptive->add_option("--out", a_out, "episode log CSV (default stdout)");
    adaptive->callback([&] {
        const TabularMDP mdp = io::mdp_from_json(io::read_json_file(a_env));
        const TimedPolicy pi = io::policy_from_json(io::read_json_file(a_policy));
        const TimedPolicy mu = io::policy_from_json(io::read_json_file(a_mu));
        Rng rng(a_seed);
        const AdaptiveRunResult run = run_adaptive(mdp, pi, mu, a_episodes, a_c, rng);
        emit(a_out, render([&](std::ostream& o) { io::write_adaptive_log_csv(o, run.log); }));

        const dp::QV qv = dp::compute_q_v(mdp, pi);
        const StateActionTable nu = dp::compute_nu(mdp, qv.v);
        const double var_pi = dp::total_variance(mdp, dp::pdis_variance(mdp, pi, pi, qv, nu), qv.v);
        const double var_mu = dp::total_variance(mdp, dp::pdis_variance(mdp, pi, mu, qv, nu), qv.v);
        const double regret = empirical_regret(run.log, var_mu, var_pi).back();
        std::ostream& info = (a_out.empty() || a_out == "-") ? std::cerr : std::cout;
        info << "estimate " << io::format_double(run.estimate) << " exact "
             << io::format_double(dp::expected_return(mdp, qv.v)) << " regret/K "
             << io::format_double(regret / static_cast<double>(a_episodes)) << " pi_pulls "
             << run.state.count[1] << "\n";
    });

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "run every stage into one directory");
    ExperimentFlags pipe_flags;
    std::string pipe_out;
    pipe_flags.add_to(*pipeline, true);
    pipeline->add_option("--out", pipe_out, "run directory")->required();
    pipeline->callback([&] {
        const exp::ExperimentConfig c = pipe_flags.resolve();
        exp::run_pipeline(c, pipe_out);
        std::cout << "wrote " << pipe_out << " (config " << exp::hex(exp::config_hash(c)) << ")\n";
    });

    for (auto* sub : app.get_subcommands({})) {
        sub->parse_complete_callback([&stage, sub] { stage = sub->get_name(); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: [" << (stage.empty() ? "cli" : stage) << "] " << e.what() << "\n";
        return 1;
    }
    return 0;
}
