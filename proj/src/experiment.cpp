#include "vrmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "vrmc/errors.hpp"
#include "vrmc/estimators.hpp"
#include "vrmc/exact_dp.hpp"
#include "vrmc/kernels.hpp"

namespace vrmc::exp {
namespace {

constexpr std::size_t kNumMethods = 3;
constexpr const char* kMethods[kNumMethods] = {kOnPolicy, kOffPolicy, kAdaptive};

template <typename F>
auto in_stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

double exact_variance(const TabularMDP& mdp, const TimedPolicy& pi, const TimedPolicy& mu,
                      const dp::QV& qv, const StateActionTable& nu) {
    return dp::total_variance(mdp, dp::pdis_variance(mdp, pi, mu, qv, nu), qv.v);
}

double relative_error(double estimate, double truth) {
    const double err = std::abs(estimate - truth);
    return truth != 0.0 ? err / std::abs(truth) : err;
}

std::string to_string_stream(const std::function<void(std::ostream&)>& write) {
    std::ostringstream out;
    write(out);
    return out.str();
}

} // namespace

void validate(const ExperimentConfig& c) {
    if (c.n < 2) throw ValidationError("grid size n must be at least 2");
    if (!(c.slip >= 0.0 && c.slip <= 1.0)) throw ValidationError("slip must be in [0, 1]");
    if (c.num_policies == 0) throw ValidationError("num_policies must be positive");
    if (c.runs_per_policy == 0) throw ValidationError("runs_per_policy must be positive");
    if (c.m == 0) throw ValidationError("offline size m must be positive");
    if (c.online_steps < c.n) throw ValidationError("online step budget must be at least T = n");
    if (!(c.ucb_c >= 0.0)) throw ValidationError("UCB constant must be non-negative");
    if (c.grid.empty()) throw ValidationError("training grid is empty");
    for (const TrainConfig& cell : c.grid) validate(cell);
    for (std::size_t size : c.ratio_sizes) {
        if (size < 2) throw ValidationError("ratio sizes must be at least 2");
    }
}

io::Json to_json(const ExperimentConfig& c) {
    io::Json grid = io::Json::array();
    for (const TrainConfig& cell : c.grid) grid.push_back(io::to_json(cell));
    return io::Json{{"n", c.n},
                    {"slip", c.slip},
                    {"seed", c.seed},
                    {"num_policies", c.num_policies},
                    {"runs_per_policy", c.runs_per_policy},
                    {"online_steps", c.online_steps},
                    {"m", c.m},
                    {"num_behaviors", c.num_behaviors},
                    {"feature_kind", std::string(to_string(c.feature_kind))},
                    {"grid", grid},
                    {"ucb_c", c.ucb_c},
                    {"ratio_sizes", c.ratio_sizes},
                    {"threads", c.threads}};
}

ExperimentConfig config_from_json(const io::Json& j) {
    if (!j.is_object()) throw ValidationError("experiment config must be a JSON object");
    static const std::set<std::string> known = {
        "n",   "slip",          "seed",         "num_policies", "runs_per_policy",
        "online_steps", "m",    "num_behaviors", "feature_kind", "grid",
        "ucb_c", "ratio_sizes", "threads"};
    for (const auto& item : j.items()) {
        if (!known.contains(item.key())) {
            throw ValidationError("unknown config key '" + item.key() + "'");
        }
    }
    ExperimentConfig c;
    try {
        c.n = j.value("n", c.n);
        c.slip = j.value("slip", c.slip);
        c.seed = j.value("seed", c.seed);
        c.num_policies = j.value("num_policies", c.num_policies);
        c.runs_per_policy = j.value("runs_per_policy", c.runs_per_policy);
        c.online_steps = j.value("online_steps", c.online_steps);
        c.m = j.value("m", c.m);
        c.num_behaviors = j.value("num_behaviors", c.num_behaviors);
        if (j.contains("feature_kind")) {
            c.feature_kind = feature_kind_from_string(j.at("feature_kind").get<std::string>());
        }
        if (j.contains("grid")) {
            c.grid.clear();
            for (const io::Json& cell : j.at("grid")) c.grid.push_back(io::train_config_from_json(cell));
        }
        c.ucb_c = j.value("ucb_c", c.ucb_c);
        c.ratio_sizes = j.value("ratio_sizes", c.ratio_sizes);
        c.threads = j.value("threads", c.threads);
    } catch (const io::Json::exception& e) {
        throw ValidationError(std::string("bad experiment config: ") + e.what());
    }
    validate(c);
    return c;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    io::Json j = to_json(config);
    j.erase("threads");
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex(std::uint64_t x) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (std::size_t i = 0; i < 16; ++i) s[15 - i] = digits[(x >> (4 * i)) & 0xF];
    return s;
}

StageSeeds stage_seeds(std::uint64_t seed) {
    return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3),
            derive_seed(seed, 4), derive_seed(seed, 5), derive_seed(seed, 6),
            derive_seed(seed, 7), derive_seed(seed, 8)};
}

Environment make_environment(const ExperimentConfig& config, std::size_t n) {
    const StageSeeds seeds = stage_seeds(config.seed);
    TabularMDP mdp = make_gridworld({n, config.slip, derive_seed(seeds.env, n)});
    const std::vector<TimedPolicy> behaviors = behavior_policies(config, mdp.shape());
    Rng rng(derive_seed(seeds.offline, n));
    OfflineDataset data = generate_offline(mdp, behaviors, config.m, rng);
    return {std::move(mdp), std::move(data)};
}

std::vector<TimedPolicy> behavior_policies(const ExperimentConfig& config, const Shape& shape) {
    const StageSeeds seeds = stage_seeds(config.seed);
    std::vector<TimedPolicy> out;
    out.push_back(TimedPolicy::uniform(shape));
    for (std::size_t k = 0; k < config.num_behaviors; ++k) {
        out.push_back(random_policy(shape, derive_seed(seeds.behaviors, k)));
    }
    return out;
}

TimedPolicy target_policy(const ExperimentConfig& config, const Shape& shape, std::size_t i) {
    return random_policy(shape, derive_seed(stage_seeds(config.seed).policies, i));
}

PolicyStudy study_policy(const ExperimentConfig& config, const Environment& env, std::size_t i) {
    const TabularMDP& mdp = env.mdp;
    const StageSeeds seeds = stage_seeds(config.seed);
    TimedPolicy pi = target_policy(config, mdp.shape(), i);

    Rng aug_rng(derive_seed(seeds.augment, i));
    const OfflineDataset augmented = augment(env.data, pi, aug_rng);

    std::vector<TrainConfig> grid = config.grid;
    for (TrainConfig& cell : grid) cell.seed = derive_seed(seeds.train, i);
    TrainConfig chosen = grid.front();
    try {
        if (grid.size() > 1) chosen = tune(augmented, pi, config.feature_kind, grid).best;
    } catch (const TrainingDivergedError& e) {
        throw TrainingDivergedError(e.stage() + ", policy " + std::to_string(i));
    }
    LearnedBehavior learned = [&] {
        try {
            return learn_mu_hat(augmented, pi, config.feature_kind, chosen);
        } catch (const TrainingDivergedError& e) {
            throw TrainingDivergedError(e.stage() + ", policy " + std::to_string(i));
        }
    }();

    const dp::QV qv = dp::compute_q_v(mdp, pi);
    const StateActionTable nu = dp::compute_nu(mdp, qv.v);
    const double j_true = dp::expected_return(mdp, qv.v);
    const double var_pi = exact_variance(mdp, pi, pi, qv, nu);
    const double var_mu_hat = exact_variance(mdp, pi, learned.mu_hat, qv, nu);
    return {std::move(pi), std::move(learned), chosen, j_true, var_pi, var_mu_hat};
}

std::vector<PolicyStudy> study_policies(const ExperimentConfig& config, const Environment& env) {
    std::vector<std::optional<PolicyStudy>> slots(config.num_policies);
    parallel_for(config.num_policies, config.threads,
                 [&](std::size_t i) { slots[i] = study_policy(config, env, i); });
    std::vector<PolicyStudy> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::vector<CurveRow> error_curve(const ExperimentConfig& config, const TabularMDP& mdp,
                                  const std::vector<PolicyStudy>& studies) {
    if (studies.empty()) throw ValidationError("error curve needs at least one policy");
    const std::size_t horizon = mdp.horizon();
    const std::size_t episodes = config.online_steps / horizon;
    if (episodes == 0) throw ValidationError("online step budget is shorter than one episode");
    const std::size_t runs = config.runs_per_policy;
    const std::size_t cells = studies.size() * runs;
    const StageSeeds seeds = stage_seeds(config.seed);

    // err[(cell * kNumMethods + method) * episodes + k]
    std::vector<double> err(cells * kNumMethods * episodes);
    parallel_for(cells, config.threads, [&](std::size_t cell) {
        const PolicyStudy& study = studies[cell / runs];
        const std::uint64_t base = derive_seed(derive_seed(seeds.online, cell / runs), cell % runs);
        double* out = err.data() + cell * kNumMethods * episodes;

        const TimedPolicy* behaviors[2] = {&study.pi, &study.learned.mu_hat};
        for (std::size_t method = 0; method < 2; ++method) {
            Rng rng(derive_seed(base, method));
            EstimateAccumulator j;
            for (std::size_t k = 0; k < episodes; ++k) {
                const Trajectory traj = sample_trajectory(mdp, *behaviors[method], rng);
                j.update(pdis_return(traj, study.pi, *behaviors[method]));
                out[method * episodes + k] = relative_error(j.mean(), study.j_true);
            }
        }
        Rng rng(derive_seed(base, 2));
        const AdaptiveRunResult run =
            run_adaptive(mdp, study.pi, study.learned.mu_hat, episodes, config.ucb_c, rng);
        for (std::size_t k = 0; k < episodes; ++k) {
            out[2 * episodes + k] = relative_error(run.log[k].j_so_far, study.j_true);
        }
    });

    std::vector<double> mean(kNumMethods * episodes, 0.0);
    std::vector<double> sd(kNumMethods * episodes, 0.0);
    for (std::size_t idx = 0; idx < kNumMethods * episodes; ++idx) {
        EstimateAccumulator acc;
        for (std::size_t cell = 0; cell < cells; ++cell) {
            acc.update(err[cell * kNumMethods * episodes + idx]);
        }
        mean[idx] = acc.mean();
        sd[idx] = std::sqrt(acc.variance());
    }
    const double scale = mean[0] > 0.0 ? mean[0] : 1.0;
    const double root_n = std::sqrt(static_cast<double>(cells));

    std::vector<CurveRow> rows;
    rows.reserve((config.online_steps - horizon + 1) * kNumMethods);
    for (std::size_t step = horizon; step <= config.online_steps; ++step) {
        const std::size_t k = step / horizon - 1;
        for (std::size_t method = 0; method < kNumMethods; ++method) {
            const std::size_t idx = method * episodes + k;
            rows.push_back({step, kMethods[method], mean[idx] / scale, sd[idx] / root_n / scale});
        }
    }
    return rows;
}

std::optional<std::size_t> steps_to_reach(const std::vector<CurveRow>& rows,
                                          const std::string& method, double threshold) {
    for (const CurveRow& row : rows) {
        if (row.method == method && row.mean_norm_err <= threshold) return row.step;
    }
    return std::nullopt;
}

double mean_ratio(const std::vector<PolicyStudy>& studies) {
    if (studies.empty()) throw ValidationError("no policies to average");
    double sum = 0.0;
    for (const PolicyStudy& s : studies) sum += s.var_pi > 0.0 ? s.var_mu_hat / s.var_pi : 1.0;
    return sum / static_cast<double>(studies.size());
}

std::vector<RatioRow> variance_ratio(const ExperimentConfig& config) {
    validate(config);
    const std::vector<std::size_t> sizes =
        config.ratio_sizes.empty() ? std::vector<std::size_t>{config.n} : config.ratio_sizes;
    std::vector<RatioRow> rows;
    for (std::size_t n : sizes) {
        const Environment env = make_environment(config, n);
        rows.push_back({n, mean_ratio(study_policies(config, env))});
    }
    return rows;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
    out << "step,method,mean_norm_err,std_err\n";
    for (const CurveRow& r : rows) {
        out << r.step << ',' << r.method << ',' << io::format_double(r.mean_norm_err) << ','
            << io::format_double(r.std_err) << '\n';
    }
}

void write_ratio_csv(std::ostream& out, const std::vector<RatioRow>& rows) {
    out << "n,ratio\n";
    for (const RatioRow& r : rows) out << r.n << ',' << io::format_double(r.ratio) << '\n';
}

void write_policy_csv(std::ostream& out, const std::vector<PolicyStudy>& studies) {
    out << "policy,j_true,var_pi,var_mu_hat,ratio,lr_r,lr_q,lr_q_hat\n";
    for (std::size_t i = 0; i < studies.size(); ++i) {
        const PolicyStudy& s = studies[i];
        const double ratio = s.var_pi > 0.0 ? s.var_mu_hat / s.var_pi : 1.0;
        out << i << ',' << io::format_double(s.j_true) << ',' << io::format_double(s.var_pi) << ','
            << io::format_double(s.var_mu_hat) << ',' << io::format_double(ratio) << ','
            << io::format_double(s.train_config.lr_r) << ','
            << io::format_double(s.train_config.lr_q) << ','
            << io::format_double(s.train_config.lr_q_hat) << '\n';
    }
}

void run_pipeline(const ExperimentConfig& config, const std::filesystem::path& dir) {
    in_stage("config", [&] { validate(config); });
    const StageSeeds seeds = stage_seeds(config.seed);

    const Environment env = in_stage("gen-env", [&] {
        Environment e = make_environment(config, config.n);
        io::write_json_file(dir / "env.json", io::to_json(e.mdp));
        return e;
    });
    in_stage("gen-offline", [&] {
        io::write_file(dir / "offline.csv",
                       to_string_stream([&](std::ostream& o) { io::write_dataset_csv(o, env.data, false); }));
    });

    const std::vector<PolicyStudy> studies = in_stage("train", [&] {
        std::vector<PolicyStudy> s = study_policies(config, env);
        const PolicyStudy& first = s.front();
        io::write_json_file(dir / "target_policy.json", io::to_json(first.pi));
        io::write_json_file(dir / "mu_hat.json", io::to_json(first.learned.mu_hat));
        io::write_json_file(dir / "model_r.json", io::to_json(first.learned.r.model));
        io::write_json_file(dir / "model_q.json", io::to_json(first.learned.q.model));
        io::write_json_file(dir / "model_q_hat.json", io::to_json(first.learned.q_hat.model));
        io::write_json_file(dir / "value_tables.json",
                            io::to_json(dp::compute_value_tables(env.mdp, first.pi)));
        io::write_file(dir / "policies.csv",
                       to_string_stream([&](std::ostream& o) { write_policy_csv(o, s); }));
        return s;
    });

    in_stage("error-curve", [&] {
        const std::vector<CurveRow> rows = error_curve(config, env.mdp, studies);
        io::write_file(dir / "error_curve.csv",
                       to_string_stream([&](std::ostream& o) { write_curve_csv(o, rows); }));
    });

    in_stage("variance-ratio", [&] {
        const std::vector<std::size_t> sizes =
            config.ratio_sizes.empty() ? std::vector<std::size_t>{config.n} : config.ratio_sizes;
        std::vector<RatioRow> rows;
        for (std::size_t n : sizes) {
            if (n == config.n) {
                rows.push_back({n, mean_ratio(studies)});
            } else {
                rows.push_back({n, mean_ratio(study_policies(config, make_environment(config, n)))});
            }
        }
        io::write_file(dir / "variance_ratio.csv",
                       to_string_stream([&](std::ostream& o) { write_ratio_csv(o, rows); }));
    });

    in_stage("adaptive", [&] {
        const PolicyStudy& first = studies.front();
        Rng rng(seeds.adaptive);
        const AdaptiveRunResult run = run_adaptive(env.mdp, first.pi, first.learned.mu_hat,
                                                   config.online_steps / config.n, config.ucb_c, rng);
        io::write_file(dir / "adaptive_log.csv", to_string_stream([&](std::ostream& o) {
                           io::write_adaptive_log_csv(o, run.log);
                       }));
    });

    in_stage("manifest", [&] {
        io::Json manifest;
        manifest["config"] = to_json(config);
        manifest["config_hash"] = hex(config_hash(config));
        manifest["seed"] = config.seed;
        manifest["stage_seeds"] = {{"env", seeds.env},           {"behaviors", seeds.behaviors},
                                   {"offline", seeds.offline},   {"policies", seeds.policies},
                                   {"augment", seeds.augment},   {"train", seeds.train},
                                   {"online", seeds.online},     {"adaptive", seeds.adaptive}};
        manifest["kernels"] = std::string(kernels::active().name);
        manifest["files"] = {"env.json",         "offline.csv",       "target_policy.json",
                             "mu_hat.json",      "model_r.json",      "model_q.json",
                             "model_q_hat.json", "value_tables.json", "policies.csv",
                             "error_curve.csv",  "variance_ratio.csv", "adaptive_log.csv"};
        io::write_json_file(dir / "manifest.json", manifest);
    });
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace vrmc::exp
