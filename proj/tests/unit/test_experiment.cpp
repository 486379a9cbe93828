#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vrmc/errors.hpp"
#include "vrmc/experiment.hpp"

using namespace vrmc;
using namespace vrmc::exp;

namespace {

ExperimentConfig tiny() {
    ExperimentConfig c;
    c.n = 3;
    c.seed = 5;
    c.num_policies = 2;
    c.runs_per_policy = 3;
    c.online_steps = 30;
    c.m = 3000;
    c.num_behaviors = 2;
    c.grid[0].steps = 3000;
    c.grid[0].batch_size = 16;
    c.threads = 1;
    return c;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("vrmc_experiment_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST(ExperimentConfig, JsonRoundTrip) {
    ExperimentConfig c = tiny();
    c.feature_kind = FeatureKind::LinearTime;
    c.ratio_sizes = {3, 4};
    c.grid.push_back(c.grid[0]);
    c.grid[1].lr_q = 0.05;
    const ExperimentConfig back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
    EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(ExperimentConfig, UnknownKeysAndBadValuesThrow) {
    EXPECT_THROW(config_from_json(io::Json::parse("{\"sead\": 1}")), ValidationError);
    EXPECT_THROW(config_from_json(io::Json::parse("{\"n\": 1}")), ValidationError);
    EXPECT_THROW(config_from_json(io::Json::parse("{\"online_steps\": 2, \"n\": 5}")), ValidationError);
    EXPECT_THROW(config_from_json(io::Json::parse("{\"num_policies\": 0}")), ValidationError);
    EXPECT_EQ(config_from_json(io::Json::parse("{\"seed\": 9}")).seed, 9u);
}

TEST(ExperimentConfig, HashIgnoresThreadsOnly) {
    ExperimentConfig a = tiny();
    ExperimentConfig b = a;
    b.threads = 8;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 6;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(hex(0xabcULL), "0000000000000abc");
}

TEST(StageSeeds, AllDistinct) {
    const StageSeeds s = stage_seeds(42);
    const std::set<std::uint64_t> all{s.env, s.behaviors, s.offline, s.policies,
                                      s.augment, s.train, s.online, s.adaptive};
    EXPECT_EQ(all.size(), 8u);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
    for (std::size_t threads : {1u, 3u}) {
        std::vector<std::atomic<int>> hits(100);
        parallel_for(100, threads, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    }
}

TEST(ParallelFor, RethrowsLowestIndexError) {
    for (std::size_t threads : {1u, 4u}) {
        try {
            parallel_for(50, threads, [](std::size_t i) {
                if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
            });
            FAIL();
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "7");
        }
    }
}

TEST(ErrorCurve, ShapeAndNormalization) {
    const ExperimentConfig c = tiny();
    const Environment env = make_environment(c, c.n);
    const auto studies = study_policies(c, env);
    const auto rows = error_curve(c, env.mdp, studies);
    ASSERT_EQ(rows.size(), 3u * (c.online_steps - c.n + 1));
    EXPECT_EQ(rows[0].step, c.n);
    EXPECT_EQ(rows[0].method, kOnPolicy);
    EXPECT_DOUBLE_EQ(rows[0].mean_norm_err, 1.0);
    EXPECT_EQ(rows.back().step, c.online_steps);
    for (const PolicyStudy& s : studies) {
        EXPECT_GE(s.var_pi, 0.0);
        EXPECT_GE(s.var_mu_hat, 0.0);
    }
    EXPECT_TRUE(steps_to_reach(rows, kOnPolicy, 1.0).has_value());
    EXPECT_FALSE(steps_to_reach(rows, kOnPolicy, -1.0).has_value());
}

TEST(ErrorCurve, ThreadCountDoesNotChangeResults) {
    ExperimentConfig a = tiny();
    ExperimentConfig b = a;
    b.threads = 3;
    const Environment env = make_environment(a, a.n);
    std::stringstream ra, rb;
    write_curve_csv(ra, error_curve(a, env.mdp, study_policies(a, env)));
    write_curve_csv(rb, error_curve(b, env.mdp, study_policies(b, env)));
    EXPECT_EQ(ra.str(), rb.str());
}

TEST(VarianceRatio, ZeroVarianceTargetCountsAsOne) {
    const Shape shape{1, 1, 1};
    const TimedPolicy pi = TimedPolicy::uniform(shape);
    const LinearModel zero(FeatureMap(FeatureKind::Tabular, shape));
    const FitResult fit{zero, 0.0};
    PolicyStudy s{pi, {fit, fit, fit, pi}, {}, 1.0, 0.0, 0.0};
    EXPECT_EQ(mean_ratio({s}), 1.0);
    s.var_pi = 2.0;
    s.var_mu_hat = 1.0;
    EXPECT_EQ(mean_ratio({s, s}), 0.5);
}

TEST(Pipeline, SameSeedSameBytes) {
    const ExperimentConfig c = tiny();
    const auto a = scratch("a"), b = scratch("b");
    run_pipeline(c, a);
    run_pipeline(c, b);
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
        const auto name = entry.path().filename();
        EXPECT_EQ(io::read_file(entry.path()), io::read_file(b / name)) << name;
        ++files;
    }
    EXPECT_EQ(files, 13u);
    const io::Json manifest = io::read_json_file(a / "manifest.json");
    EXPECT_EQ(manifest["config_hash"], hex(config_hash(c)));
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}

TEST(Pipeline, ErrorsNameTheStage) {
    ExperimentConfig c = tiny();
    c.grid[0].lr_q = 1e6;
    c.feature_kind = FeatureKind::LinearTime;
    const auto dir = scratch("diverge");
    try {
        run_pipeline(c, dir);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "train");
    }
    c = tiny();
    c.num_policies = 0;
    try {
        run_pipeline(c, dir);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "config");
    }
    std::filesystem::remove_all(dir);
}

TEST(ErrorCurve, AdaptiveEndsNoWorseThanEitherArm) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        ExperimentConfig c = tiny();
        c.seed = seed;
        c.runs_per_policy = 10;
        c.online_steps = 150;
        const Environment env = make_environment(c, c.n);
        const auto rows = error_curve(c, env.mdp, study_policies(c, env));
        double worst = 0.0, adaptive = 0.0, adaptive_se = 0.0;
        for (const CurveRow& r : rows) {
            if (r.step != c.online_steps) continue;
            if (r.method == kAdaptive) {
                adaptive = r.mean_norm_err;
                adaptive_se = r.std_err;
            } else {
                worst = std::max(worst, r.mean_norm_err);
            }
        }
        EXPECT_LE(adaptive, worst + 3 * adaptive_se) << "seed " << seed;
    }
}
