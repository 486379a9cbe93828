#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "support/oracles.hpp"
#include "vrmc/envs.hpp"
#include "vrmc/errors.hpp"
#include "vrmc/serialize.hpp"

using namespace vrmc;

namespace {

template <class A, class B>
void expect_same(const A& a, const B& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

} // namespace

TEST(Serialize, FormatDoubleRoundTrips) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.index(40)) - 20);
        EXPECT_EQ(std::stod(io::format_double(x)), x);
    }
    EXPECT_EQ(io::format_double(0.1), "0.1");
}

TEST(Serialize, MdpRoundTripIsExact) {
    const TabularMDP mdp = make_gridworld({3, 0.85, 2});
    const io::Json j = io::to_json(mdp);
    const TabularMDP back = io::mdp_from_json(io::Json::parse(j.dump()));
    EXPECT_EQ(back.shape(), mdp.shape());
    expect_same(back.rewards(), mdp.rewards());
    expect_same(back.transitions(), mdp.transitions());
    expect_same(back.initial(), mdp.initial());
    EXPECT_EQ(io::to_json(back).dump(), j.dump());
}

TEST(Serialize, PolicyAndModelRoundTrip) {
    const TimedPolicy pi = random_policy({3, 4, 4}, 3);
    const TimedPolicy back = io::policy_from_json(io::Json::parse(io::to_json(pi).dump()));
    expect_same(back.values(), pi.values());

    const FeatureMap map(FeatureKind::LinearTime, {3, 4, 4});
    LinearModel model(map);
    Rng rng(4);
    for (double& w : model.weights) w = rng.uniform() - 0.5;
    const LinearModel m2 = io::model_from_json(io::Json::parse(io::to_json(model).dump()));
    EXPECT_EQ(m2.features.kind(), FeatureKind::LinearTime);
    expect_same(m2.weights, model.weights);
}

TEST(Serialize, MalformedInputsThrow) {
    io::Json j = io::to_json(random_policy({2, 2, 2}, 5));
    j["probs"][0][0] = io::Json::array({0.5, 0.6});
    EXPECT_THROW(io::policy_from_json(j), Error);
    io::Json m = io::to_json(make_gridworld({2, 0.9, 0}));
    m["reward"] = io::Json::array({1.0});
    EXPECT_THROW(io::mdp_from_json(m), Error);
    EXPECT_THROW(io::mdp_from_json(io::Json::parse("{\"num_states\": 2}")), Error);
}

TEST(Serialize, TrainConfigDefaultsAndRoundTrip) {
    TrainConfig c;
    c.lr_q = 0.125;
    c.steps = 17;
    c.seed = 99;
    EXPECT_EQ(io::train_config_from_json(io::to_json(c)), c);
    const TrainConfig partial = io::train_config_from_json(io::Json::parse("{\"batch_size\": 8}"));
    EXPECT_EQ(partial.batch_size, 8u);
    EXPECT_EQ(partial.lr_r, TrainConfig{}.lr_r);
    EXPECT_THROW(io::train_config_from_json(io::Json::parse("{\"batch_size\": 0}")), ValidationError);
}

TEST(Serialize, DatasetCsvRoundTrip) {
    const TabularMDP mdp = make_gridworld({3, 0.9, 6});
    Rng rng(7);
    OfflineDataset data = generate_offline(mdp, std::vector{TimedPolicy::uniform(mdp.shape())}, 500, rng);
    data = augment(data, random_policy(mdp.shape(), 8), rng);
    for (bool with_next : {false, true}) {
        std::stringstream ss;
        io::write_dataset_csv(ss, data, with_next);
        const OfflineDataset back = io::read_dataset_csv(ss);
        ASSERT_EQ(back.size(), data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            EXPECT_EQ(back[i].t, data[i].t);
            EXPECT_EQ(back[i].s, data[i].s);
            EXPECT_EQ(back[i].a, data[i].a);
            EXPECT_EQ(back[i].r, data[i].r);
            EXPECT_EQ(back[i].s_next, data[i].s_next);
            EXPECT_EQ(back[i].a_next, with_next ? data[i].a_next : std::nullopt);
        }
    }
}

TEST(Serialize, DatasetCsvRejectsGarbage) {
    std::stringstream bad("t,s,a,r,s_next\n0,1,x,0.5,2\n");
    EXPECT_THROW(io::read_dataset_csv(bad), ValidationError);
    std::stringstream short_row("t,s,a,r,s_next\n0,1,2\n");
    EXPECT_THROW(io::read_dataset_csv(short_row), ValidationError);
}

TEST(Serialize, AdaptiveLogHeader) {
    std::stringstream ss;
    const std::vector<EpisodeRecord> log{{1, Arm::MuHat, 1.5, -2.25, 1.5}, {2, Arm::Target, 0.5, -0.25, 1.0}};
    io::write_adaptive_log_csv(ss, log);
    EXPECT_EQ(ss.str(), "episode,arm,G,neg_G_sq,J_so_far\n1,mu_hat,1.5,-2.25,1.5\n2,pi,0.5,-0.25,1\n");
}

TEST(Serialize, JsonFilesCreateDirectories) {
    const auto dir = std::filesystem::temp_directory_path() / "vrmc_serialize_test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "nested" / "x.json";
    io::write_json_file(path, io::Json{{"a", 1}});
    EXPECT_EQ(io::read_json_file(path)["a"], 1);
    EXPECT_THROW(io::read_file(dir / "missing.json"), Error);
    std::filesystem::remove_all(dir);
}
