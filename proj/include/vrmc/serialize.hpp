#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "json.hpp"

#include "vrmc/adaptive.hpp"
#include "vrmc/behavior_learn.hpp"
#include "vrmc/exact_dp.hpp"
#include "vrmc/features.hpp"
#include "vrmc/mdp.hpp"

// JSON and CSV formats for everything the command-line tool reads or writes.
// Doubles are printed in shortest round-trip form so files reproduce bit-exact
// values and identical inputs give identical bytes.

namespace vrmc::io {

using Json = nlohmann::json;

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// {num_states, num_actions, horizon, reward[s][a], transition[s][a][s'], initial[s]}
Json to_json(const TabularMDP& mdp);
TabularMDP mdp_from_json(const Json& j);

/// {horizon, num_states, num_actions, probs[t][s][a]}
Json to_json(const TimedPolicy& policy);
TimedPolicy policy_from_json(const Json& j);

/// {feature_kind, horizon, num_states, num_actions, dims, weights}
Json to_json(const LinearModel& model);
LinearModel model_from_json(const Json& j);

Json to_json(const TrainConfig& config);
/// Missing keys keep their defaults.
TrainConfig train_config_from_json(const Json& j);

/// Every table as nested [t][s] or [t][s][a] arrays.
Json to_json(const dp::ValueTables& tables);

/// Header `t,s,a,r,s_next`, plus `,a_next` (empty at t = T-1) when `with_next` is set.
void write_dataset_csv(std::ostream& out, const OfflineDataset& data, bool with_next);
/// Accepts either header; throws ValidationError on malformed rows.
OfflineDataset read_dataset_csv(std::istream& in);

/// Header `episode,arm,G,neg_G_sq,J_so_far`.
void write_adaptive_log_csv(std::ostream& out, std::span<const EpisodeRecord> log);

std::string read_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_file(const std::filesystem::path& path, const std::string& contents);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

} // namespace vrmc::io
