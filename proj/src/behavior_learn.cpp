#include "vrmc/behavior_learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vrmc/errors.hpp"

namespace vrmc {
namespace {

// Stream ids for derive_seed(config.seed, .).
constexpr std::uint64_t kStreamSplit = 1;
constexpr std::uint64_t kStreamReward = 2;
constexpr std::uint64_t kStreamQ = 3;
constexpr std::uint64_t kStreamQHat = 4;

// Divergence is checked this often (and once at the end).
constexpr std::size_t kFiniteCheckInterval = 1024;

/**
 * Minibatch semi-gradient descent on (target - w . phi)^2. `target(tuple, i, w)`
 * may read the current weights (bootstrapped targets); every target and
 * prediction in a batch is evaluated before the batch update is applied.
 */
template <typename Target>
void run_sgd(LinearModel& model, const OfflineDataset& train, double lr, const TrainConfig& config,
             std::uint64_t stream, const std::string& stage, Target&& target) {
    if (train.empty()) throw ValidationError(stage + ": empty training split");
    Rng rng(derive_seed(config.seed, stream));
    const std::size_t batch = config.batch_size;
    std::vector<std::size_t> picked(batch);
    std::vector<SparseFeatures> feats(batch);
    std::vector<double> err(batch);
    const double scale = lr / static_cast<double>(batch);

    for (std::size_t step = 0; step < config.steps; ++step) {
        for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t i = rng.index(train.size());
            const OfflineTuple& x = train[i];
            picked[b] = i;
            feats[b] = model.features.features(x.t, x.s, x.a);
            double pred = 0.0;
            for (std::size_t k = 0; k < feats[b].nnz; ++k) {
                pred += model.weights[feats[b].index[k]] * feats[b].value[k];
            }
            err[b] = target(x, i, model) - pred;
        }
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t k = 0; k < feats[b].nnz; ++k) {
                model.weights[feats[b].index[k]] += scale * err[b] * feats[b].value[k];
            }
        }
        if (step % kFiniteCheckInterval == 0 && !model.finite()) {
            throw TrainingDivergedError(stage);
        }
    }
    if (!model.finite()) throw TrainingDivergedError(stage);
}

template <typename Target>
double test_loss(const LinearModel& model, const OfflineDataset& test, Target&& target) {
    if (test.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const OfflineTuple& x = test[i];
        const double e = target(x, i, model) - model.predict(x.t, x.s, x.a);
        sum += e * e;
    }
    return sum / static_cast<double>(test.size());
}

/// r + bootstrap(t + 1, s', a'), zero bootstrap at the horizon.
double bootstrap(const OfflineTuple& x, const LinearModel& model) {
    if (x.t + 1 >= model.features.shape().horizon) return 0.0;
    if (!x.a_next) throw ValidationError("tuple lacks a' at t < T-1; augment the dataset first");
    return model.predict(x.t + 1, x.s_next, *x.a_next);
}

std::vector<double> derived_rewards(const OfflineDataset& data, const LinearModel& r_model,
                                    const LinearModel& q_model) {
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const OfflineTuple& x = data[i];
        const double r = r_model.predict(x.t, x.s, x.a);
        out[i] = 2.0 * r * q_model.predict(x.t, x.s, x.a) - r * r;
    }
    return out;
}

double loss_or_inf(double loss) {
    return std::isnan(loss) ? std::numeric_limits<double>::infinity() : loss;
}

std::size_t argmin(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (loss_or_inf(values[i]) < loss_or_inf(values[best])) best = i;
    }
    return best;
}

} // namespace

OfflineDataset generate_offline(const TabularMDP& mdp, std::span<const TimedPolicy> behaviors,
                                std::size_t m, Rng& rng) {
    if (m == 0) throw ValidationError("offline dataset size must be at least 1");
    if (behaviors.empty()) throw ValidationError("at least one behavior policy is required");
    for (const auto& b : behaviors) check_shape(mdp, b);

    const std::size_t horizon = mdp.horizon();
    OfflineDataset data;
    data.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const TimedPolicy& policy = behaviors[rng.index(behaviors.size())];
        const std::size_t t_end = rng.index(horizon);
        std::size_t s = rng.categorical(mdp.initial());
        for (std::size_t t = 0;; ++t) {
            const std::size_t a = rng.categorical(policy.row(t, s));
            const std::size_t s_next = rng.categorical(mdp.transition_row(s, a));
            if (t == t_end) {
                data.push_back({t, s, a, mdp.reward(s, a), s_next, std::nullopt});
                break;
            }
            s = s_next;
        }
    }
    return data;
}

void validate_dataset(const OfflineDataset& data, const Shape& shape) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        const OfflineTuple& x = data[i];
        const bool ok = x.t < shape.horizon && x.s < shape.num_states &&
                        x.a < shape.num_actions && x.s_next < shape.num_states &&
                        std::isfinite(x.r) && (!x.a_next || *x.a_next < shape.num_actions);
        if (!ok) throw ValidationError("offline tuple " + std::to_string(i) + " out of range");
    }
}

OfflineDataset augment(const OfflineDataset& data, const TimedPolicy& pi, Rng& rng) {
    validate_dataset(data, pi.shape());
    OfflineDataset out = data;
    const std::size_t horizon = pi.shape().horizon;
    for (OfflineTuple& x : out) {
        if (x.t + 1 < horizon) {
            x.a_next = rng.categorical(pi.row(x.t + 1, x.s_next));
        } else {
            x.a_next.reset();
        }
    }
    return out;
}

void validate(const TrainConfig& config) {
    if (config.batch_size == 0) throw ValidationError("batch size must be positive");
    if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
        throw ValidationError("train fraction must lie in (0, 1)");
    }
    if (!(config.lr_r >= 0.0) || !(config.lr_q >= 0.0) || !(config.lr_q_hat >= 0.0)) {
        throw ValidationError("learning rates must be non-negative");
    }
    if (!(config.floor >= 0.0)) throw ValidationError("q_hat floor must be non-negative");
}

DataSplit split_dataset(const OfflineDataset& data, double train_fraction, std::uint64_t seed) {
    if (data.empty()) throw ValidationError("cannot split an empty dataset");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, kStreamSplit));
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.index(i)]);
    }
    const auto wanted = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(data.size())));
    const std::size_t n_train = std::clamp<std::size_t>(wanted, 1, data.size());
    DataSplit split;
    split.train.reserve(n_train);
    split.test.reserve(data.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? split.train : split.test).push_back(data[order[i]]);
    }
    return split;
}

FitResult fit_r(const DataSplit& data, const Shape& shape, const TrainConfig& config) {
    validate(config);
    LinearModel model(FeatureMap(FeatureKind::StateAction, shape));
    const auto target = [](const OfflineTuple& x, std::size_t, const LinearModel&) { return x.r; };
    run_sgd(model, data.train, config.lr_r, config, kStreamReward, "fit_r", target);
    const double loss = test_loss(model, data.test, target);
    return {std::move(model), loss};
}

FitResult fit_q(const DataSplit& data, const FeatureMap& features, const TrainConfig& config) {
    validate(config);
    LinearModel model(features);
    const auto target = [](const OfflineTuple& x, std::size_t, const LinearModel& w) {
        return x.r + bootstrap(x, w);
    };
    run_sgd(model, data.train, config.lr_q, config, kStreamQ, "fit_q", target);
    const double loss = test_loss(model, data.test, target);
    return {std::move(model), loss};
}

FitResult fit_hat_q(const DataSplit& data, const LinearModel& r_model, const LinearModel& q_model,
                    const FeatureMap& features, const TrainConfig& config) {
    validate(config);
    const std::vector<double> train_r_hat = derived_rewards(data.train, r_model, q_model);
    const std::vector<double> test_r_hat = derived_rewards(data.test, r_model, q_model);
    LinearModel model(features);
    run_sgd(model, data.train, config.lr_q_hat, config, kStreamQHat, "fit_hat_q",
            [&](const OfflineTuple& x, std::size_t i, const LinearModel& w) {
                return train_r_hat[i] + bootstrap(x, w);
            });
    const double loss =
        test_loss(model, data.test, [&](const OfflineTuple& x, std::size_t i, const LinearModel& w) {
            return test_r_hat[i] + bootstrap(x, w);
        });
    return {std::move(model), loss};
}

TimedPolicy build_mu_hat(const TimedPolicy& pi, const LinearModel& q_hat_model, double floor) {
    if (!(floor >= 0.0)) throw ValidationError("q_hat floor must be non-negative");
    const Shape shape = pi.shape();
    if (!(q_hat_model.features.shape() == shape)) {
        throw DimensionError("q_hat model shape does not match policy");
    }
    std::vector<double> mu(shape.horizon * shape.num_states * shape.num_actions);
    for (std::size_t t = 0; t < shape.horizon; ++t) {
        for (std::size_t s = 0; s < shape.num_states; ++s) {
            double* row = mu.data() + (t * shape.num_states + s) * shape.num_actions;
            double norm = 0.0;
            for (std::size_t a = 0; a < shape.num_actions; ++a) {
                const double x = std::max(q_hat_model.predict(t, s, a), floor);
                row[a] = pi.prob(t, s, a) * std::sqrt(x);
                norm += row[a];
            }
            for (std::size_t a = 0; a < shape.num_actions; ++a) {
                row[a] = norm > 0.0 ? row[a] / norm : pi.prob(t, s, a);
            }
        }
    }
    return TimedPolicy(shape, std::move(mu));
}

LearnedBehavior learn_mu_hat(const OfflineDataset& augmented, const TimedPolicy& pi,
                             FeatureKind kind, const TrainConfig& config) {
    validate(config);
    validate_dataset(augmented, pi.shape());
    const DataSplit split = split_dataset(augmented, config.train_fraction, config.seed);
    const FeatureMap features(kind, pi.shape());
    FitResult r = fit_r(split, pi.shape(), config);
    FitResult q = fit_q(split, features, config);
    FitResult q_hat = fit_hat_q(split, r.model, q.model, features, config);
    TimedPolicy mu = build_mu_hat(pi, q_hat.model, config.floor);
    return {std::move(r), std::move(q), std::move(q_hat), std::move(mu)};
}

TuneResult tune(const OfflineDataset& augmented, const TimedPolicy& pi, FeatureKind kind,
                std::span<const TrainConfig> grid) {
    if (grid.empty()) throw ValidationError("hyperparameter grid is empty");
    const TrainConfig& first = grid.front();
    for (const TrainConfig& cell : grid) {
        validate(cell);
        const bool same = cell.batch_size == first.batch_size && cell.steps == first.steps &&
                          cell.train_fraction == first.train_fraction &&
                          cell.seed == first.seed && cell.floor == first.floor;
        if (!same) throw ValidationError("grid cells may differ only in learning rates");
    }
    validate_dataset(augmented, pi.shape());
    const DataSplit split = split_dataset(augmented, first.train_fraction, first.seed);
    const FeatureMap features(kind, pi.shape());

    const auto in_cell = [](std::size_t k, auto&& fit) {
        try {
            return fit();
        } catch (const TrainingDivergedError& e) {
            throw TrainingDivergedError(e.stage() + ", grid cell " + std::to_string(k));
        }
    };

    TuneResult result;
    std::vector<LinearModel> r_models;
    std::vector<LinearModel> q_models;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        FitResult r = in_cell(k, [&] { return fit_r(split, pi.shape(), grid[k]); });
        result.r_loss.push_back(r.test_loss);
        r_models.push_back(std::move(r.model));
        FitResult q = in_cell(k, [&] { return fit_q(split, features, grid[k]); });
        result.q_loss.push_back(q.test_loss);
        q_models.push_back(std::move(q.model));
    }
    result.best_r = argmin(result.r_loss);
    result.best_q = argmin(result.q_loss);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        FitResult q_hat = in_cell(k, [&] {
            return fit_hat_q(split, r_models[result.best_r], q_models[result.best_q], features,
                             grid[k]);
        });
        result.q_hat_loss.push_back(q_hat.test_loss);
    }
    result.best_q_hat = argmin(result.q_hat_loss);

    result.best = first;
    result.best.lr_r = grid[result.best_r].lr_r;
    result.best.lr_q = grid[result.best_q].lr_q;
    result.best.lr_q_hat = grid[result.best_q_hat].lr_q_hat;
    return result;
}

} // namespace vrmc
