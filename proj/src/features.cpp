#include "vrmc/features.hpp"

#include <cmath>
#include <string>

#include "vrmc/errors.hpp"

namespace vrmc {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::Tabular:
        return "tabular";
    case FeatureKind::LinearTime:
        return "linear-time";
    case FeatureKind::StateAction:
        return "state-action";
    }
    return "unknown";
}

FeatureKind feature_kind_from_string(std::string_view name) {
    if (name == "tabular") return FeatureKind::Tabular;
    if (name == "linear-time") return FeatureKind::LinearTime;
    if (name == "state-action") return FeatureKind::StateAction;
    throw ValidationError("unknown feature kind '" + std::string(name) + "'");
}

FeatureMap::FeatureMap(FeatureKind kind, const Shape& shape) : kind_(kind), shape_(shape) {
    if (shape.horizon == 0 || shape.num_states == 0 || shape.num_actions == 0) {
        throw DimensionError("feature map needs a non-empty shape");
    }
}

std::size_t FeatureMap::state_dims() const {
    switch (kind_) {
    case FeatureKind::Tabular:
        return shape_.horizon * shape_.num_states;
    case FeatureKind::LinearTime:
        return shape_.num_states + 1;
    case FeatureKind::StateAction:
        return shape_.num_states;
    }
    return 0;
}

std::size_t FeatureMap::dims() const { return state_dims() * shape_.num_actions; }

SparseFeatures FeatureMap::features(std::size_t t, std::size_t s, std::size_t a) const {
    SparseFeatures f;
    switch (kind_) {
    case FeatureKind::Tabular:
        f.index[0] = (t * shape_.num_states + s) * shape_.num_actions + a;
        f.value[0] = 1.0;
        f.nnz = 1;
        break;
    case FeatureKind::LinearTime: {
        const std::size_t block = a * (shape_.num_states + 1);
        f.index[0] = block + s;
        f.value[0] = 1.0;
        f.index[1] = block + shape_.num_states;
        f.value[1] = static_cast<double>(t) / static_cast<double>(shape_.horizon);
        f.nnz = 2;
        break;
    }
    case FeatureKind::StateAction:
        f.index[0] = s * shape_.num_actions + a;
        f.value[0] = 1.0;
        f.nnz = 1;
        break;
    }
    return f;
}

LinearModel::LinearModel(const FeatureMap& map, std::vector<double> w)
    : features(map), weights(std::move(w)) {
    if (weights.size() != features.dims()) throw DimensionError("weight vector length != dims");
}

bool LinearModel::finite() const {
    for (double w : weights) {
        if (!std::isfinite(w)) return false;
    }
    return true;
}

} // namespace vrmc
