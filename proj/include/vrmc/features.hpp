#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "vrmc/tables.hpp"

namespace vrmc {

enum class FeatureKind {
    Tabular,    ///< one-hot per (t, s, a); T |S| |A| weights
    LinearTime, ///< per action: one-hot position plus t / T; (|S| + 1) |A| weights
    StateAction ///< one-hot per (s, a), time-independent; |S| |A| weights
};

std::string_view to_string(FeatureKind kind);
/// Accepts "tabular", "linear-time", "state-action"; throws ValidationError otherwise.
FeatureKind feature_kind_from_string(std::string_view name);

/// At most two non-zero coordinates.
struct SparseFeatures {
    std::array<std::size_t, 2> index{};
    std::array<double, 2> value{};
    std::size_t nnz = 0;
};

class FeatureMap {
public:
    FeatureMap(FeatureKind kind, const Shape& shape);

    FeatureKind kind() const { return kind_; }
    const Shape& shape() const { return shape_; }

    /// Total number of weights.
    std::size_t dims() const;
    /// Length of the (t, s) feature vector before it is crossed with the action.
    std::size_t state_dims() const;

    SparseFeatures features(std::size_t t, std::size_t s, std::size_t a) const;

private:
    FeatureKind kind_;
    Shape shape_;
};

/// Linear function w . phi(t, s, a).
struct LinearModel {
    FeatureMap features;
    std::vector<double> weights;

    explicit LinearModel(const FeatureMap& map) : features(map), weights(map.dims(), 0.0) {}
    LinearModel(const FeatureMap& map, std::vector<double> w);

    double predict(std::size_t t, std::size_t s, std::size_t a) const {
        const SparseFeatures f = features.features(t, s, a);
        double y = 0.0;
        for (std::size_t i = 0; i < f.nnz; ++i) y += weights[f.index[i]] * f.value[i];
        return y;
    }

    bool finite() const;
};

} // namespace vrmc
