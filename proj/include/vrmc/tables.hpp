#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vrmc {

/// (horizon, |S|, |A|) of an MDP or a time-indexed table.
struct Shape {
    std::size_t horizon = 0;
    std::size_t num_states = 0;
    std::size_t num_actions = 0;

    bool operator==(const Shape&) const = default;
};

/// Time-major [t][s] table of doubles.
class StateTable {
public:
    StateTable() = default;
    StateTable(std::size_t horizon, std::size_t num_states, double fill = 0.0)
        : horizon_(horizon), num_states_(num_states), data_(horizon * num_states, fill) {}

    std::size_t horizon() const { return horizon_; }
    std::size_t num_states() const { return num_states_; }

    double& operator()(std::size_t t, std::size_t s) { return data_[t * num_states_ + s]; }
    double operator()(std::size_t t, std::size_t s) const { return data_[t * num_states_ + s]; }

    std::span<double> at_time(std::size_t t) { return {data_.data() + t * num_states_, num_states_}; }
    std::span<const double> at_time(std::size_t t) const {
        return {data_.data() + t * num_states_, num_states_};
    }

    std::span<const double> values() const { return data_; }

private:
    std::size_t horizon_ = 0;
    std::size_t num_states_ = 0;
    std::vector<double> data_;
};

/// Time-major [t][s][a] table of doubles.
class StateActionTable {
public:
    StateActionTable() = default;
    explicit StateActionTable(const Shape& shape, double fill = 0.0)
        : shape_(shape),
          data_(shape.horizon * shape.num_states * shape.num_actions, fill) {}

    const Shape& shape() const { return shape_; }

    double& operator()(std::size_t t, std::size_t s, std::size_t a) {
        return data_[(t * shape_.num_states + s) * shape_.num_actions + a];
    }
    double operator()(std::size_t t, std::size_t s, std::size_t a) const {
        return data_[(t * shape_.num_states + s) * shape_.num_actions + a];
    }

    /// Action row at (t, s).
    std::span<double> row(std::size_t t, std::size_t s) {
        return {data_.data() + (t * shape_.num_states + s) * shape_.num_actions, shape_.num_actions};
    }
    std::span<const double> row(std::size_t t, std::size_t s) const {
        return {data_.data() + (t * shape_.num_states + s) * shape_.num_actions, shape_.num_actions};
    }

    /// All (s, a) entries at time t, laid out s-major.
    std::span<double> at_time(std::size_t t) {
        const std::size_t n = shape_.num_states * shape_.num_actions;
        return {data_.data() + t * n, n};
    }
    std::span<const double> at_time(std::size_t t) const {
        const std::size_t n = shape_.num_states * shape_.num_actions;
        return {data_.data() + t * n, n};
    }

    std::span<const double> values() const { return data_; }

private:
    Shape shape_;
    std::vector<double> data_;
};

} // namespace vrmc
