#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dpu/rng.hpp"

namespace dpu {

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

// Fixed-capacity FIFO ring with uniform with-replacement sampling.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t state_width, std::size_t action_width)
        : capacity_(capacity), state_width_(state_width), action_width_(action_width) {
        if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
        storage_.reserve(capacity);
    }

    void push(Transition t) {
        if (t.state.size() != state_width_ || t.next_state.size() != state_width_)
            throw std::invalid_argument("replay push: state width mismatch");
        if (t.action.size() != action_width_)
            throw std::invalid_argument("replay push: action width mismatch");
        if (storage_.size() < capacity_) {
            storage_.push_back(std::move(t));
        } else {
            storage_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    // Uniform over stored entries, with replacement.
    std::vector<const Transition*> sample(std::size_t n, Rng& rng) const {
        if (storage_.empty()) throw std::runtime_error("replay sample: buffer empty");
        std::vector<const Transition*> batch;
        batch.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            batch.push_back(&storage_[rng.index(storage_.size())]);
        return batch;
    }

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return storage_.at(i); }

private:
    std::size_t capacity_;
    std::size_t state_width_;
    std::size_t action_width_;
    std::vector<Transition> storage_;
    std::size_t cursor_ = 0;
};

}  // namespace dpu
