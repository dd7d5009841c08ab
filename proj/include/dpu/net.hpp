#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpu/rng.hpp"

namespace dpu {

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class OutputActivation : std::uint8_t {
    kIdentity = 0,
    kTanh = 1,          // bounded symmetric squash
    kScaledTanh = 2,    // offset + scale * tanh, per-component affine into an action box
};

// Row-major dense matrix, the batch carrier for the OpenMP kernels.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct AdamState {
    std::vector<std::vector<double>> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    std::uint64_t step_count = 0;
};

// Fully connected net: ReLU hidden layers, configurable output activation.
// Plays actor, critic, and their target roles.
struct DenseNet {
    std::vector<std::size_t> layer_sizes;          // input, hidden..., output
    std::vector<std::vector<double>> weights;      // [layer] row-major (out x in)
    std::vector<std::vector<double>> biases;       // [layer] (out)
    OutputActivation output_activation = OutputActivation::kIdentity;
    std::vector<double> out_scale;                 // kScaledTanh only
    std::vector<double> out_offset;
    AdamState opt;

    std::size_t input_width() const { return layer_sizes.front(); }
    std::size_t output_width() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return layer_sizes.size() - 1; }
};

// Per-parameter arrays congruent with a DenseNet; carries one backward pass.
struct GradientSet {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void add_scaled(const GradientSet& other, double scale);
    void scale(double s);
    bool finite() const;
};

// Layer activations cached by the batched forward pass, consumed by backward.
struct BatchCache {
    std::vector<Mat> activations;   // [0] = input, [i] = post-activation of layer i
    std::vector<Mat> pre_output;    // pre-activation of the final layer
};

DenseNet make_net(const std::vector<std::size_t>& layer_sizes,
                  OutputActivation out_act, Rng& init_rng);

// Binds a kScaledTanh output to a per-component [lo, hi] box.
void set_output_box(DenseNet& net, const std::vector<double>& lo,
                    const std::vector<double>& hi);

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input);

// Single-sample backward. Returns parameter gradients; input_grad (when
// non-null) receives d(loss)/d(input), needed for chaining the actor
// through a critic.
GradientSet backward(const DenseNet& net, const std::vector<double>& input,
                     const std::vector<double>& output_grad,
                     std::vector<double>* input_grad = nullptr);

// Batched kernels. X is (N x input_width); results row-per-sample.
// Deterministic for any OpenMP thread count: every output element is a
// fixed-order dot product.
Mat batch_forward(const DenseNet& net, const Mat& x, BatchCache* cache = nullptr);

// Gradients are summed over the batch; callers scale by 1/N as needed.
GradientSet batch_backward(const DenseNet& net, const BatchCache& cache,
                           const Mat& output_grads, Mat* input_grads = nullptr);

void adam_step(DenseNet& net, const GradientSet& grads, double learning_rate,
               double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

void soft_update(DenseNet& target, const DenseNet& source, double tau);

// Parameter-identical copy with fresh optimizer state.
DenseNet clone_into_target(const DenseNet& source);

GradientSet zero_gradients(const DenseNet& net);

bool same_shape(const DenseNet& a, const DenseNet& b);

// ckpt-v1 binary container: layer sizes, activation tag, parameters in
// layer order, Adam state.
void save_net(const DenseNet& net, std::ostream& out);
DenseNet load_net(std::istream& in);

}  // namespace dpu
