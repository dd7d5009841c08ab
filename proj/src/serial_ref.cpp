#include "dpu/serial_ref.hpp"

#include <algorithm>
#include <cmath>

namespace dpu::serial_ref {

namespace {

struct Trace {
    std::vector<std::vector<double>> acts;  // acts[0] = input
    std::vector<double> pre_out;
};

Trace run_forward(const DenseNet& net, const std::vector<double>& input) {
    Trace tr;
    tr.acts.push_back(input);
    std::vector<double> cur = input;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const std::size_t out_w = net.layer_sizes[l + 1];
        const std::size_t in_w = net.layer_sizes[l];
        std::vector<double> next(out_w, 0.0);
        for (std::size_t j = 0; j < out_w; ++j) {
            double z = net.biases[l][j];
            for (std::size_t i = 0; i < in_w; ++i)
                z += net.weights[l][j * in_w + i] * cur[i];
            next[j] = z;
        }
        const bool last = (l + 1 == net.layer_count());
        if (last) {
            tr.pre_out = next;
            for (std::size_t j = 0; j < out_w; ++j) {
                switch (net.output_activation) {
                    case OutputActivation::kIdentity:
                        break;
                    case OutputActivation::kTanh:
                        next[j] = std::tanh(next[j]);
                        break;
                    case OutputActivation::kScaledTanh:
                        next[j] = net.out_offset[j] + net.out_scale[j] * std::tanh(next[j]);
                        break;
                }
            }
        } else {
            for (auto& v : next) v = std::max(0.0, v);
        }
        tr.acts.push_back(next);
        cur = tr.acts.back();
    }
    return tr;
}

}  // namespace

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input) {
    return run_forward(net, input).acts.back();
}

GradientSet backward(const DenseNet& net, const std::vector<double>& input,
                     const std::vector<double>& output_grad,
                     std::vector<double>* input_grad) {
    Trace tr = run_forward(net, input);
    GradientSet grads = zero_gradients(net);

    std::vector<double> delta = output_grad;
    if (net.output_activation != OutputActivation::kIdentity) {
        for (std::size_t j = 0; j < delta.size(); ++j) {
            const double t = std::tanh(tr.pre_out[j]);
            double d = 1.0 - t * t;
            if (net.output_activation == OutputActivation::kScaledTanh)
                d *= net.out_scale[j];
            delta[j] *= d;
        }
    }

    for (std::size_t l = net.layer_count(); l-- > 0;) {
        const std::vector<double>& act_in = tr.acts[l];
        const std::size_t in_w = net.layer_sizes[l];
        const std::size_t out_w = net.layer_sizes[l + 1];
        for (std::size_t j = 0; j < out_w; ++j) {
            grads.biases[l][j] = delta[j];
            for (std::size_t i = 0; i < in_w; ++i)
                grads.weights[l][j * in_w + i] = delta[j] * act_in[i];
        }
        std::vector<double> prev(in_w, 0.0);
        for (std::size_t i = 0; i < in_w; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < out_w; ++j)
                acc += delta[j] * net.weights[l][j * in_w + i];
            if (l > 0 && act_in[i] <= 0.0) acc = 0.0;
            prev[i] = acc;
        }
        if (l == 0) {
            if (input_grad) *input_grad = prev;
            break;
        }
        delta = std::move(prev);
    }
    return grads;
}

}  // namespace dpu::serial_ref
