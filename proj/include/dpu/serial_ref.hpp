#pragma once

#include <vector>

#include "dpu/net.hpp"

// Straight-line single-sample reference kernels. Kept deliberately naive
// and independent of the batched OpenMP path so tests and the benchmark
// can compare the two.
namespace dpu::serial_ref {

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input);

GradientSet backward(const DenseNet& net, const std::vector<double>& input,
                     const std::vector<double>& output_grad,
                     std::vector<double>* input_grad = nullptr);

}  // namespace dpu::serial_ref
