#include "dpu/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace dpu {

namespace {

constexpr char kMagic[8] = {'c', 'k', 'p', 't', '-', 'v', '1', '\0'};

void check(bool cond, const char* msg) {
    if (!cond) throw ShapeError(msg);
}

// C = A (n x k) * B^T stored row-major as (m x k), result n x m.
// Parallel over output rows; summation order fixed per element.
void gemm_bt(const double* a, std::size_t n, std::size_t k,
             const double* b, std::size_t m, double* c) {
    if (n < 8) {
        // Small batches (single-sample forward): plain dot products.
        for (std::size_t i = 0; i < n; ++i) {
            const double* arow = a + i * k;
            double* crow = c + i * m;
            for (std::size_t j = 0; j < m; ++j) {
                const double* brow = b + j * k;
                double acc = 0.0;
                for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
                crow[j] = acc;
            }
        }
        return;
    }
    // Transpose B once so the inner loop is contiguous and vectorizable.
    // Each c[i][j] still accumulates a[i][t]*b[j][t] in ascending t, so the
    // result is bit-identical to the dot-product form above.
    std::vector<double> bt(k * m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t t = 0; t < k; ++t) bt[t * m + j] = b[j * k + t];
#pragma omp parallel for schedule(static)
    for (long long ir = 0; ir < static_cast<long long>(n); ++ir) {
        const std::size_t i = static_cast<std::size_t>(ir);
        const double* arow = a + i * k;
        double* crow = c + i * m;
        std::fill(crow, crow + m, 0.0);
        for (std::size_t t = 0; t < k; ++t) {
            const double av = arow[t];
            const double* brow = bt.data() + t * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

// C = A^T (A is n x k, taken as k x n) * B (n x m), result k x m.
// Used for weight gradients: sum over the batch dimension n.
void gemm_at(const double* a, std::size_t n, std::size_t k,
             const double* b, std::size_t m, double* c) {
#pragma omp parallel for schedule(static)
    for (long long ir = 0; ir < static_cast<long long>(k); ++ir) {
        const std::size_t i = static_cast<std::size_t>(ir);
        double* crow = c + i * m;
        std::fill(crow, crow + m, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            const double av = a[s * k + i];
            if (av == 0.0) continue;
            const double* brow = b + s * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

// C = A (n x k) * B (k x m): input gradients, delta times weight matrix.
void gemm_nn(const double* a, std::size_t n, std::size_t k,
             const double* b, std::size_t m, double* c) {
#pragma omp parallel for schedule(static)
    for (long long ir = 0; ir < static_cast<long long>(n); ++ir) {
        const std::size_t i = static_cast<std::size_t>(ir);
        const double* arow = a + i * k;
        double* crow = c + i * m;
        std::fill(crow, crow + m, 0.0);
        for (std::size_t t = 0; t < k; ++t) {
            const double av = arow[t];
            if (av == 0.0) continue;
            const double* brow = b + t * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return v;
}

void write_vec(std::ostream& out, const std::vector<double>& v) {
    write_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_vec(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    if (n > (1ULL << 32)) throw std::runtime_error("checkpoint corrupt: absurd array length");
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return v;
}

}  // namespace

void GradientSet::add_scaled(const GradientSet& other, double scale) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i)
            weights[l][i] += scale * other.weights[l][i];
        for (std::size_t i = 0; i < biases[l].size(); ++i)
            biases[l][i] += scale * other.biases[l][i];
    }
}

void GradientSet::scale(double s) {
    for (auto& w : weights)
        for (auto& v : w) v *= s;
    for (auto& b : biases)
        for (auto& v : b) v *= s;
}

bool GradientSet::finite() const {
    for (const auto& w : weights)
        for (double v : w)
            if (!std::isfinite(v)) return false;
    for (const auto& b : biases)
        for (double v : b)
            if (!std::isfinite(v)) return false;
    return true;
}

DenseNet make_net(const std::vector<std::size_t>& layer_sizes,
                  OutputActivation out_act, Rng& init_rng) {
    check(layer_sizes.size() >= 2, "net needs at least input and output widths");
    for (std::size_t s : layer_sizes) check(s > 0, "layer width must be positive");

    DenseNet net;
    net.layer_sizes = layer_sizes;
    net.output_activation = out_act;
    const std::size_t layers = layer_sizes.size() - 1;
    net.weights.resize(layers);
    net.biases.resize(layers);
    net.opt.m_weights.resize(layers);
    net.opt.v_weights.resize(layers);
    net.opt.m_biases.resize(layers);
    net.opt.v_biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t fan_in = layer_sizes[l];
        const std::size_t fan_out = layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        net.weights[l].resize(fan_out * fan_in);
        net.biases[l].resize(fan_out);
        for (auto& w : net.weights[l]) w = init_rng.uniform(-bound, bound);
        for (auto& b : net.biases[l]) b = init_rng.uniform(-bound, bound);
        net.opt.m_weights[l].assign(fan_out * fan_in, 0.0);
        net.opt.v_weights[l].assign(fan_out * fan_in, 0.0);
        net.opt.m_biases[l].assign(fan_out, 0.0);
        net.opt.v_biases[l].assign(fan_out, 0.0);
    }
    if (out_act == OutputActivation::kScaledTanh) {
        net.out_scale.assign(layer_sizes.back(), 1.0);
        net.out_offset.assign(layer_sizes.back(), 0.0);
    }
    return net;
}

void set_output_box(DenseNet& net, const std::vector<double>& lo,
                    const std::vector<double>& hi) {
    check(net.output_activation == OutputActivation::kScaledTanh,
          "output box requires a scaled-tanh output");
    check(lo.size() == net.output_width() && hi.size() == net.output_width(),
          "box width mismatch");
    net.out_scale.resize(net.output_width());
    net.out_offset.resize(net.output_width());
    for (std::size_t i = 0; i < lo.size(); ++i) {
        net.out_scale[i] = 0.5 * (hi[i] - lo[i]);
        net.out_offset[i] = 0.5 * (hi[i] + lo[i]);
    }
}

Mat batch_forward(const DenseNet& net, const Mat& x, BatchCache* cache) {
    check(x.cols == net.input_width(), "forward: input width mismatch");
    const std::size_t layers = net.layer_count();
    if (cache) {
        cache->activations.assign(1, x);
        cache->pre_output.clear();
    }
    Mat cur = x;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t out_w = net.layer_sizes[l + 1];
        Mat next(cur.rows, out_w);
        gemm_bt(cur.data.data(), cur.rows, cur.cols,
                net.weights[l].data(), out_w, next.data.data());
        const bool last = (l + 1 == layers);
#pragma omp parallel for schedule(static)
        for (long long rr = 0; rr < static_cast<long long>(next.rows); ++rr) {
            double* row = next.row(static_cast<std::size_t>(rr));
            for (std::size_t j = 0; j < out_w; ++j) row[j] += net.biases[l][j];
            if (!last)
                for (std::size_t j = 0; j < out_w; ++j) row[j] = std::max(0.0, row[j]);
        }
        if (last) {
            if (cache) cache->pre_output.assign(1, next);
            switch (net.output_activation) {
                case OutputActivation::kIdentity:
                    break;
                case OutputActivation::kTanh:
                    for (auto& v : next.data) v = std::tanh(v);
                    break;
                case OutputActivation::kScaledTanh:
                    for (std::size_t r = 0; r < next.rows; ++r) {
                        double* row = next.row(r);
                        for (std::size_t j = 0; j < out_w; ++j)
                            row[j] = net.out_offset[j] + net.out_scale[j] * std::tanh(row[j]);
                    }
                    break;
            }
        }
        if (cache) cache->activations.push_back(next);
        cur = std::move(next);
    }
    return cur;
}

GradientSet batch_backward(const DenseNet& net, const BatchCache& cache,
                           const Mat& output_grads, Mat* input_grads) {
    const std::size_t layers = net.layer_count();
    check(cache.activations.size() == layers + 1, "backward: stale cache");
    check(output_grads.cols == net.output_width() &&
              output_grads.rows == cache.activations.front().rows,
          "backward: output grad shape mismatch");

    GradientSet grads = zero_gradients(net);
    const std::size_t n = output_grads.rows;

    // Output-activation chain rule.
    Mat delta = output_grads;
    if (net.output_activation != OutputActivation::kIdentity) {
        const Mat& pre = cache.pre_output.front();
        for (std::size_t r = 0; r < n; ++r) {
            double* drow = delta.row(r);
            const double* prow = pre.row(r);
            for (std::size_t j = 0; j < delta.cols; ++j) {
                const double t = std::tanh(prow[j]);
                double d = (1.0 - t * t);
                if (net.output_activation == OutputActivation::kScaledTanh)
                    d *= net.out_scale[j];
                drow[j] *= d;
            }
        }
    }

    for (std::size_t l = layers; l-- > 0;) {
        const Mat& act_in = cache.activations[l];
        const std::size_t out_w = net.layer_sizes[l + 1];
        // dW = act_in^T * delta, transposed into the (out x in) layout.
        Mat wgrad_t(act_in.cols, out_w);
        gemm_at(act_in.data.data(), n, act_in.cols, delta.data.data(), out_w,
                wgrad_t.data.data());
        for (std::size_t i = 0; i < act_in.cols; ++i)
            for (std::size_t j = 0; j < out_w; ++j)
                grads.weights[l][j * act_in.cols + i] = wgrad_t.at(i, j);
        for (std::size_t r = 0; r < n; ++r) {
            const double* drow = delta.row(r);
            for (std::size_t j = 0; j < out_w; ++j) grads.biases[l][j] += drow[j];
        }
        if (l == 0 && !input_grads) break;
        Mat prev_delta(n, act_in.cols);
        gemm_nn(delta.data.data(), n, out_w, net.weights[l].data(), act_in.cols,
                prev_delta.data.data());
        if (l > 0) {
            // ReLU mask from the post-activation values of layer l.
#pragma omp parallel for schedule(static)
            for (long long rr = 0; rr < static_cast<long long>(n); ++rr) {
                const std::size_t r = static_cast<std::size_t>(rr);
                double* drow = prev_delta.row(r);
                const double* arow = act_in.row(r);
                for (std::size_t j = 0; j < act_in.cols; ++j)
                    if (arow[j] <= 0.0) drow[j] = 0.0;
            }
        }
        if (l == 0) {
            *input_grads = std::move(prev_delta);
            break;
        }
        delta = std::move(prev_delta);
    }
    return grads;
}

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input) {
    check(input.size() == net.input_width(), "forward: input width mismatch");
    Mat x(1, input.size());
    std::copy(input.begin(), input.end(), x.data.begin());
    Mat y = batch_forward(net, x);
    return {y.data.begin(), y.data.end()};
}

GradientSet backward(const DenseNet& net, const std::vector<double>& input,
                     const std::vector<double>& output_grad,
                     std::vector<double>* input_grad) {
    check(output_grad.size() == net.output_width(),
          "backward: output grad width mismatch");
    Mat x(1, input.size());
    std::copy(input.begin(), input.end(), x.data.begin());
    BatchCache cache;
    batch_forward(net, x, &cache);
    Mat og(1, output_grad.size());
    std::copy(output_grad.begin(), output_grad.end(), og.data.begin());
    Mat ig;
    GradientSet g = batch_backward(net, cache, og, input_grad ? &ig : nullptr);
    if (input_grad) *input_grad = {ig.data.begin(), ig.data.end()};
    return g;
}

void adam_step(DenseNet& net, const GradientSet& grads, double learning_rate,
               double beta1, double beta2, double epsilon) {
    check(grads.weights.size() == net.weights.size(), "adam: gradient layer mismatch");
    if (!grads.finite())
        throw std::runtime_error("adam: non-finite gradients, aborting update");
    net.opt.step_count += 1;
    const double t = static_cast<double>(net.opt.step_count);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    auto update = [&](std::vector<double>& p, std::vector<double>& m,
                      std::vector<double>& v, const std::vector<double>& g) {
        check(p.size() == g.size(), "adam: gradient shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= learning_rate * mhat / (std::sqrt(vhat) + epsilon);
        }
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        update(net.weights[l], net.opt.m_weights[l], net.opt.v_weights[l], grads.weights[l]);
        update(net.biases[l], net.opt.m_biases[l], net.opt.v_biases[l], grads.biases[l]);
    }
}

void soft_update(DenseNet& target, const DenseNet& source, double tau) {
    check(same_shape(target, source), "soft_update: shape mismatch");
    if (tau < 0.0 || tau > 1.0)
        throw std::invalid_argument("soft_update: tau outside [0,1]");
    for (std::size_t l = 0; l < target.weights.size(); ++l) {
        for (std::size_t i = 0; i < target.weights[l].size(); ++i)
            target.weights[l][i] = tau * source.weights[l][i] + (1.0 - tau) * target.weights[l][i];
        for (std::size_t i = 0; i < target.biases[l].size(); ++i)
            target.biases[l][i] = tau * source.biases[l][i] + (1.0 - tau) * target.biases[l][i];
    }
}

DenseNet clone_into_target(const DenseNet& source) {
    DenseNet clone = source;
    for (auto& m : clone.opt.m_weights) std::fill(m.begin(), m.end(), 0.0);
    for (auto& v : clone.opt.v_weights) std::fill(v.begin(), v.end(), 0.0);
    for (auto& m : clone.opt.m_biases) std::fill(m.begin(), m.end(), 0.0);
    for (auto& v : clone.opt.v_biases) std::fill(v.begin(), v.end(), 0.0);
    clone.opt.step_count = 0;
    return clone;
}

GradientSet zero_gradients(const DenseNet& net) {
    GradientSet g;
    g.weights.reserve(net.weights.size());
    g.biases.reserve(net.biases.size());
    for (const auto& w : net.weights) g.weights.emplace_back(w.size(), 0.0);
    for (const auto& b : net.biases) g.biases.emplace_back(b.size(), 0.0);
    return g;
}

bool same_shape(const DenseNet& a, const DenseNet& b) {
    return a.layer_sizes == b.layer_sizes && a.output_activation == b.output_activation;
}

void save_net(const DenseNet& net, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, net.layer_sizes.size());
    for (std::size_t s : net.layer_sizes) write_u64(out, s);
    write_u64(out, static_cast<std::uint64_t>(net.output_activation));
    write_vec(out, net.out_scale);
    write_vec(out, net.out_offset);
    for (const auto& w : net.weights) write_vec(out, w);
    for (const auto& b : net.biases) write_vec(out, b);
    write_u64(out, net.opt.step_count);
    for (const auto& m : net.opt.m_weights) write_vec(out, m);
    for (const auto& v : net.opt.v_weights) write_vec(out, v);
    for (const auto& m : net.opt.m_biases) write_vec(out, m);
    for (const auto& v : net.opt.v_biases) write_vec(out, v);
}

DenseNet load_net(std::istream& in) {
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic/version tag (want ckpt-v1)");
    DenseNet net;
    const std::uint64_t n_sizes = read_u64(in);
    if (n_sizes < 2 || n_sizes > 64)
        throw std::runtime_error("checkpoint corrupt: bad layer count");
    net.layer_sizes.resize(n_sizes);
    for (auto& s : net.layer_sizes) s = read_u64(in);
    const std::uint64_t act = read_u64(in);
    if (act > 2) throw std::runtime_error("checkpoint corrupt: bad activation tag");
    net.output_activation = static_cast<OutputActivation>(act);
    net.out_scale = read_vec(in);
    net.out_offset = read_vec(in);
    const std::size_t layers = n_sizes - 1;
    net.weights.resize(layers);
    net.biases.resize(layers);
    for (auto& w : net.weights) w = read_vec(in);
    for (auto& b : net.biases) b = read_vec(in);
    net.opt.step_count = read_u64(in);
    net.opt.m_weights.resize(layers);
    net.opt.v_weights.resize(layers);
    net.opt.m_biases.resize(layers);
    net.opt.v_biases.resize(layers);
    for (auto& m : net.opt.m_weights) m = read_vec(in);
    for (auto& v : net.opt.v_weights) v = read_vec(in);
    for (auto& m : net.opt.m_biases) m = read_vec(in);
    for (auto& v : net.opt.v_biases) v = read_vec(in);
    for (std::size_t l = 0; l < layers; ++l) {
        if (net.weights[l].size() != net.layer_sizes[l] * net.layer_sizes[l + 1] ||
            net.biases[l].size() != net.layer_sizes[l + 1])
            throw std::runtime_error("checkpoint corrupt: parameter shape mismatch");
    }
    return net;
}

}  // namespace dpu
