#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zorb/conv.hpp"
#include "zorb/linalg.hpp"
#include "zorb/matrix.hpp"
#include "zorb/metrics.hpp"
#include "zorb/network.hpp"
#include "zorb/rng.hpp"

namespace zorb {

struct ZorbConfig {
    double rcond = 1e-15;       // relative singular-value cutoff in every pseudoinverse
    double epsilon = 1e-6;      // activation inversion margin
    std::uint64_t seed = 0;     // drives ReLU deactivation draws
    bool record_timings = true;
    Task task = Task::Regression;
};

struct TrainReport {
    std::vector<double> per_layer_seconds;     // outer-loop time per layer
    std::vector<int> layer_solve_counts;       // parameter writes per layer
    double final_train_mse = 0.0;
    std::optional<double> final_train_accuracy;
    double wall_clock_seconds = 0.0;
    std::size_t iterations = 0; // iterative baselines only
    // config echo
    std::uint64_t seed = 0;
    double rcond = 0.0;
    double epsilon = 0.0;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed, std::size_t index) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return r.next_u64();
}

inline Matrix sub_col_broadcast(const Matrix& a, const Matrix& b) {
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double bi = b(i, 0);
        double* ci = c.row_ptr(i);
        for (std::size_t j = 0; j < a.cols(); ++j) ci[j] -= bi;
    }
    return c;
}

/// Conv output feedback (out_h*out_w*nf x n) -> patch layout (nf x n*p).
inline Matrix conv_feedback_to_patches(const ConvLayer& c, const Matrix& f) {
    const std::size_t p = c.patches_per_image();
    const std::size_t nf = c.num_filters();
    const std::size_t n = f.cols();
    if (f.rows() != p * nf)
        throw DimError("conv feedback: expected " + std::to_string(p * nf) + " rows, got " +
                       std::to_string(f.rows()));
    Matrix fp(nf, n * p);
    for (std::size_t fi = 0; fi < nf; ++fi) {
        double* dst = fp.row_ptr(fi);
        for (std::size_t q = 0; q < p; ++q) {
            const double* src = f.row_ptr(q * nf + fi);
            for (std::size_t s = 0; s < n; ++s) dst[s * p + q] = src[s];
        }
    }
    return fp;
}

/// Feedback through a conv layer: joint pseudoinverse of the stacked
/// filter matrix applied per patch column, folded back to image geometry
/// with overlap averaging.
inline Matrix conv_feedback(const ConvLayer& c, const Matrix& f, double rcond) {
    Matrix fp = conv_feedback_to_patches(c, f);
    fp = sub_col_broadcast(fp, c.bias);
    Matrix patches = matmul(pinv(c.filters, rcond), fp);
    return fold_patches(patches, c.input_geometry, c.kernel_h, c.kernel_w, c.stride);
}

} // namespace detail

/// Propagate the target Y down from the output to the output interface of
/// layer `target_index`: dense layers apply W+ (F - b), activation layers
/// deactivate (storing their corrections), conv layers invert the stacked
/// filter product and fold. Mutates activation states.
inline Matrix compute_feedback(Network& net, std::size_t target_index, const Matrix& y,
                               double rcond) {
    Matrix f = y;
    for (std::size_t j = net.size(); j-- > target_index + 1;) {
        Layer& l = net.layer(j);
        if (auto* d = std::get_if<DenseLayer>(&l)) {
            f = matmul(pinv(d->w, rcond), detail::sub_col_broadcast(f, d->b));
        } else if (auto* a = std::get_if<ActivationState>(&l)) {
            f = a->deactivate(f);
        } else if (auto* c = std::get_if<ConvLayer>(&l)) {
            f = detail::conv_feedback(*c, f, rcond);
        }
        // flatten: identity
    }
    return f;
}

/// One-shot layer solve: augment the layer input with a ones-row, fit
/// [W | b] = F * X_aug+ and split off the bias column.
inline std::pair<Matrix, Matrix> solve_layer(const Matrix& f, const Matrix& x, double rcond) {
    if (f.cols() != x.cols())
        throw DimError("solve_layer: feedback " + f.shape_str() + " vs input " + x.shape_str());
    Matrix wb = lstsq_solve(hstack_ones(x), f, rcond); // d_out x (d_in + 1)
    Matrix w(f.rows(), x.rows());
    Matrix b(f.rows(), 1);
    for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) = wb(i, j);
        b(i, 0) = wb(i, x.rows());
    }
    return {std::move(w), std::move(b)};
}

/// Train a network with ZORB: layers are solved exactly once, in input to
/// output order. Before each solve a forward pass of the current
/// representation refreshes activation scaling, then the feedback target
/// is pseudoinverse-propagated down to the layer being trained.
inline TrainReport zorb_train(Network& net, const Matrix& x, const Matrix& y,
                              const ZorbConfig& cfg) {
    using clock = std::chrono::steady_clock;
    if (net.input_dim() != x.rows())
        throw DimError("zorb_train: network expects " + std::to_string(net.input_dim()) +
                       "-dim input, X has " + std::to_string(x.rows()) + " rows");
    if (net.output_dim() != y.rows())
        throw DimError("zorb_train: network emits " + std::to_string(net.output_dim()) +
                       "-dim output, Y has " + std::to_string(y.rows()) + " rows");
    if (x.cols() != y.cols())
        throw DimError("zorb_train: X has " + std::to_string(x.cols()) + " samples, Y has " +
                       std::to_string(y.cols()));

    for (std::size_t i = 0; i < net.size(); ++i)
        if (auto* a = std::get_if<ActivationState>(&net.layer(i))) {
            a->set_epsilon(cfg.epsilon);
            a->reseed(detail::derive_seed(cfg.seed, i));
            a->clear_state();
        }

    TrainReport report;
    report.seed = cfg.seed;
    report.rcond = cfg.rcond;
    report.epsilon = cfg.epsilon;
    report.per_layer_seconds.assign(net.size(), 0.0);
    report.layer_solve_counts.assign(net.size(), 0);

    const auto t_start = clock::now();
    Matrix rep = x; // representation at the input of the layer being visited

    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto t_layer = clock::now();
        try {
            Layer& l = net.layer(i);
            if (auto* d = std::get_if<DenseLayer>(&l)) {
                Matrix scaling = rep;
                net.forward_from(scaling, i); // set scaling
                Matrix f = compute_feedback(net, i, y, cfg.rcond);
                auto [w, b] = solve_layer(f, rep, cfg.rcond);
                d->w = std::move(w);
                d->b = std::move(b);
                ++report.layer_solve_counts[i];
                rep = add_col_broadcast(matmul(d->w, rep), d->b);
            } else if (auto* c = std::get_if<ConvLayer>(&l)) {
                Matrix scaling = rep;
                net.forward_from(scaling, i);
                Matrix f = compute_feedback(net, i, y, cfg.rcond);
                Matrix patches = extract_patches(rep, c->input_geometry, c->kernel_h,
                                                 c->kernel_w, c->stride);
                Matrix f_patch = detail::conv_feedback_to_patches(*c, f);
                auto [filters, bias] = solve_layer(f_patch, patches, cfg.rcond);
                c->filters = std::move(filters);
                c->bias = std::move(bias);
                ++report.layer_solve_counts[i];
                rep = conv_forward(*c, rep);
            } else if (auto* a = std::get_if<ActivationState>(&l)) {
                rep = a->activate(rep);
            }
            // flatten: identity
        } catch (const NumericError& e) {
            throw NumericError("zorb_train: layer " + std::to_string(i) + ": " + e.what());
        }
        if (cfg.record_timings)
            report.per_layer_seconds[i] = std::chrono::duration<double>(clock::now() - t_layer).count();
    }

    report.wall_clock_seconds = std::chrono::duration<double>(clock::now() - t_start).count();

    Network eval = net;
    Metrics m = compute_metrics(eval.forward(x), y, cfg.task);
    report.final_train_mse = m.mse;
    report.final_train_accuracy = m.accuracy;
    return report;
}

/// Conv entry point; the schedule is identical (zorb_train already treats
/// conv layers as neural layers), so this simply delegates.
inline TrainReport zorb_train_conv(Network& net, const Matrix& images, const Matrix& y,
                                   const ZorbConfig& cfg) {
    return zorb_train(net, images, y, cfg);
}

} // namespace zorb
