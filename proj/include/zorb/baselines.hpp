#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "zorb/linalg.hpp"
#include "zorb/matrix.hpp"
#include "zorb/metrics.hpp"
#include "zorb/network.hpp"
#include "zorb/rng.hpp"
#include "zorb/train.hpp"

namespace zorb {

struct AdamConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
    std::size_t batch_size = 32;
    std::size_t max_iterations = 2500;
    std::optional<double> target_mse; // early stop once full-train MSE reaches this
    std::size_t eval_every = 50;      // full-train MSE checkpoint cadence
    std::uint64_t seed = 0;
    Task task = Task::Regression;

    void validate() const {
        if (learning_rate < 0.0) throw DimError("adam: learning_rate must be >= 0");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
            throw DimError("adam: betas must lie in [0, 1)");
        if (batch_size < 1) throw DimError("adam: batch_size must be >= 1");
    }
};

/// Gradients of mean squared error w.r.t. every dense layer's parameters.
/// Indexed parallel to the network's layer list (empty for non-dense).
struct GradientSet {
    std::vector<Matrix> dw;
    std::vector<Matrix> db;
};

namespace detail {

inline void check_differentiable(const Network& net) {
    for (std::size_t i = 0; i < net.size(); ++i) {
        const Layer& l = net.layer(i);
        if (std::holds_alternative<ConvLayer>(l) || std::holds_alternative<FlattenLayer>(l))
            throw DimError("backprop_grads: layer " + std::to_string(i) +
                           " is not a dense/activation layer");
        if (const auto* a = std::get_if<ActivationState>(&l))
            if (a->has_correction())
                throw StateError("backprop_grads: layer " + std::to_string(i) +
                                 " has ZORB corrections active");
    }
}

inline Matrix gather_cols(const Matrix& x, const std::vector<std::size_t>& idx,
                          std::size_t first, std::size_t count) {
    Matrix out(x.rows(), count);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* src = x.row_ptr(i);
        double* dst = out.row_ptr(i);
        for (std::size_t j = 0; j < count; ++j) dst[j] = src[idx[first + j]];
    }
    return out;
}

} // namespace detail

/// Chain-rule gradients of MSE = (1/(n*d_out)) * sum (f(X) - Y)^2 for a
/// dense + activation stack. Matches central finite differences.
inline GradientSet backprop_grads(Network& net, const Matrix& x, const Matrix& y) {
    detail::check_differentiable(net);
    const std::size_t L = net.size();

    // forward, caching each layer's input and output
    std::vector<Matrix> inputs(L), outputs(L);
    Matrix cur = x;
    for (std::size_t i = 0; i < L; ++i) {
        inputs[i] = cur;
        net.apply_layer(cur, i);
        outputs[i] = cur;
    }
    if (cur.rows() != y.rows() || cur.cols() != y.cols())
        throw DimError("backprop_grads: prediction " + cur.shape_str() + " vs targets " +
                       y.shape_str());

    GradientSet grads;
    grads.dw.resize(L);
    grads.db.resize(L);

    const double scale = 2.0 / static_cast<double>(y.rows() * y.cols());
    Matrix g(cur.rows(), cur.cols());
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = scale * (cur(i, j) - y(i, j));

    for (std::size_t i = L; i-- > 0;) {
        Layer& l = net.layer(i);
        if (auto* d = std::get_if<DenseLayer>(&l)) {
            grads.dw[i] = matmul(g, transpose(inputs[i]));
            Matrix db(g.rows(), 1);
            for (std::size_t r = 0; r < g.rows(); ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < g.cols(); ++c) s += g(r, c);
                db(r, 0) = s;
            }
            grads.db[i] = std::move(db);
            g = matmul(transpose(d->w), g);
        } else if (auto* a = std::get_if<ActivationState>(&l)) {
            const Matrix& out = outputs[i];
            switch (a->kind()) {
                case ActivationKind::Linear: break;
                case ActivationKind::Sigmoid:
                    for (std::size_t r = 0; r < g.rows(); ++r)
                        for (std::size_t c = 0; c < g.cols(); ++c)
                            g(r, c) *= out(r, c) * (1.0 - out(r, c));
                    break;
                case ActivationKind::Tanh:
                    for (std::size_t r = 0; r < g.rows(); ++r)
                        for (std::size_t c = 0; c < g.cols(); ++c)
                            g(r, c) *= 1.0 - out(r, c) * out(r, c);
                    break;
                case ActivationKind::ReLU:
                    for (std::size_t r = 0; r < g.rows(); ++r)
                        for (std::size_t c = 0; c < g.cols(); ++c)
                            if (out(r, c) <= 0.0) g(r, c) = 0.0;
                    break;
                case ActivationKind::Softmax:
                    // dx = p .* (g - <g, p>) column-wise
                    for (std::size_t c = 0; c < g.cols(); ++c) {
                        double dot = 0.0;
                        for (std::size_t r = 0; r < g.rows(); ++r) dot += g(r, c) * out(r, c);
                        for (std::size_t r = 0; r < g.rows(); ++r)
                            g(r, c) = out(r, c) * (g(r, c) - dot);
                    }
                    break;
            }
        }
    }
    return grads;
}

/// Mini-batch Adam on MSE. Batches are drawn from a seeded Fisher-Yates
/// shuffle refreshed each epoch; one iteration = one mini-batch step.
/// Stops at max_iterations or when the full-train MSE (checked every
/// eval_every iterations) reaches target_mse.
inline TrainReport adam_train(Network& net, const Matrix& x, const Matrix& y,
                              const AdamConfig& cfg) {
    using clock = std::chrono::steady_clock;
    cfg.validate();
    detail::check_differentiable(net);

    const std::size_t L = net.size();
    const std::size_t n = x.cols();
    const std::size_t batch = std::min(cfg.batch_size, n);

    std::vector<Matrix> mw(L), vw(L), mb(L), vb(L);
    for (std::size_t i = 0; i < L; ++i)
        if (auto* d = std::get_if<DenseLayer>(&net.layer(i))) {
            mw[i] = Matrix(d->w.rows(), d->w.cols());
            vw[i] = Matrix(d->w.rows(), d->w.cols());
            mb[i] = Matrix(d->b.rows(), 1);
            vb[i] = Matrix(d->b.rows(), 1);
        }

    Rng rng(cfg.seed);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t cursor = n; // forces a shuffle on first use

    TrainReport report;
    report.seed = cfg.seed;
    report.per_layer_seconds.assign(L, 0.0);
    report.layer_solve_counts.assign(L, 0);

    const auto t_start = clock::now();
    std::size_t iter = 0;
    bool reached_target = false;

    auto adam_step = [&](Matrix& theta, Matrix& m, Matrix& v, const Matrix& grad, double t) {
        const double bc1 = 1.0 - std::pow(cfg.beta1, t);
        const double bc2 = 1.0 - std::pow(cfg.beta2, t);
        for (std::size_t i = 0; i < theta.rows(); ++i)
            for (std::size_t j = 0; j < theta.cols(); ++j) {
                const double gij = grad(i, j);
                m(i, j) = cfg.beta1 * m(i, j) + (1.0 - cfg.beta1) * gij;
                v(i, j) = cfg.beta2 * v(i, j) + (1.0 - cfg.beta2) * gij * gij;
                const double mhat = m(i, j) / bc1;
                const double vhat = v(i, j) / bc2;
                theta(i, j) -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps_hat);
            }
    };

    while (iter < cfg.max_iterations) {
        if (cursor + batch > n) {
            rng.shuffle(perm);
            cursor = 0;
        }
        Matrix xb = detail::gather_cols(x, perm, cursor, batch);
        Matrix yb = detail::gather_cols(y, perm, cursor, batch);
        cursor += batch;

        GradientSet g = backprop_grads(net, xb, yb);
        ++iter;
        for (std::size_t i = 0; i < L; ++i)
            if (auto* d = std::get_if<DenseLayer>(&net.layer(i))) {
                adam_step(d->w, mw[i], vw[i], g.dw[i], static_cast<double>(iter));
                adam_step(d->b, mb[i], vb[i], g.db[i], static_cast<double>(iter));
                if (!d->w.is_finite() || !d->b.is_finite())
                    throw NumericError("adam_train: parameters diverged to NaN at iteration " +
                                       std::to_string(iter));
            }

        if (cfg.target_mse && (iter % cfg.eval_every == 0 || iter == cfg.max_iterations)) {
            Network eval = net;
            if (compute_metrics(eval.forward(x), y, Task::Regression).mse <= *cfg.target_mse) {
                reached_target = true;
                break;
            }
        }
    }

    report.iterations = iter;
    report.wall_clock_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    (void)reached_target;

    Network eval = net;
    Metrics m = compute_metrics(eval.forward(x), y, cfg.task);
    report.final_train_mse = m.mse;
    report.final_train_accuracy = m.accuracy;
    return report;
}

/// ELM-style trainer: hidden dense layers get fresh seeded random weights
/// and are never trained; only the final dense layer is solved against the
/// deactivated targets. Activations after the final dense layer are
/// inverted the same way ZORB does it.
inline TrainReport elm_train(Network& net, const Matrix& x, const Matrix& y, double rcond,
                             std::uint64_t seed, Task task = Task::Regression) {
    using clock = std::chrono::steady_clock;
    std::size_t last_dense = net.size();
    for (std::size_t i = net.size(); i-- > 0;) {
        const Layer& l = net.layer(i);
        if (std::holds_alternative<ConvLayer>(l) || std::holds_alternative<FlattenLayer>(l))
            throw DimError("elm_train: layer " + std::to_string(i) +
                           " is not a dense/activation layer");
        if (std::holds_alternative<DenseLayer>(l) && last_dense == net.size()) last_dense = i;
    }
    if (last_dense == net.size()) throw DimError("elm_train: network has no dense layer");

    // classic ELM random projection: W, b ~ U(-1, 1) per hidden layer
    for (std::size_t i = 0; i < last_dense; ++i)
        if (auto* d = std::get_if<DenseLayer>(&net.layer(i))) {
            Rng lr(detail::derive_seed(seed, i));
            for (std::size_t r = 0; r < d->w.rows(); ++r)
                for (std::size_t c = 0; c < d->w.cols(); ++c) d->w(r, c) = lr.uniform(-1.0, 1.0);
            for (std::size_t r = 0; r < d->b.rows(); ++r) d->b(r, 0) = lr.uniform(-1.0, 1.0);
        }
    for (std::size_t i = 0; i < net.size(); ++i)
        if (auto* a = std::get_if<ActivationState>(&net.layer(i))) {
            a->reseed(detail::derive_seed(seed, i));
            a->clear_state();
        }

    TrainReport report;
    report.seed = seed;
    report.rcond = rcond;
    report.per_layer_seconds.assign(net.size(), 0.0);
    report.layer_solve_counts.assign(net.size(), 0);

    const auto t_start = clock::now();

    // random-feature representation at the last dense layer's input
    Matrix h = x;
    for (std::size_t i = 0; i < last_dense; ++i) net.apply_layer(h, i);

    // forward once so output activations hold fresh scaling, then invert
    // the trailing activations onto the targets
    Matrix scaling = h;
    net.forward_from(scaling, last_dense);
    Matrix f = y;
    for (std::size_t j = net.size(); j-- > last_dense + 1;)
        if (auto* a = std::get_if<ActivationState>(&net.layer(j))) f = a->deactivate(f);

    auto [w, b] = solve_layer(f, h, rcond);
    auto* out_layer = std::get_if<DenseLayer>(&net.layer(last_dense));
    out_layer->w = std::move(w);
    out_layer->b = std::move(b);
    ++report.layer_solve_counts[last_dense];

    report.wall_clock_seconds = std::chrono::duration<double>(clock::now() - t_start).count();

    Network eval = net;
    Metrics m = compute_metrics(eval.forward(x), y, task);
    report.final_train_mse = m.mse;
    report.final_train_accuracy = m.accuracy;
    return report;
}

} // namespace zorb
