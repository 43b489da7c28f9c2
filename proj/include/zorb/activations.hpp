#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "zorb/errors.hpp"
#include "zorb/matrix.hpp"
#include "zorb/rng.hpp"

namespace zorb {

enum class ActivationKind { Linear, Sigmoid, Tanh, ReLU, Softmax };

inline const char* to_string(ActivationKind k) {
    switch (k) {
        case ActivationKind::Linear: return "linear";
        case ActivationKind::Sigmoid: return "sigmoid";
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::ReLU: return "relu";
        case ActivationKind::Softmax: return "softmax";
    }
    return "?";
}

/// An activation function plus the linear corrections that make it
/// invertible on arbitrary feedback matrices.
///
/// Sigmoid/Tanh deactivation records the feedback's [low, high] span and
/// maps it affinely into the function's canonical range (shrunk by epsilon
/// to keep the analytic inverse finite); the next activate() reverses that
/// map, so the stored correction becomes part of the trained model.
/// Softmax stores the per-column normalizers of its last forward pass and
/// consumes them on deactivation. ReLU replaces infeasible negative
/// feedback with seeded draws from (-1, 0).
class ActivationState {
public:
    ActivationState() = default;
    explicit ActivationState(ActivationKind kind, double epsilon = 1e-6,
                             std::uint64_t rng_seed = 0)
        : kind_(kind), epsilon_(epsilon), rng_(rng_seed) {}

    ActivationKind kind() const { return kind_; }
    double epsilon() const { return epsilon_; }
    bool has_correction() const { return correction_.has_value(); }
    double correction_low() const { return correction_->low; }
    double correction_high() const { return correction_->high; }
    bool has_softmax_totals() const { return !softmax_log_totals_.empty(); }
    /// Per-column normalizers of the last forward pass, stored in the log
    /// domain (log of the column's exponential sum) so huge logits cannot
    /// overflow.
    const std::vector<double>& softmax_log_totals() const { return softmax_log_totals_; }

    void set_epsilon(double e) { epsilon_ = e; }
    void reseed(std::uint64_t seed) { rng_ = Rng(seed); }
    std::uint64_t rng_state() const { return rng_.state(); }
    void set_rng_state(std::uint64_t s) { rng_.set_state(s); }
    void set_correction(double low, double high) { correction_ = Correction{low, high}; }
    void set_softmax_log_totals(std::vector<double> t) { softmax_log_totals_ = std::move(t); }
    void clear_state() {
        correction_.reset();
        softmax_log_totals_.clear();
    }

    /// Element-wise forward pass. Applies the stored correction for
    /// Sigmoid/Tanh; records per-column normalizers for Softmax.
    Matrix activate(const Matrix& x) {
        switch (kind_) {
            case ActivationKind::Linear: return x;
            case ActivationKind::Sigmoid: return activate_squashing(x, /*tanh=*/false);
            case ActivationKind::Tanh: return activate_squashing(x, /*tanh=*/true);
            case ActivationKind::ReLU: {
                Matrix y = x;
                for (std::size_t i = 0; i < y.rows(); ++i)
                    for (std::size_t j = 0; j < y.cols(); ++j)
                        if (y(i, j) < 0.0) y(i, j) = 0.0;
                return y;
            }
            case ActivationKind::Softmax: return activate_softmax(x);
        }
        throw Error("activate: unknown kind");
    }

    /// Inverse pass on a feedback matrix. Mutates stored state: records
    /// Sigmoid/Tanh corrections, consumes Softmax totals, draws ReLU
    /// replacements from the seeded generator.
    Matrix deactivate(const Matrix& f) {
        switch (kind_) {
            case ActivationKind::Linear: return f;
            case ActivationKind::Sigmoid: return deactivate_squashing(f, /*tanh=*/false);
            case ActivationKind::Tanh: return deactivate_squashing(f, /*tanh=*/true);
            case ActivationKind::ReLU: {
                Matrix y = f;
                for (std::size_t i = 0; i < y.rows(); ++i)
                    for (std::size_t j = 0; j < y.cols(); ++j)
                        if (y(i, j) < 0.0) y(i, j) = rng_.uniform_open(-1.0, 0.0);
                return y;
            }
            case ActivationKind::Softmax: return deactivate_softmax(f);
        }
        throw Error("deactivate: unknown kind");
    }

    /// Max |activate(deactivate(F)) - F| over entries unaffected by
    /// epsilon clipping (interior entries) or ReLU randomization.
    double roundtrip_check(const Matrix& f) {
        ActivationState probe = *this;
        Matrix d = probe.deactivate(f);
        Matrix back = probe.activate(d);
        double lo = f(0, 0), hi = f(0, 0);
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t j = 0; j < f.cols(); ++j) {
                lo = std::min(lo, f(i, j));
                hi = std::max(hi, f(i, j));
            }
        double worst = 0.0;
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t j = 0; j < f.cols(); ++j) {
                const double v = f(i, j);
                if (kind_ == ActivationKind::Sigmoid || kind_ == ActivationKind::Tanh) {
                    if (v <= lo || v >= hi) continue;
                } else if (kind_ == ActivationKind::ReLU) {
                    if (v < 0.0) continue;
                }
                worst = std::max(worst, std::abs(back(i, j) - v));
            }
        return worst;
    }

private:
    struct Correction {
        double low;
        double high;
    };

    Matrix activate_squashing(const Matrix& x, bool use_tanh) {
        Matrix y(x.rows(), x.cols());
        const double canon_lo = use_tanh ? -1.0 + epsilon_ : epsilon_;
        const double canon_hi = 1.0 - epsilon_;
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < x.cols(); ++j) {
                double s = use_tanh ? std::tanh(x(i, j)) : 1.0 / (1.0 + std::exp(-x(i, j)));
                if (correction_) {
                    const double t = (s - canon_lo) / (canon_hi - canon_lo);
                    s = correction_->low + t * (correction_->high - correction_->low);
                }
                y(i, j) = s;
            }
        return y;
    }

    Matrix deactivate_squashing(const Matrix& f, bool use_tanh) {
        double lo = f(0, 0), hi = f(0, 0);
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t j = 0; j < f.cols(); ++j) {
                lo = std::min(lo, f(i, j));
                hi = std::max(hi, f(i, j));
            }
        correction_ = Correction{lo, hi};
        const double canon_lo = use_tanh ? -1.0 + epsilon_ : epsilon_;
        const double canon_hi = 1.0 - epsilon_;
        const double span = hi - lo;
        Matrix y(f.rows(), f.cols());
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t j = 0; j < f.cols(); ++j) {
                // degenerate feedback (all one value) maps to the range midpoint
                const double t = (span > 0.0) ? (f(i, j) - lo) / span : 0.5;
                const double s = canon_lo + t * (canon_hi - canon_lo);
                y(i, j) = use_tanh ? std::atanh(s) : std::log(s / (1.0 - s));
            }
        return y;
    }

    Matrix activate_softmax(const Matrix& x) {
        Matrix y(x.rows(), x.cols());
        softmax_log_totals_.assign(x.cols(), 0.0);
        for (std::size_t j = 0; j < x.cols(); ++j) {
            double m = x(0, j);
            for (std::size_t i = 1; i < x.rows(); ++i) m = std::max(m, x(i, j));
            double sum = 0.0;
            for (std::size_t i = 0; i < x.rows(); ++i) sum += std::exp(x(i, j) - m);
            for (std::size_t i = 0; i < x.rows(); ++i) y(i, j) = std::exp(x(i, j) - m) / sum;
            // log(sum_i exp(x_ij))
            softmax_log_totals_[j] = m + std::log(sum);
        }
        return y;
    }

    Matrix deactivate_softmax(const Matrix& f) {
        if (softmax_log_totals_.empty())
            throw StateError("softmax deactivate: no stored totals (forward pass required)");
        if (softmax_log_totals_.size() != f.cols())
            throw DimError("softmax deactivate: feedback has " + std::to_string(f.cols()) +
                           " columns, totals have " + std::to_string(softmax_log_totals_.size()));
        Matrix y(f.rows(), f.cols());
        for (std::size_t j = 0; j < f.cols(); ++j) {
            const double log_total = softmax_log_totals_[j];
            for (std::size_t i = 0; i < f.rows(); ++i) {
                const double v = std::max(f(i, j), epsilon_);
                y(i, j) = std::log(v) + log_total;
            }
        }
        softmax_log_totals_.clear(); // one-shot consumption
        return y;
    }

    ActivationKind kind_ = ActivationKind::Linear;
    double epsilon_ = 1e-6;
    std::optional<Correction> correction_;
    std::vector<double> softmax_log_totals_;
    Rng rng_{0};
};

} // namespace zorb
