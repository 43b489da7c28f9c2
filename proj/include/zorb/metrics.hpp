#pragma once

#include <cstddef>
#include <optional>

#include "zorb/errors.hpp"
#include "zorb/matrix.hpp"

namespace zorb {

enum class Task { Regression, Classification };

struct Metrics {
    double mse = 0.0;
    std::optional<double> accuracy; // percent, classification only
};

/// MSE over all entries; accuracy as percent of matching columns
/// (argmax for multi-class, 0.5 threshold for single sigmoid outputs).
inline Metrics compute_metrics(const Matrix& pred, const Matrix& y, Task task) {
    if (!pred.same_shape(y))
        throw DimError("compute_metrics: " + pred.shape_str() + " vs " + y.shape_str());
    Metrics m;
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.rows(); ++i)
        for (std::size_t j = 0; j < pred.cols(); ++j) {
            const double d = pred(i, j) - y(i, j);
            sum += d * d;
        }
    m.mse = sum / static_cast<double>(pred.rows() * pred.cols());

    if (task == Task::Classification) {
        std::size_t correct = 0;
        for (std::size_t j = 0; j < pred.cols(); ++j) {
            if (pred.rows() == 1) {
                if ((pred(0, j) >= 0.5) == (y(0, j) >= 0.5)) ++correct;
            } else {
                std::size_t pa = 0, ya = 0;
                for (std::size_t i = 1; i < pred.rows(); ++i) {
                    if (pred(i, j) > pred(pa, j)) pa = i;
                    if (y(i, j) > y(ya, j)) ya = i;
                }
                if (pa == ya) ++correct;
            }
        }
        m.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(pred.cols());
    }
    return m;
}

} // namespace zorb
