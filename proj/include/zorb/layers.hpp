#pragma once

#include <cstddef>
#include <variant>

#include "zorb/activations.hpp"
#include "zorb/errors.hpp"
#include "zorb/matrix.hpp"
#include "zorb/rng.hpp"

namespace zorb {

/// Image-shaped interface: column vectors are (height, width, channel)
/// row-major with channel fastest, i.e. pixel (y, x, c) sits at row
/// (y*width + x)*channels + c.
struct Geometry {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;

    std::size_t dim() const { return height * width * channels; }
    bool operator==(const Geometry&) const = default;
};

struct DenseLayer {
    Matrix w; // d_out x d_in
    Matrix b; // d_out x 1

    std::size_t in_dim() const { return w.cols(); }
    std::size_t out_dim() const { return w.rows(); }
};

/// Convolution stored as a stacked filter matrix: row f holds filter f
/// reshaped to length kernel_h*kernel_w*channels with the same (ky, kx, c)
/// ordering as extract_patches columns. Valid padding.
struct ConvLayer {
    Matrix filters; // num_filters x (kernel_h*kernel_w*c_in)
    Matrix bias;    // num_filters x 1
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::size_t stride = 1;
    Geometry input_geometry;

    std::size_t num_filters() const { return filters.rows(); }
    std::size_t patch_len() const { return kernel_h * kernel_w * input_geometry.channels; }
    std::size_t out_h() const { return (input_geometry.height - kernel_h) / stride + 1; }
    std::size_t out_w() const { return (input_geometry.width - kernel_w) / stride + 1; }
    std::size_t patches_per_image() const { return out_h() * out_w(); }
    Geometry output_geometry() const { return {out_h(), out_w(), num_filters()}; }

    void validate() const {
        if (stride < 1) throw DimError("conv: stride must be >= 1");
        if (kernel_h == 0 || kernel_w == 0) throw DimError("conv: empty kernel");
        if (kernel_h > input_geometry.height || kernel_w > input_geometry.width)
            throw DimError("conv: kernel exceeds input geometry");
        if (filters.cols() != patch_len())
            throw DimError("conv: filter row length " + std::to_string(filters.cols()) +
                           " != kernel volume " + std::to_string(patch_len()));
        if (bias.rows() != filters.rows() || bias.cols() != 1)
            throw DimError("conv: bias must be num_filters x 1");
    }
};

/// Marks the transition from image-shaped to flat interface. Numerically a
/// no-op: image columns are already stored flat in (y, x, c) order.
struct FlattenLayer {
    Geometry geometry;
};

using Layer = std::variant<DenseLayer, ActivationState, ConvLayer, FlattenLayer>;

inline DenseLayer make_dense(std::size_t out_dim, std::size_t in_dim, Rng& rng) {
    DenseLayer l;
    l.w = Matrix(out_dim, in_dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (std::size_t i = 0; i < out_dim; ++i)
        for (std::size_t j = 0; j < in_dim; ++j) l.w(i, j) = rng.uniform(-1.0, 1.0) * scale;
    l.b = Matrix(out_dim, 1);
    return l;
}

inline ConvLayer make_conv(std::size_t num_filters, std::size_t kernel_h, std::size_t kernel_w,
                           std::size_t stride, Geometry input_geometry, Rng& rng) {
    ConvLayer l;
    l.kernel_h = kernel_h;
    l.kernel_w = kernel_w;
    l.stride = stride;
    l.input_geometry = input_geometry;
    const std::size_t plen = kernel_h * kernel_w * input_geometry.channels;
    l.filters = Matrix(num_filters, plen);
    const double scale = 1.0 / std::sqrt(static_cast<double>(plen));
    for (std::size_t i = 0; i < num_filters; ++i)
        for (std::size_t j = 0; j < plen; ++j) l.filters(i, j) = rng.uniform(-1.0, 1.0) * scale;
    l.bias = Matrix(num_filters, 1);
    l.validate();
    return l;
}

} // namespace zorb
