#pragma once

#include <cstddef>
#include <vector>

#include "zorb/errors.hpp"
#include "zorb/layers.hpp"
#include "zorb/matrix.hpp"

namespace zorb {

/// im2col. Input X is (h*w*c) x n image columns; the result stacks every
/// kernel window of every image as a column:
///
///   P is (kernel_h*kernel_w*c) x (n*p),  p = patch positions per image.
///
/// Column order is sample-major then row-major patch position
/// (s*p + py*out_w + px); row order is (ky, kx, c) with channel fastest.
/// fold_patches and the conv training update both depend on this layout.
inline Matrix extract_patches(const Matrix& x, Geometry geom, std::size_t kernel_h,
                              std::size_t kernel_w, std::size_t stride) {
    if (stride < 1) throw DimError("extract_patches: stride must be >= 1");
    if (kernel_h > geom.height || kernel_w > geom.width)
        throw DimError("extract_patches: kernel exceeds image");
    if (x.rows() != geom.dim())
        throw DimError("extract_patches: X has " + std::to_string(x.rows()) +
                       " rows, geometry wants " + std::to_string(geom.dim()));

    const std::size_t out_h = (geom.height - kernel_h) / stride + 1;
    const std::size_t out_w = (geom.width - kernel_w) / stride + 1;
    const std::size_t p = out_h * out_w;
    const std::size_t c = geom.channels;
    const std::size_t n = x.cols();

    Matrix patches(kernel_h * kernel_w * c, n * p);
    for (std::size_t ky = 0; ky < kernel_h; ++ky)
        for (std::size_t kx = 0; kx < kernel_w; ++kx)
            for (std::size_t ch = 0; ch < c; ++ch) {
                const std::size_t prow = (ky * kernel_w + kx) * c + ch;
                double* dst = patches.row_ptr(prow);
                for (std::size_t py = 0; py < out_h; ++py) {
                    const std::size_t iy = py * stride + ky;
                    for (std::size_t px = 0; px < out_w; ++px) {
                        const std::size_t ix = px * stride + kx;
                        const double* src = x.row_ptr((iy * geom.width + ix) * c + ch);
                        const std::size_t q = py * out_w + px;
                        for (std::size_t s = 0; s < n; ++s) dst[s * p + q] = src[s];
                    }
                }
            }
    return patches;
}

/// col2im: inverse of extract_patches. Every pixel becomes the arithmetic
/// mean of all patch entries covering it; pixels no window touches are 0.
inline Matrix fold_patches(const Matrix& patches, Geometry geom, std::size_t kernel_h,
                           std::size_t kernel_w, std::size_t stride) {
    if (stride < 1) throw DimError("fold_patches: stride must be >= 1");
    if (kernel_h > geom.height || kernel_w > geom.width)
        throw DimError("fold_patches: kernel exceeds image");
    const std::size_t out_h = (geom.height - kernel_h) / stride + 1;
    const std::size_t out_w = (geom.width - kernel_w) / stride + 1;
    const std::size_t p = out_h * out_w;
    const std::size_t c = geom.channels;
    if (patches.rows() != kernel_h * kernel_w * c || patches.cols() % p != 0)
        throw DimError("fold_patches: patch matrix " + patches.shape_str() +
                       " does not match geometry/kernel layout");
    const std::size_t n = patches.cols() / p;

    Matrix x(geom.dim(), n);
    std::vector<double> cover(geom.height * geom.width, 0.0);
    for (std::size_t py = 0; py < out_h; ++py)
        for (std::size_t px = 0; px < out_w; ++px)
            for (std::size_t ky = 0; ky < kernel_h; ++ky)
                for (std::size_t kx = 0; kx < kernel_w; ++kx)
                    cover[(py * stride + ky) * geom.width + (px * stride + kx)] += 1.0;

    for (std::size_t ky = 0; ky < kernel_h; ++ky)
        for (std::size_t kx = 0; kx < kernel_w; ++kx)
            for (std::size_t ch = 0; ch < c; ++ch) {
                const std::size_t prow = (ky * kernel_w + kx) * c + ch;
                const double* src = patches.row_ptr(prow);
                for (std::size_t py = 0; py < out_h; ++py) {
                    const std::size_t iy = py * stride + ky;
                    for (std::size_t px = 0; px < out_w; ++px) {
                        const std::size_t ix = px * stride + kx;
                        double* dst = x.row_ptr((iy * geom.width + ix) * c + ch);
                        const std::size_t q = py * out_w + px;
                        for (std::size_t s = 0; s < n; ++s) dst[s] += src[s * p + q];
                    }
                }
            }

    for (std::size_t y = 0; y < geom.height; ++y)
        for (std::size_t xx = 0; xx < geom.width; ++xx) {
            const double count = cover[y * geom.width + xx];
            if (count == 0.0) continue;
            const double inv = 1.0 / count;
            for (std::size_t ch = 0; ch < c; ++ch) {
                double* row = x.row_ptr((y * geom.width + xx) * c + ch);
                for (std::size_t s = 0; s < n; ++s) row[s] *= inv;
            }
        }
    return x;
}

/// Convolution as stacked-patch matmul: filters * P + bias, reshaped to
/// (out_h*out_w*num_filters) x n with the usual (y, x, channel) row order.
inline Matrix conv_forward(const ConvLayer& layer, const Matrix& x) {
    layer.validate();
    if (x.rows() != layer.input_geometry.dim())
        throw DimError("conv_forward: input rows " + std::to_string(x.rows()) +
                       " != geometry dim " + std::to_string(layer.input_geometry.dim()));
    const std::size_t n = x.cols();
    const std::size_t p = layer.patches_per_image();
    const std::size_t nf = layer.num_filters();

    Matrix patches =
        extract_patches(x, layer.input_geometry, layer.kernel_h, layer.kernel_w, layer.stride);
    Matrix out_patches = matmul(layer.filters, patches); // nf x (n*p)

    Matrix y(p * nf, n);
    for (std::size_t f = 0; f < nf; ++f) {
        const double* src = out_patches.row_ptr(f);
        const double bf = layer.bias(f, 0);
        for (std::size_t q = 0; q < p; ++q) {
            double* dst = y.row_ptr(q * nf + f);
            for (std::size_t s = 0; s < n; ++s) dst[s] = src[s * p + q] + bf;
        }
    }
    return y;
}

} // namespace zorb
