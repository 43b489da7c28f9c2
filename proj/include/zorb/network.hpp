#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zorb/conv.hpp"
#include "zorb/layers.hpp"
#include "zorb/matrix.hpp"

namespace zorb {

/// Ordered layer stack with dimension bookkeeping. Layers are appended
/// against a tracked interface (flat width, or image geometry between
/// conv layers) so mismatches fail at construction, not mid-training.
class Network {
public:
    Network() = default;

    explicit Network(std::size_t input_dim) : input_dim_(input_dim), cur_dim_(input_dim) {}

    explicit Network(Geometry input_geometry)
        : input_dim_(input_geometry.dim()),
          input_geometry_(input_geometry),
          cur_dim_(input_geometry.dim()),
          cur_geometry_(input_geometry) {}

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return cur_dim_; }
    const std::optional<Geometry>& input_geometry() const { return input_geometry_; }
    std::size_t size() const { return layers_.size(); }
    bool empty() const { return layers_.empty(); }

    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }
    Layer& layer(std::size_t i) { return layers_[i]; }
    const Layer& layer(std::size_t i) const { return layers_[i]; }

    void add_dense(DenseLayer l) {
        if (cur_geometry_)
            throw DimError("layer " + std::to_string(layers_.size()) +
                           ": dense on image interface (insert flatten first)");
        if (l.in_dim() != cur_dim_)
            throw DimError("layer " + std::to_string(layers_.size()) + ": dense expects " +
                           std::to_string(l.in_dim()) + " inputs, interface is " +
                           std::to_string(cur_dim_));
        cur_dim_ = l.out_dim();
        layers_.emplace_back(std::move(l));
    }

    void add_activation(ActivationState s) { layers_.emplace_back(std::move(s)); }

    void add_activation(ActivationKind kind, double epsilon = 1e-6) {
        layers_.emplace_back(ActivationState(kind, epsilon));
    }

    void add_conv(ConvLayer l) {
        l.validate();
        if (!cur_geometry_)
            throw DimError("layer " + std::to_string(layers_.size()) +
                           ": conv requires an image interface");
        if (!(l.input_geometry == *cur_geometry_))
            throw DimError("layer " + std::to_string(layers_.size()) +
                           ": conv geometry mismatch");
        cur_geometry_ = l.output_geometry();
        cur_dim_ = cur_geometry_->dim();
        layers_.emplace_back(std::move(l));
    }

    void add_flatten() {
        if (!cur_geometry_)
            throw DimError("layer " + std::to_string(layers_.size()) +
                           ": flatten requires an image interface");
        layers_.emplace_back(FlattenLayer{*cur_geometry_});
        cur_geometry_.reset();
    }

    /// Sequential forward pass. Mutates activation states (softmax
    /// normalizers); clone the network for concurrent evaluation.
    Matrix forward(const Matrix& x) {
        Matrix cur = x;
        forward_from(cur, 0);
        return cur;
    }

    /// Forward from layer `first` onward, in place.
    void forward_from(Matrix& cur, std::size_t first) {
        for (std::size_t i = first; i < layers_.size(); ++i) apply_layer(cur, i);
    }

    /// Apply a single layer to the running representation.
    void apply_layer(Matrix& cur, std::size_t i) {
        Layer& l = layers_[i];
        if (auto* d = std::get_if<DenseLayer>(&l)) {
            if (d->in_dim() != cur.rows())
                throw DimError("layer " + std::to_string(i) + ": dense expects " +
                               std::to_string(d->in_dim()) + " rows, got " +
                               std::to_string(cur.rows()));
            cur = add_col_broadcast(matmul(d->w, cur), d->b);
        } else if (auto* a = std::get_if<ActivationState>(&l)) {
            cur = a->activate(cur);
        } else if (auto* c = std::get_if<ConvLayer>(&l)) {
            cur = conv_forward(*c, cur);
        } else if (auto* f = std::get_if<FlattenLayer>(&l)) {
            if (cur.rows() != f->geometry.dim())
                throw DimError("layer " + std::to_string(i) + ": flatten expects " +
                               std::to_string(f->geometry.dim()) + " rows, got " +
                               std::to_string(cur.rows()));
            // image columns are already flat in (y, x, c) order
        }
    }

    std::vector<std::uint8_t> serialize() const;
    static Network deserialize(std::span<const std::uint8_t> bytes);

private:
    std::vector<Layer> layers_;
    std::size_t input_dim_ = 0;
    std::optional<Geometry> input_geometry_;
    std::size_t cur_dim_ = 0;
    std::optional<Geometry> cur_geometry_;
};

// ---------------------------------------------------------------------------
// Model file format (little-endian):
//   magic "ZRB1" | u32 version | u8 has_geometry | u64 input dims (1 or 3)
//   | u64 layer count | layers.
// Layer tags: 0 dense (u64 out, u64 in, f64 W row-major, f64 b),
// 1 activation (u8 kind, f64 epsilon, u8 has_correction [f64 low, f64 high],
// u64 total count + f64 log-totals, u64 rng state), 2 conv (u64 filters,
// kernel_h, kernel_w, stride, geometry h/w/c, f64 filter matrix, f64 bias),
// 3 flatten (u64 geometry h/w/c). All parameters are 64-bit floats.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

inline void put_matrix(std::vector<std::uint8_t>& out, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string context)
        : bytes_(bytes), context_(std::move(context)) {}

    void set_context(std::string c) { context_ = std::move(c); }

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }

    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    Matrix matrix(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 26))
            throw ParseError("model: implausible matrix shape in " + context_);
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) m(i, j) = f64();
        return m;
    }

    bool done() const { return pos_ == bytes_.size(); }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size())
            throw ParseError("model: truncated at byte " + std::to_string(pos_) + " in " +
                             context_);
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string context_;
};

} // namespace detail

inline std::vector<std::uint8_t> Network::serialize() const {
    using namespace detail;
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'Z', 'R', 'B', '1'});
    put_u32(out, 1);
    put_u8(out, input_geometry_ ? 1 : 0);
    if (input_geometry_) {
        put_u64(out, input_geometry_->height);
        put_u64(out, input_geometry_->width);
        put_u64(out, input_geometry_->channels);
    } else {
        put_u64(out, input_dim_);
    }
    put_u64(out, layers_.size());
    for (const Layer& l : layers_) {
        if (const auto* d = std::get_if<DenseLayer>(&l)) {
            put_u8(out, 0);
            put_u64(out, d->out_dim());
            put_u64(out, d->in_dim());
            put_matrix(out, d->w);
            put_matrix(out, d->b);
        } else if (const auto* a = std::get_if<ActivationState>(&l)) {
            put_u8(out, 1);
            put_u8(out, static_cast<std::uint8_t>(a->kind()));
            put_f64(out, a->epsilon());
            put_u8(out, a->has_correction() ? 1 : 0);
            if (a->has_correction()) {
                put_f64(out, a->correction_low());
                put_f64(out, a->correction_high());
            }
            put_u64(out, a->softmax_log_totals().size());
            for (double t : a->softmax_log_totals()) put_f64(out, t);
            put_u64(out, a->rng_state());
        } else if (const auto* c = std::get_if<ConvLayer>(&l)) {
            put_u8(out, 2);
            put_u64(out, c->num_filters());
            put_u64(out, c->kernel_h);
            put_u64(out, c->kernel_w);
            put_u64(out, c->stride);
            put_u64(out, c->input_geometry.height);
            put_u64(out, c->input_geometry.width);
            put_u64(out, c->input_geometry.channels);
            put_matrix(out, c->filters);
            put_matrix(out, c->bias);
        } else if (const auto* f = std::get_if<FlattenLayer>(&l)) {
            put_u8(out, 3);
            put_u64(out, f->geometry.height);
            put_u64(out, f->geometry.width);
            put_u64(out, f->geometry.channels);
        }
    }
    return out;
}

inline Network Network::deserialize(std::span<const std::uint8_t> bytes) {
    using namespace detail;
    ByteReader r(bytes, "header");
    if (bytes.size() < 4 || bytes[0] != 'Z' || bytes[1] != 'R' || bytes[2] != 'B' ||
        bytes[3] != '1')
        throw ParseError("model: bad magic (expected ZRB1)");
    r.u32(); // magic bytes
    const std::uint32_t version = r.u32();
    if (version != 1) throw ParseError("model: unsupported version " + std::to_string(version));

    Network net;
    if (r.u8()) {
        Geometry g{r.u64(), r.u64(), r.u64()};
        net = Network(g);
    } else {
        net = Network(r.u64());
    }

    const std::uint64_t count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        r.set_context("layer " + std::to_string(i));
        const std::uint8_t tag = r.u8();
        switch (tag) {
            case 0: {
                const std::uint64_t out = r.u64(), in = r.u64();
                DenseLayer d;
                d.w = r.matrix(out, in);
                d.b = r.matrix(out, 1);
                net.add_dense(std::move(d));
                break;
            }
            case 1: {
                const std::uint8_t kind = r.u8();
                if (kind > static_cast<std::uint8_t>(ActivationKind::Softmax))
                    throw ParseError("model: unknown activation kind at layer " +
                                     std::to_string(i));
                const double eps = r.f64();
                ActivationState a(static_cast<ActivationKind>(kind), eps);
                if (r.u8()) {
                    const double low = r.f64(), high = r.f64();
                    a.set_correction(low, high);
                }
                const std::uint64_t nt = r.u64();
                if (nt > (1u << 30)) throw ParseError("model: implausible totals count");
                std::vector<double> totals(nt);
                for (auto& t : totals) t = r.f64();
                if (!totals.empty()) a.set_softmax_log_totals(std::move(totals));
                a.set_rng_state(r.u64());
                net.add_activation(std::move(a));
                break;
            }
            case 2: {
                ConvLayer c;
                const std::uint64_t nf = r.u64();
                c.kernel_h = r.u64();
                c.kernel_w = r.u64();
                c.stride = r.u64();
                c.input_geometry = Geometry{r.u64(), r.u64(), r.u64()};
                c.filters = r.matrix(nf, c.kernel_h * c.kernel_w * c.input_geometry.channels);
                c.bias = r.matrix(nf, 1);
                net.add_conv(std::move(c));
                break;
            }
            case 3: {
                Geometry g{r.u64(), r.u64(), r.u64()};
                if (!net.cur_geometry_ || !(*net.cur_geometry_ == g))
                    throw ParseError("model: flatten geometry mismatch at layer " +
                                     std::to_string(i));
                net.add_flatten();
                break;
            }
            default:
                throw ParseError("model: unknown layer tag " + std::to_string(tag) +
                                 " at layer " + std::to_string(i));
        }
    }
    if (!r.done())
        throw ParseError("model: " + std::to_string(bytes.size() - r.pos()) +
                         " trailing bytes after layer list");
    return net;
}

} // namespace zorb
