#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "zorb/errors.hpp"
#include "zorb/layers.hpp"
#include "zorb/matrix.hpp"
#include "zorb/metrics.hpp"
#include "zorb/rng.hpp"

namespace zorb {

/// A benchmark dataset, column-per-sample.
struct Dataset {
    std::string name;
    Task task = Task::Regression;
    std::size_t class_count = 0; // classification only
    Matrix train_x, train_y, test_x, test_y;
    std::optional<Geometry> geometry; // image datasets
};

/// One-hot encoding: label k of `classes` becomes the k-th unit column.
inline Matrix one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
    Matrix y(classes, labels.size());
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] >= classes)
            throw DimError("one_hot: label " + std::to_string(labels[j]) + " out of range");
        y(labels[j], j) = 1.0;
    }
    return y;
}

struct StandardizeStats {
    std::vector<double> mean;
    std::vector<double> stddev; // 0 marks a constant feature (maps to 0)
};

/// Per-feature (row) zero-mean/unit-variance transform. Constant features
/// map to zero. Returns the train statistics so the same transform can be
/// applied to a test split.
inline StandardizeStats standardize_fit(const Matrix& x) {
    StandardizeStats st;
    st.mean.resize(x.rows());
    st.stddev.resize(x.rows());
    const double n = static_cast<double>(x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) m += x(i, j);
        m /= n;
        double var = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double d = x(i, j) - m;
            var += d * d;
        }
        var /= n;
        st.mean[i] = m;
        st.stddev[i] = (var < 1e-24) ? 0.0 : std::sqrt(var);
    }
    return st;
}

inline Matrix standardize_apply(const Matrix& x, const StandardizeStats& st) {
    if (st.mean.size() != x.rows()) throw DimError("standardize: stats/feature mismatch");
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double inv = st.stddev[i] > 0.0 ? 1.0 / st.stddev[i] : 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) = (x(i, j) - st.mean[i]) * inv;
    }
    return y;
}

inline Matrix standardize_invert(const Matrix& y, const StandardizeStats& st) {
    if (st.mean.size() != y.rows()) throw DimError("standardize: stats/feature mismatch");
    Matrix x(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j)
            x(i, j) = y(i, j) * st.stddev[i] + st.mean[i];
    return x;
}

/// Fit on x, transform in place, return stats.
inline StandardizeStats standardize(Matrix& x) {
    StandardizeStats st = standardize_fit(x);
    x = standardize_apply(x, st);
    return st;
}

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

/// sinc regression: 2001 evenly spaced train points on [-10, 10], 6001
/// extrapolation test points on [-30, -10) u (10, 30] (3000 left, 3001
/// right), y = sin(x)/x with y(0) = 1.
inline Dataset gen_sinc() {
    auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; };
    Dataset d;
    d.name = "sinc";
    d.task = Task::Regression;

    const std::size_t n_train = 2001;
    d.train_x = Matrix(1, n_train);
    d.train_y = Matrix(1, n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
        const double x = -10.0 + 20.0 * static_cast<double>(i) / 2000.0;
        d.train_x(0, i) = x;
        d.train_y(0, i) = sinc(x);
    }

    const std::size_t n_left = 3000, n_right = 3001;
    d.test_x = Matrix(1, n_left + n_right);
    d.test_y = Matrix(1, n_left + n_right);
    for (std::size_t i = 0; i < n_left; ++i) {
        const double x = -30.0 + 20.0 * static_cast<double>(i) / static_cast<double>(n_left);
        d.test_x(0, i) = x;
        d.test_y(0, i) = sinc(x);
    }
    for (std::size_t i = 0; i < n_right; ++i) {
        const double x =
            10.0 + 20.0 * static_cast<double>(i + 1) / static_cast<double>(n_right);
        d.test_x(0, n_left + i) = x;
        d.test_y(0, n_left + i) = sinc(x);
    }
    return d;
}

/// XOR classification: uniform points in [-1, 1]^2, label 1 iff the
/// coordinates share a sign (zero counts as positive).
inline Dataset gen_xor(std::size_t n_train = 1000, std::size_t n_test = 1000,
                       std::uint64_t seed = 0) {
    Dataset d;
    d.name = "xor";
    d.task = Task::Classification;
    d.class_count = 2;
    Rng rng(seed);
    auto fill = [&rng](Matrix& x, Matrix& y, std::size_t n) {
        x = Matrix(2, n);
        y = Matrix(1, n);
        for (std::size_t j = 0; j < n; ++j) {
            const double a = rng.uniform(-1.0, 1.0);
            const double b = rng.uniform(-1.0, 1.0);
            x(0, j) = a;
            x(1, j) = b;
            y(0, j) = ((a >= 0.0) == (b >= 0.0)) ? 1.0 : 0.0;
        }
    };
    fill(d.train_x, d.train_y, n_train);
    fill(d.test_x, d.test_y, n_test);
    return d;
}

/// Two intertwined spirals, classes offset by pi. Points are noise-free:
/// angle grows linearly with the point index and the radius grows with
/// the angle. Stratified seeded split.
inline Dataset gen_two_spirals(std::size_t n_train = 280, std::size_t n_test = 120,
                               std::uint64_t seed = 0) {
    Dataset d;
    d.name = "two_spirals";
    d.task = Task::Classification;
    d.class_count = 2;

    const std::size_t total = n_train + n_test;
    const std::size_t per_class = (total + 1) / 2;
    const double max_angle = 4.0 * 3.14159265358979323846;

    std::vector<std::array<double, 2>> pts;
    std::vector<double> labels;
    for (std::size_t i = 0; i < per_class; ++i) {
        const double t = per_class > 1 ? static_cast<double>(i) / static_cast<double>(per_class - 1)
                                       : 0.0;
        const double theta = max_angle * t;
        const double r = 0.2 + 1.8 * t;
        pts.push_back({r * std::sin(theta), r * std::cos(theta)});
        labels.push_back(0.0);
        if (pts.size() == total) break;
        pts.push_back({-r * std::sin(theta), -r * std::cos(theta)});
        labels.push_back(1.0);
    }

    // stratified split: per-class shuffle, then fill train/test
    Rng rng(seed);
    std::vector<std::size_t> idx0, idx1;
    for (std::size_t i = 0; i < pts.size(); ++i) (labels[i] == 0.0 ? idx0 : idx1).push_back(i);
    rng.shuffle(idx0);
    rng.shuffle(idx1);

    const std::size_t train0 = n_train / 2, train1 = n_train - train0;
    std::vector<std::size_t> train_idx, test_idx;
    train_idx.insert(train_idx.end(), idx0.begin(), idx0.begin() + train0);
    train_idx.insert(train_idx.end(), idx1.begin(), idx1.begin() + train1);
    test_idx.insert(test_idx.end(), idx0.begin() + train0, idx0.end());
    test_idx.insert(test_idx.end(), idx1.begin() + train1, idx1.end());
    rng.shuffle(train_idx);
    rng.shuffle(test_idx);

    auto build = [&](const std::vector<std::size_t>& sel, Matrix& x, Matrix& y) {
        x = Matrix(2, sel.size());
        y = Matrix(1, sel.size());
        for (std::size_t j = 0; j < sel.size(); ++j) {
            x(0, j) = pts[sel[j]][0];
            x(1, j) = pts[sel[j]][1];
            y(0, j) = labels[sel[j]];
        }
    };
    build(train_idx, d.train_x, d.train_y);
    build(test_idx, d.test_x, d.test_y);
    return d;
}

// ---------------------------------------------------------------------------
// File loaders
// ---------------------------------------------------------------------------

struct CsvSchema {
    Task task = Task::Regression;
    std::size_t class_count = 0;  // classification: last column is an integer label
    std::size_t target_cols = 1;  // regression: trailing target column count
    std::size_t n_train = 0;      // 0 = use split_fraction
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool stratified = false; // classification splits
};

namespace detail {

struct CsvTable {
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("csv: cannot open " + path.string());
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    std::size_t byte_offset = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t line_start = byte_offset;
        byte_offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<double> row;
        std::size_t pos = 0;
        bool bad = false;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            const std::string cell = line.substr(pos, comma - pos);
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos)
                    bad = true;
            } catch (const std::exception&) {
                bad = true;
            }
            if (bad) break;
            pos = comma + 1;
            if (comma == line.size()) break;
        }
        if (bad) {
            if (line_no == 1) continue; // optional header row
            throw ParseError("csv: malformed value at line " + std::to_string(line_no) +
                             " (byte offset " + std::to_string(line_start) + ") in " +
                             path.string());
        }
        if (!table.rows.empty() && row.size() != table.rows.front().size())
            throw ParseError("csv: ragged row at line " + std::to_string(line_no) +
                             " (byte offset " + std::to_string(line_start) + ") in " +
                             path.string());
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw ParseError("csv: no data rows in " + path.string());
    return table;
}

inline void check_finite(const Matrix& m, const std::string& what) {
    if (!m.is_finite()) throw ParseError(what + ": non-finite values");
}

} // namespace detail

/// Generic CSV loader (comma separated, optional header, decimal floats).
/// Classification: last column holds integer labels, one-hot encoded.
/// Regression: trailing `target_cols` columns are the targets.
inline Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    detail::CsvTable table = detail::read_csv(path);
    const std::size_t n = table.rows.size();
    const std::size_t width = table.rows.front().size();
    const std::size_t label_cols = schema.task == Task::Classification ? 1 : schema.target_cols;
    if (width <= label_cols)
        throw ParseError("csv: " + path.string() + " has " + std::to_string(width) +
                         " columns, need more than " + std::to_string(label_cols));
    const std::size_t d = width - label_cols;

    std::size_t n_train = schema.n_train ? schema.n_train
                                         : static_cast<std::size_t>(
                                               std::llround(schema.train_fraction *
                                                            static_cast<double>(n)));
    if (n_train == 0 || n_train >= n)
        throw ParseError("csv: split leaves an empty train or test set (" +
                         std::to_string(n_train) + "/" + std::to_string(n - n_train) + ")");

    Rng rng(schema.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    if (schema.task == Task::Classification && schema.stratified) {
        // proportional per-class allocation, seeded within each class
        std::vector<std::vector<std::size_t>> byclass(schema.class_count);
        for (std::size_t i = 0; i < n; ++i) {
            const double raw = table.rows[i][width - 1];
            const auto label = static_cast<std::size_t>(std::llround(raw));
            if (label >= schema.class_count)
                throw ParseError("csv: label " + std::to_string(raw) + " out of range at row " +
                                 std::to_string(i));
            byclass[label].push_back(i);
        }
        std::vector<std::size_t> train_idx, test_idx;
        for (auto& cls : byclass) {
            rng.shuffle(cls);
            const auto take = static_cast<std::size_t>(std::llround(
                static_cast<double>(n_train) * static_cast<double>(cls.size()) /
                static_cast<double>(n)));
            for (std::size_t i = 0; i < cls.size(); ++i)
                (i < take ? train_idx : test_idx).push_back(cls[i]);
        }
        rng.shuffle(train_idx);
        rng.shuffle(test_idx);
        n_train = train_idx.size();
        order = train_idx;
        order.insert(order.end(), test_idx.begin(), test_idx.end());
    } else {
        rng.shuffle(order);
    }

    Dataset ds;
    ds.name = path.stem().string();
    ds.task = schema.task;
    ds.class_count = schema.class_count;

    auto build = [&](std::size_t first, std::size_t count, Matrix& x, Matrix& y) {
        x = Matrix(d, count);
        if (schema.task == Task::Classification) {
            std::vector<std::size_t> labels(count);
            for (std::size_t j = 0; j < count; ++j) {
                const auto& row = table.rows[order[first + j]];
                for (std::size_t i = 0; i < d; ++i) x(i, j) = row[i];
                labels[j] = static_cast<std::size_t>(std::llround(row[width - 1]));
                if (labels[j] >= schema.class_count)
                    throw ParseError("csv: label out of range in " + path.string());
            }
            y = schema.class_count == 2 ? Matrix(1, count) : one_hot(labels, schema.class_count);
            if (schema.class_count == 2)
                for (std::size_t j = 0; j < count; ++j) y(0, j) = static_cast<double>(labels[j]);
        } else {
            y = Matrix(label_cols, count);
            for (std::size_t j = 0; j < count; ++j) {
                const auto& row = table.rows[order[first + j]];
                for (std::size_t i = 0; i < d; ++i) x(i, j) = row[i];
                for (std::size_t i = 0; i < label_cols; ++i) y(i, j) = row[d + i];
            }
        }
    };
    build(0, n_train, ds.train_x, ds.train_y);
    build(n_train, n - n_train, ds.test_x, ds.test_y);
    detail::check_finite(ds.train_x, "csv " + path.string());
    detail::check_finite(ds.test_x, "csv " + path.string());
    return ds;
}

/// Iris preset: 105/45 stratified split, standardized features, 3-class
/// one-hot targets.
inline Dataset load_iris(const std::filesystem::path& path, std::uint64_t seed = 42) {
    CsvSchema schema;
    schema.task = Task::Classification;
    schema.class_count = 3;
    schema.n_train = 105;
    schema.seed = seed;
    schema.stratified = true;
    Dataset ds = load_csv(path, schema);
    ds.name = "iris";
    StandardizeStats st = standardize(ds.train_x);
    ds.test_x = standardize_apply(ds.test_x, st);
    return ds;
}

/// Boston housing preset: 404/102 split, standardized features and
/// standardized target (reported MSE is in standardized units).
inline Dataset load_boston(const std::filesystem::path& path, std::uint64_t seed = 42) {
    CsvSchema schema;
    schema.task = Task::Regression;
    schema.target_cols = 1;
    schema.n_train = 404;
    schema.seed = seed;
    Dataset ds = load_csv(path, schema);
    ds.name = "boston";
    StandardizeStats sx = standardize(ds.train_x);
    ds.test_x = standardize_apply(ds.test_x, sx);
    StandardizeStats sy = standardize(ds.train_y);
    ds.test_y = standardize_apply(ds.test_y, sy);
    return ds;
}

namespace detail {

inline std::uint32_t read_u32_be(std::ifstream& in, const std::filesystem::path& path) {
    std::uint8_t b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw ParseError("idx: truncated header in " + path.string());
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

} // namespace detail

/// IDX image/label pair (the MNIST container format). Pixels are scaled
/// to [0, 1]; labels return as a vector.
inline std::pair<Matrix, std::vector<std::size_t>> load_idx(
    const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw ParseError("idx: cannot open " + images_path.string());
    if (detail::read_u32_be(imgs, images_path) != 0x00000803u)
        throw ParseError("idx: wrong magic in " + images_path.string() +
                         " (expected 0x00000803 image file)");
    const std::uint32_t count = detail::read_u32_be(imgs, images_path);
    const std::uint32_t rows = detail::read_u32_be(imgs, images_path);
    const std::uint32_t cols = detail::read_u32_be(imgs, images_path);

    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw ParseError("idx: cannot open " + labels_path.string());
    if (detail::read_u32_be(labs, labels_path) != 0x00000801u)
        throw ParseError("idx: wrong magic in " + labels_path.string() +
                         " (expected 0x00000801 label file)");
    const std::uint32_t lcount = detail::read_u32_be(labs, labels_path);
    if (lcount != count)
        throw ParseError("idx: image/label count mismatch (" + std::to_string(count) + " vs " +
                         std::to_string(lcount) + ")");

    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    Matrix x(dim, count);
    std::vector<std::uint8_t> buf(dim);
    for (std::uint32_t j = 0; j < count; ++j) {
        if (!imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim)))
            throw ParseError("idx: truncated image data at sample " + std::to_string(j) +
                             " (byte offset " +
                             std::to_string(16 + static_cast<std::size_t>(j) * dim) + ") in " +
                             images_path.string());
        for (std::size_t i = 0; i < dim; ++i) x(i, j) = buf[i] / 255.0;
    }
    std::vector<std::size_t> labels(count);
    std::vector<std::uint8_t> lbuf(count);
    if (!labs.read(reinterpret_cast<char*>(lbuf.data()), static_cast<std::streamsize>(count)))
        throw ParseError("idx: truncated label data in " + labels_path.string());
    for (std::uint32_t j = 0; j < count; ++j) labels[j] = lbuf[j];
    return {std::move(x), std::move(labels)};
}

/// MNIST from the four canonical IDX files in `dir`. Optional seeded
/// train subsampling (0 = all 60k).
inline Dataset load_mnist(const std::filesystem::path& dir, std::size_t n_subsample = 0,
                          std::uint64_t seed = 0) {
    auto [train_x, train_labels] =
        load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    auto [test_x, test_labels] =
        load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");

    Dataset ds;
    ds.name = "mnist";
    ds.task = Task::Classification;
    ds.class_count = 10;
    if (n_subsample > 0 && n_subsample < train_labels.size()) {
        Rng rng(seed);
        std::vector<std::size_t> idx(train_labels.size());
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        idx.resize(n_subsample);
        Matrix x(train_x.rows(), n_subsample);
        std::vector<std::size_t> labels(n_subsample);
        for (std::size_t j = 0; j < n_subsample; ++j) {
            for (std::size_t i = 0; i < train_x.rows(); ++i) x(i, j) = train_x(i, idx[j]);
            labels[j] = train_labels[idx[j]];
        }
        ds.train_x = std::move(x);
        ds.train_y = one_hot(labels, 10);
    } else {
        ds.train_x = std::move(train_x);
        ds.train_y = one_hot(train_labels, 10);
    }
    ds.test_x = std::move(test_x);
    ds.test_y = one_hot(test_labels, 10);
    return ds;
}

/// CIFAR-10 binary batches. Record layout: 1 label byte + 3072 pixel
/// bytes (channel planes); converted to interleaved (y, x, c) rows and
/// scaled to [0, 1]. Training subsample is class-stratified and seeded;
/// the test split is always the full test batch.
inline Dataset load_cifar10(const std::filesystem::path& dir, std::size_t n_subsample,
                            std::uint64_t seed = 0) {
    constexpr std::size_t kRecord = 3073;
    constexpr std::size_t kPixels = 3072;
    constexpr std::size_t kPlane = 1024;

    auto read_batch = [](const std::filesystem::path& path,
                         std::vector<std::uint8_t>& records) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cifar: cannot open " + path.string());
        std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                      std::istreambuf_iterator<char>());
        if (buf.empty() || buf.size() % kRecord != 0)
            throw ParseError("cifar: " + path.string() + " size " +
                             std::to_string(buf.size()) + " is not a multiple of 3073");
        records.insert(records.end(), buf.begin(), buf.end());
    };

    auto to_column = [&](const std::uint8_t* rec, Matrix& x, std::size_t col) {
        const std::uint8_t* px = rec + 1;
        for (std::size_t y = 0; y < 32; ++y)
            for (std::size_t xx = 0; xx < 32; ++xx)
                for (std::size_t c = 0; c < 3; ++c)
                    x((y * 32 + xx) * 3 + c, col) = px[c * kPlane + y * 32 + xx] / 255.0;
    };

    std::vector<std::uint8_t> train_records;
    for (int b = 1; b <= 5; ++b)
        read_batch(dir / ("data_batch_" + std::to_string(b) + ".bin"), train_records);
    std::vector<std::uint8_t> test_records;
    read_batch(dir / "test_batch.bin", test_records);

    const std::size_t n_total = train_records.size() / kRecord;
    std::vector<std::vector<std::size_t>> byclass(10);
    for (std::size_t i = 0; i < n_total; ++i) {
        const std::uint8_t label = train_records[i * kRecord];
        if (label > 9) throw ParseError("cifar: label byte out of range at record " +
                                        std::to_string(i));
        byclass[label].push_back(i);
    }

    if (n_subsample == 0 || n_subsample > n_total) n_subsample = n_total;
    Rng rng(seed);
    std::vector<std::size_t> chosen;
    const std::size_t base = n_subsample / 10, extra = n_subsample % 10;
    for (std::size_t cls = 0; cls < 10; ++cls) {
        rng.shuffle(byclass[cls]);
        const std::size_t take = std::min(base + (cls < extra ? 1 : 0), byclass[cls].size());
        chosen.insert(chosen.end(), byclass[cls].begin(), byclass[cls].begin() + take);
    }
    rng.shuffle(chosen);

    Dataset ds;
    ds.name = "cifar10";
    ds.task = Task::Classification;
    ds.class_count = 10;
    ds.geometry = Geometry{32, 32, 3};

    ds.train_x = Matrix(kPixels, chosen.size());
    std::vector<std::size_t> train_labels(chosen.size());
    for (std::size_t j = 0; j < chosen.size(); ++j) {
        const std::uint8_t* rec = train_records.data() + chosen[j] * kRecord;
        train_labels[j] = rec[0];
        to_column(rec, ds.train_x, j);
    }
    ds.train_y = one_hot(train_labels, 10);

    const std::size_t n_test = test_records.size() / kRecord;
    ds.test_x = Matrix(kPixels, n_test);
    std::vector<std::size_t> test_labels(n_test);
    for (std::size_t j = 0; j < n_test; ++j) {
        const std::uint8_t* rec = test_records.data() + j * kRecord;
        if (rec[0] > 9) throw ParseError("cifar: test label out of range");
        test_labels[j] = rec[0];
        to_column(rec, ds.test_x, j);
    }
    ds.test_y = one_hot(test_labels, 10);
    return ds;
}

} // namespace zorb
