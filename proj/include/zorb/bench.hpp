#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "zorb/baselines.hpp"
#include "zorb/data.hpp"
#include "zorb/errors.hpp"
#include "zorb/metrics.hpp"
#include "zorb/network.hpp"
#include "zorb/train.hpp"
#include "zorb/version.hpp"

namespace zorb {

// ---------------------------------------------------------------------------
// Architecture strings
// ---------------------------------------------------------------------------
// Comma-separated layer tags applied to the dataset's input interface:
//   dense:N            fully connected layer with N outputs
//   conv:FxKHxKW[xS]   F filters, KHxKW kernel, optional stride S (default 1)
//   flatten            image -> flat interface
//   linear | sigmoid | tanh | relu | softmax
// Named presets (mnist6, mnist8, mnist11, conv1) expand to full strings.

inline std::optional<std::string> arch_preset(const std::string& name) {
    if (name == "mnist6")
        return "dense:512,sigmoid,dense:256,sigmoid,dense:128,sigmoid,dense:64,sigmoid,"
               "dense:32,sigmoid,dense:10,softmax";
    if (name == "mnist8")
        return "dense:512,sigmoid,dense:384,sigmoid,dense:256,sigmoid,dense:192,sigmoid,"
               "dense:128,sigmoid,dense:64,sigmoid,dense:32,sigmoid,dense:10,softmax";
    if (name == "mnist11")
        return "dense:512,sigmoid,dense:448,sigmoid,dense:384,sigmoid,dense:320,sigmoid,"
               "dense:256,sigmoid,dense:192,sigmoid,dense:128,sigmoid,dense:96,sigmoid,"
               "dense:64,sigmoid,dense:32,sigmoid,dense:10,softmax";
    if (name == "conv1") return "conv:32x3x3,sigmoid,flatten,dense:10,softmax";
    return std::nullopt;
}

/// Default architecture per dataset (the benchmark configurations).
inline std::string default_arch(const std::string& dataset) {
    if (dataset == "boston") return "dense:32,sigmoid,dense:1,linear";
    if (dataset == "sinc") return "dense:200,sigmoid,dense:200,sigmoid,dense:1,linear";
    if (dataset == "iris") return "dense:8,sigmoid,dense:3,softmax";
    if (dataset == "xor") return "dense:16,tanh,dense:8,relu,dense:1,sigmoid";
    if (dataset == "two_spirals")
        return "dense:32,tanh,dense:16,relu,dense:8,tanh,dense:4,relu,dense:1,sigmoid";
    if (dataset == "mnist") return *arch_preset("mnist6");
    if (dataset == "cifar10") return *arch_preset("conv1");
    throw ParseError("no default architecture for dataset '" + dataset + "'");
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) next = s.size();
        std::string tok = s.substr(pos, next - pos);
        const auto a = tok.find_first_not_of(" \t");
        const auto b = tok.find_last_not_of(" \t");
        out.push_back(a == std::string::npos ? "" : tok.substr(a, b - a + 1));
        pos = next + 1;
        if (next == s.size()) break;
    }
    return out;
}

inline std::size_t parse_count(const std::string& tok, std::size_t token_pos) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(tok, &used);
        if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ParseError("arch: token " + std::to_string(token_pos + 1) + ": bad count '" +
                         tok + "'");
    }
}

} // namespace detail

/// Build a seeded network from an architecture string against a flat
/// input width or an image geometry.
inline Network parse_arch(const std::string& spec, std::size_t input_dim,
                          std::optional<Geometry> geometry, std::uint64_t seed,
                          double epsilon = 1e-6) {
    std::string expanded = spec;
    if (auto preset = arch_preset(spec)) expanded = *preset;
    if (expanded.empty()) throw ParseError("arch: empty specification");

    Network net = geometry ? Network(*geometry) : Network(input_dim);
    Rng rng(seed);
    std::size_t cur_dim = input_dim;
    std::optional<Geometry> cur_geom = geometry;

    const std::vector<std::string> tokens = detail::split(expanded, ',');
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const std::string& tok = tokens[t];
        if (tok == "linear")
            net.add_activation(ActivationKind::Linear, epsilon);
        else if (tok == "sigmoid")
            net.add_activation(ActivationKind::Sigmoid, epsilon);
        else if (tok == "tanh")
            net.add_activation(ActivationKind::Tanh, epsilon);
        else if (tok == "relu")
            net.add_activation(ActivationKind::ReLU, epsilon);
        else if (tok == "softmax")
            net.add_activation(ActivationKind::Softmax, epsilon);
        else if (tok == "flatten") {
            if (!cur_geom) throw ParseError("arch: token " + std::to_string(t + 1) +
                                            ": flatten without an image interface");
            net.add_flatten();
            cur_geom.reset();
        } else if (tok.rfind("dense:", 0) == 0) {
            if (cur_geom)
                throw ParseError("arch: token " + std::to_string(t + 1) +
                                 ": dense on image interface (insert flatten)");
            const std::size_t width = detail::parse_count(tok.substr(6), t);
            net.add_dense(make_dense(width, cur_dim, rng));
            cur_dim = width;
        } else if (tok.rfind("conv:", 0) == 0) {
            if (!cur_geom)
                throw ParseError("arch: token " + std::to_string(t + 1) +
                                 ": conv requires an image input");
            const std::vector<std::string> dims = detail::split(tok.substr(5), 'x');
            if (dims.size() != 3 && dims.size() != 4)
                throw ParseError("arch: token " + std::to_string(t + 1) +
                                 ": conv wants FxKHxKW[xS], got '" + tok + "'");
            const std::size_t nf = detail::parse_count(dims[0], t);
            const std::size_t kh = detail::parse_count(dims[1], t);
            const std::size_t kw = detail::parse_count(dims[2], t);
            const std::size_t stride = dims.size() == 4 ? detail::parse_count(dims[3], t) : 1;
            ConvLayer layer = make_conv(nf, kh, kw, stride, *cur_geom, rng);
            cur_geom = layer.output_geometry();
            cur_dim = cur_geom->dim();
            net.add_conv(std::move(layer));
        } else {
            throw ParseError("arch: token " + std::to_string(t + 1) + ": unknown layer tag '" +
                             tok + "'");
        }
    }
    return net;
}

inline Network parse_arch(const std::string& spec, const Dataset& ds, std::uint64_t seed,
                          double epsilon = 1e-6) {
    return parse_arch(spec, ds.train_x.rows(), ds.geometry, seed, epsilon);
}

// ---------------------------------------------------------------------------
// Dataset dispatch
// ---------------------------------------------------------------------------

inline std::filesystem::path data_dir_or_default(const std::string& dir) {
    if (!dir.empty()) return dir;
    if (const char* env = std::getenv("ZORB_DATA_DIR")) return env;
    return "data";
}

/// Load a dataset by benchmark name or by CSV path (regression schema:
/// last column is the target, seeded 80/20 split).
inline Dataset load_dataset(const std::string& name, const std::string& data_dir,
                            std::uint64_t seed, std::size_t subsample = 0) {
    const std::filesystem::path dir = data_dir_or_default(data_dir);
    if (name == "sinc") return gen_sinc();
    if (name == "xor") return gen_xor(1000, 1000, seed);
    if (name == "two_spirals") return gen_two_spirals(280, 120, seed);
    if (name == "iris") return load_iris(dir / "iris.csv", seed);
    if (name == "boston") return load_boston(dir / "boston.csv", seed);
    if (name == "mnist") return load_mnist(dir / "mnist", subsample, seed);
    if (name == "cifar10") return load_cifar10(dir / "cifar-10-batches-bin", subsample, seed);
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
        CsvSchema schema;
        schema.seed = seed;
        return load_csv(name, schema);
    }
    throw ParseError("unknown dataset '" + name + "'");
}

/// Chunked evaluation so image batches never materialize huge patch
/// matrices in one piece. Uses a scratch copy of the network.
inline Metrics evaluate(const Network& net, const Matrix& x, const Matrix& y, Task task,
                        std::size_t chunk = 512) {
    Network scratch = net;
    double se = 0.0;
    std::size_t correct = 0;
    const std::size_t n = x.cols();
    for (std::size_t first = 0; first < n; first += chunk) {
        const std::size_t count = std::min(chunk, n - first);
        Matrix xb(x.rows(), count), yb(y.rows(), count);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double* src = x.row_ptr(i);
            double* dst = xb.row_ptr(i);
            for (std::size_t j = 0; j < count; ++j) dst[j] = src[first + j];
        }
        for (std::size_t i = 0; i < y.rows(); ++i) {
            const double* src = y.row_ptr(i);
            double* dst = yb.row_ptr(i);
            for (std::size_t j = 0; j < count; ++j) dst[j] = src[first + j];
        }
        Matrix pred = scratch.forward(xb);
        Metrics m = compute_metrics(pred, yb, task);
        se += m.mse * static_cast<double>(pred.rows() * count);
        if (m.accuracy)
            correct += static_cast<std::size_t>(
                std::llround(*m.accuracy / 100.0 * static_cast<double>(count)));
    }
    Metrics out;
    out.mse = se / static_cast<double>(y.rows() * n);
    if (task == Task::Classification)
        out.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark runner
// ---------------------------------------------------------------------------

struct BenchmarkConfig {
    std::string dataset;
    std::string algorithm = "zorb"; // zorb | adam | elm
    std::string arch;               // empty = dataset default
    std::uint64_t seed = 0;
    std::optional<double> rcond;    // default 1e-15 (1e-2 for the conv1 benchmark)
    double epsilon = 1e-6;
    std::optional<double> learning_rate; // adam; default per benchmark table
    std::optional<std::size_t> iterations;
    std::size_t batch_size = 32;
    std::optional<double> target_mse; // adam early stop
    std::size_t runs = 1;
    std::size_t subsample = 0; // mnist/cifar train subsample
    std::string data_dir;
    bool parallel_runs = false;

    double resolved_rcond() const {
        if (rcond) return *rcond;
        return dataset == "cifar10" ? 1e-2 : 1e-15;
    }

    double resolved_lr() const {
        if (learning_rate) return *learning_rate;
        if (dataset == "two_spirals") return 0.005;
        if (dataset == "mnist" || dataset == "cifar10") return 0.001;
        return 0.01;
    }

    std::size_t resolved_iterations() const {
        if (iterations) return *iterations;
        return dataset == "mnist" ? 5000 : 2500;
    }
};

struct RunResult {
    bool ok = false;
    std::string error;
    std::uint64_t seed = 0;
    double train_mse = 0.0, test_mse = 0.0;
    std::optional<double> train_accuracy, test_accuracy;
    double train_seconds = 0.0;
    std::size_t iterations = 0;
};

struct BenchmarkReport {
    BenchmarkConfig config;
    std::string resolved_arch;
    std::string library_version = kVersion;
    std::vector<RunResult> runs;

    struct Aggregate {
        std::size_t succeeded = 0;
        double train_mse_mean = 0, train_mse_std = 0;
        double test_mse_mean = 0, test_mse_std = 0;
        std::optional<double> train_acc_mean, train_acc_std;
        std::optional<double> test_acc_mean, test_acc_std;
        double seconds_mean = 0, seconds_std = 0;
    };

    /// Mean and population standard deviation over successful runs.
    Aggregate aggregate() const {
        Aggregate a;
        std::vector<const RunResult*> ok;
        for (const auto& r : runs)
            if (r.ok) ok.push_back(&r);
        a.succeeded = ok.size();
        if (ok.empty()) return a;
        auto stats = [&ok](auto get) {
            double mean = 0;
            for (const auto* r : ok) mean += get(*r);
            mean /= static_cast<double>(ok.size());
            double var = 0;
            for (const auto* r : ok) {
                const double d = get(*r) - mean;
                var += d * d;
            }
            var /= static_cast<double>(ok.size());
            return std::pair<double, double>(mean, std::sqrt(var));
        };
        std::tie(a.train_mse_mean, a.train_mse_std) =
            stats([](const RunResult& r) { return r.train_mse; });
        std::tie(a.test_mse_mean, a.test_mse_std) =
            stats([](const RunResult& r) { return r.test_mse; });
        std::tie(a.seconds_mean, a.seconds_std) =
            stats([](const RunResult& r) { return r.train_seconds; });
        if (ok.front()->train_accuracy) {
            auto [m1, s1] = stats([](const RunResult& r) { return *r.train_accuracy; });
            a.train_acc_mean = m1;
            a.train_acc_std = s1;
            auto [m2, s2] = stats([](const RunResult& r) { return *r.test_accuracy; });
            a.test_acc_mean = m2;
            a.test_acc_std = s2;
        }
        return a;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["library_version"] = library_version;
        j["config"] = {{"dataset", config.dataset},
                       {"algorithm", config.algorithm},
                       {"arch", resolved_arch},
                       {"seed", config.seed},
                       {"rcond", config.resolved_rcond()},
                       {"epsilon", config.epsilon},
                       {"runs", config.runs},
                       {"subsample", config.subsample}};
        if (config.algorithm == "adam") {
            j["config"]["learning_rate"] = config.resolved_lr();
            j["config"]["iterations"] = config.resolved_iterations();
            j["config"]["batch_size"] = config.batch_size;
        }
        j["runs"] = nlohmann::json::array();
        for (const auto& r : runs) {
            nlohmann::json jr;
            jr["ok"] = r.ok;
            jr["seed"] = r.seed;
            if (!r.ok) {
                jr["error"] = r.error;
            } else {
                jr["train_mse"] = r.train_mse;
                jr["test_mse"] = r.test_mse;
                if (r.train_accuracy) jr["train_accuracy"] = *r.train_accuracy;
                if (r.test_accuracy) jr["test_accuracy"] = *r.test_accuracy;
                jr["train_seconds"] = r.train_seconds;
                if (r.iterations) jr["iterations"] = r.iterations;
            }
            j["runs"].push_back(std::move(jr));
        }
        const Aggregate a = aggregate();
        j["aggregate"] = {{"succeeded", a.succeeded},
                          {"train_mse_mean", a.train_mse_mean},
                          {"train_mse_std", a.train_mse_std},
                          {"test_mse_mean", a.test_mse_mean},
                          {"test_mse_std", a.test_mse_std},
                          {"train_seconds_mean", a.seconds_mean},
                          {"train_seconds_std", a.seconds_std}};
        if (a.train_acc_mean) {
            j["aggregate"]["train_accuracy_mean"] = *a.train_acc_mean;
            j["aggregate"]["train_accuracy_std"] = *a.train_acc_std;
            j["aggregate"]["test_accuracy_mean"] = *a.test_acc_mean;
            j["aggregate"]["test_accuracy_std"] = *a.test_acc_std;
        }
        return j;
    }
};

/// Train with the configured algorithm; returns the trained network's
/// TrainReport. The network is trained in place.
inline TrainReport train_with_algorithm(Network& net, const Dataset& ds,
                                        const BenchmarkConfig& cfg, std::uint64_t run_seed) {
    if (cfg.algorithm == "zorb") {
        ZorbConfig zc;
        zc.rcond = cfg.resolved_rcond();
        zc.epsilon = cfg.epsilon;
        zc.seed = run_seed;
        zc.task = ds.task;
        return zorb_train(net, ds.train_x, ds.train_y, zc);
    }
    if (cfg.algorithm == "adam") {
        AdamConfig ac;
        ac.learning_rate = cfg.resolved_lr();
        ac.max_iterations = cfg.resolved_iterations();
        ac.batch_size = cfg.batch_size;
        ac.target_mse = cfg.target_mse;
        ac.seed = run_seed;
        ac.task = ds.task;
        return adam_train(net, ds.train_x, ds.train_y, ac);
    }
    if (cfg.algorithm == "elm")
        return elm_train(net, ds.train_x, ds.train_y, cfg.resolved_rcond(), run_seed, ds.task);
    throw ParseError("unknown algorithm '" + cfg.algorithm + "' (want zorb, adam or elm)");
}

/// Run the configured benchmark: `runs` independently seeded trainings,
/// each evaluated on both splits. Failures are recorded per run and the
/// aggregate covers the successes.
inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
    if (cfg.runs < 1) throw ParseError("run_benchmark: runs must be >= 1");
    Dataset ds = load_dataset(cfg.dataset, cfg.data_dir, cfg.seed, cfg.subsample);

    BenchmarkReport report;
    report.config = cfg;
    report.resolved_arch = cfg.arch.empty() ? default_arch(ds.name) : cfg.arch;
    if (auto preset = arch_preset(report.resolved_arch)) report.resolved_arch = *preset;
    report.runs.resize(cfg.runs);

    auto one_run = [&](std::size_t r) {
        RunResult& rr = report.runs[r];
        rr.seed = cfg.seed + r;
        try {
            Network net = parse_arch(report.resolved_arch, ds, rr.seed, cfg.epsilon);
            TrainReport tr = train_with_algorithm(net, ds, cfg, rr.seed);
            rr.train_seconds = tr.wall_clock_seconds;
            rr.iterations = tr.iterations;
            Metrics train_m = evaluate(net, ds.train_x, ds.train_y, ds.task);
            Metrics test_m = evaluate(net, ds.test_x, ds.test_y, ds.task);
            rr.train_mse = train_m.mse;
            rr.test_mse = test_m.mse;
            rr.train_accuracy = train_m.accuracy;
            rr.test_accuracy = test_m.accuracy;
            rr.ok = true;
        } catch (const std::exception& e) {
            rr.ok = false;
            rr.error = e.what();
        }
    };

    if (cfg.parallel_runs && cfg.runs > 1) {
        std::vector<std::thread> pool;
        pool.reserve(cfg.runs);
        for (std::size_t r = 0; r < cfg.runs; ++r) pool.emplace_back(one_run, r);
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t r = 0; r < cfg.runs; ++r) one_run(r);
    }
    return report;
}

/// Wall-clock seconds for Adam to reach `target_mse` on the full train
/// split (or to exhaust max_iterations, whichever comes first).
inline double adam_time_to_error(Network& net, const Matrix& x, const Matrix& y,
                                 AdamConfig cfg, double target_mse) {
    cfg.target_mse = target_mse;
    return adam_train(net, x, y, cfg).wall_clock_seconds;
}

inline void write_report_json(const BenchmarkReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write report to " + path);
    out << report.to_json().dump(2) << "\n";
}

inline void write_report_csv(const BenchmarkReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write csv to " + path);
    out << "run,ok,seed,train_mse,test_mse,train_accuracy,test_accuracy,train_seconds,"
           "iterations\n";
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const RunResult& r = report.runs[i];
        out << i << ',' << (r.ok ? 1 : 0) << ',' << r.seed << ',';
        if (r.ok) {
            out << r.train_mse << ',' << r.test_mse << ',';
            if (r.train_accuracy) out << *r.train_accuracy;
            out << ',';
            if (r.test_accuracy) out << *r.test_accuracy;
            out << ',' << r.train_seconds << ',' << r.iterations;
        } else {
            out << ",,,,,";
        }
        out << '\n';
    }
}

} // namespace zorb
