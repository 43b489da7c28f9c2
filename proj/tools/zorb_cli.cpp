// zorb: benchmark harness and model tool.
//
// Subcommands:
//   bench          train/evaluate repeatedly, aggregate, write a JSON report
//   train          train once and save the model file
//   eval           load a model file and evaluate it on a dataset
//   datasets fetch print or run the download commands for file-backed sets

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zorb/zorb.hpp"

namespace {

void add_common_flags(CLI::App* cmd, zorb::BenchmarkConfig& cfg) {
    cmd->add_option("--dataset", cfg.dataset,
                    "Dataset name (sinc, xor, two_spirals, iris, boston, mnist, cifar10) or "
                    "CSV path")
        ->required();
    cmd->add_option("--algo", cfg.algorithm, "Training algorithm: zorb, adam or elm");
    cmd->add_option("--arch", cfg.arch,
                    "Architecture string (default: per-dataset benchmark config)");
    cmd->add_option("--seed", cfg.seed, "Base seed; run r uses seed+r");
    cmd->add_option_function<double>(
        "--rcond", [&cfg](const double& v) { cfg.rcond = v; },
        "Pseudoinverse cutoff (default 1e-15; conv1 1e-2)");
    cmd->add_option("--epsilon", cfg.epsilon, "Activation inversion margin");
    cmd->add_option_function<double>(
        "--lr", [&cfg](const double& v) { cfg.learning_rate = v; },
        "Adam learning rate (default: per-dataset)");
    cmd->add_option_function<std::size_t>(
        "--iters", [&cfg](const std::size_t& v) { cfg.iterations = v; },
        "Adam iteration cap (default: per-dataset)");
    cmd->add_option("--batch-size", cfg.batch_size, "Adam mini-batch size");
    cmd->add_option_function<double>(
        "--target-mse", [&cfg](const double& v) { cfg.target_mse = v; },
        "Adam early-stop train MSE");
    cmd->add_option("--subsample", cfg.subsample, "Train subsample size (mnist/cifar10)");
    cmd->add_option("--data-dir", cfg.data_dir, "Dataset directory (or $ZORB_DATA_DIR)");
}

int cmd_bench(zorb::BenchmarkConfig& cfg, const std::string& out, const std::string& csv) {
    zorb::BenchmarkReport report = zorb::run_benchmark(cfg);
    const auto agg = report.aggregate();
    std::cout << report.config.dataset << " / " << report.config.algorithm << " (" << agg.succeeded
              << "/" << cfg.runs << " runs ok)\n"
              << "  train mse " << agg.train_mse_mean << " +- " << agg.train_mse_std
              << ", test mse " << agg.test_mse_mean << " +- " << agg.test_mse_std << "\n";
    if (agg.test_acc_mean)
        std::cout << "  train acc " << *agg.train_acc_mean << "%, test acc " << *agg.test_acc_mean
                  << "% +- " << *agg.test_acc_std << "\n";
    std::cout << "  train wall clock " << agg.seconds_mean << " s +- " << agg.seconds_std << " s\n";
    for (const auto& r : report.runs)
        if (!r.ok) std::cerr << "run with seed " << r.seed << " failed: " << r.error << "\n";
    if (!out.empty()) zorb::write_report_json(report, out);
    if (!csv.empty()) zorb::write_report_csv(report, csv);
    return agg.succeeded == 0 ? 1 : 0;
}

int cmd_train(zorb::BenchmarkConfig& cfg, const std::string& model_out) {
    zorb::Dataset ds = zorb::load_dataset(cfg.dataset, cfg.data_dir, cfg.seed, cfg.subsample);
    const std::string arch = cfg.arch.empty() ? zorb::default_arch(ds.name) : cfg.arch;
    zorb::Network net = zorb::parse_arch(arch, ds, cfg.seed, cfg.epsilon);
    zorb::TrainReport tr = zorb::train_with_algorithm(net, ds, cfg, cfg.seed);
    zorb::Metrics train_m = zorb::evaluate(net, ds.train_x, ds.train_y, ds.task);
    zorb::Metrics test_m = zorb::evaluate(net, ds.test_x, ds.test_y, ds.task);
    std::cout << "trained " << arch << " on " << ds.name << " in " << tr.wall_clock_seconds
              << " s\n"
              << "  train mse " << train_m.mse << ", test mse " << test_m.mse << "\n";
    if (test_m.accuracy)
        std::cout << "  train acc " << *train_m.accuracy << "%, test acc " << *test_m.accuracy
                  << "%\n";
    if (!model_out.empty()) {
        const auto bytes = net.serialize();
        std::ofstream f(model_out, std::ios::binary);
        if (!f) {
            std::cerr << "cannot write model to " << model_out << "\n";
            return 1;
        }
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
        std::cout << "model saved to " << model_out << " (" << bytes.size() << " bytes)\n";
    }
    return 0;
}

int cmd_eval(const std::string& model_in, zorb::BenchmarkConfig& cfg) {
    std::ifstream f(model_in, std::ios::binary);
    if (!f) {
        std::cerr << "cannot open model " << model_in << "\n";
        return 1;
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    zorb::Network net = zorb::Network::deserialize(bytes);
    zorb::Dataset ds = zorb::load_dataset(cfg.dataset, cfg.data_dir, cfg.seed, cfg.subsample);
    zorb::Metrics train_m = zorb::evaluate(net, ds.train_x, ds.train_y, ds.task);
    zorb::Metrics test_m = zorb::evaluate(net, ds.test_x, ds.test_y, ds.task);
    nlohmann::json j{{"dataset", ds.name},
                     {"train_mse", train_m.mse},
                     {"test_mse", test_m.mse}};
    if (train_m.accuracy) j["train_accuracy"] = *train_m.accuracy;
    if (test_m.accuracy) j["test_accuracy"] = *test_m.accuracy;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_datasets_fetch(const std::string& data_dir, bool dry_run) {
    const auto dir = zorb::data_dir_or_default(data_dir);
    const std::string d = dir.string();
    const std::string script =
        "mkdir -p " + d + "/mnist " + d + " && cd " + d +
        " && curl -fLO https://ossci-datasets.s3.amazonaws.com/mnist/train-images-idx3-ubyte.gz"
        " && curl -fLO https://ossci-datasets.s3.amazonaws.com/mnist/train-labels-idx1-ubyte.gz"
        " && curl -fLO https://ossci-datasets.s3.amazonaws.com/mnist/t10k-images-idx3-ubyte.gz"
        " && curl -fLO https://ossci-datasets.s3.amazonaws.com/mnist/t10k-labels-idx1-ubyte.gz"
        " && gunzip -f *-ubyte.gz && mv -f *-ubyte mnist/"
        " && curl -fLO https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz"
        " && tar xzf cifar-10-binary.tar.gz"
        " && curl -fL http://lib.stat.cmu.edu/datasets/boston -o boston_raw.txt";
    if (dry_run) {
        std::cout << "# commands that would run (pass --run to execute):\n" << script << "\n";
        return 0;
    }
    std::cout << "fetching datasets into " << d << " ...\n";
    const int rc = std::system(script.c_str());
    if (rc != 0) {
        std::cerr << "fetch failed (network unavailable?). The commands above can be run "
                     "manually on a connected machine; see README.md.\n";
        return 1;
    }
    std::cout << "done. Note: the Boston file needs reshaping to CSV; see README.md.\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ZORB benchmark harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(zorb::kVersion));

    zorb::BenchmarkConfig bench_cfg;
    std::string out_path, csv_path;
    CLI::App* bench = app.add_subcommand("bench", "Run a benchmark and write a report");
    add_common_flags(bench, bench_cfg);
    bench->add_option("--runs", bench_cfg.runs, "Independent seeded repetitions");
    bench->add_flag("--parallel-runs", bench_cfg.parallel_runs,
                    "Execute runs concurrently (per-run seeds, order-independent)");
    bench->add_option("--out", out_path, "JSON report path");
    bench->add_option("--csv", csv_path, "Per-run CSV path");

    zorb::BenchmarkConfig train_cfg;
    std::string model_out;
    CLI::App* train = app.add_subcommand("train", "Train once and optionally save the model");
    add_common_flags(train, train_cfg);
    train->add_option("--model-out", model_out, "Model file path");

    zorb::BenchmarkConfig eval_cfg;
    std::string model_in;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved model on a dataset");
    eval->add_option("--model-in", model_in, "Model file path")->required();
    eval->add_option("--dataset", eval_cfg.dataset, "Dataset name or CSV path")->required();
    eval->add_option("--seed", eval_cfg.seed, "Seed for dataset splits");
    eval->add_option("--subsample", eval_cfg.subsample, "Train subsample size");
    eval->add_option("--data-dir", eval_cfg.data_dir, "Dataset directory");

    CLI::App* datasets = app.add_subcommand("datasets", "Dataset utilities");
    std::string fetch_dir;
    bool fetch_run = false;
    CLI::App* fetch = datasets->add_subcommand("fetch", "Download mnist/cifar10/boston files");
    fetch->add_option("--data-dir", fetch_dir, "Target directory");
    fetch->add_flag("--run", fetch_run, "Execute the download commands (default: print them)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench->parsed()) return cmd_bench(bench_cfg, out_path, csv_path);
        if (train->parsed()) return cmd_train(train_cfg, model_out);
        if (eval->parsed()) return cmd_eval(model_in, eval_cfg);
        if (datasets->parsed() && fetch->parsed()) return cmd_datasets_fetch(fetch_dir, !fetch_run);
        std::cerr << app.help();
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
