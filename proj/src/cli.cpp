#include "patchcrf/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "patchcrf/dataset.hpp"
#include "patchcrf/parallel.hpp"
#include "patchcrf/pipeline.hpp"

using nlohmann::json;

namespace patchcrf {

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("PATCHCRF_LOG");
    if (!env) return LogLevel::Info;
    const std::string v(env);
    if (v == "quiet") return LogLevel::Quiet;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
}

struct Logger {
    std::ostream& err;
    LogLevel level = log_level();

    void info(const std::string& msg) const {
        if (level >= LogLevel::Info) err << "[info] " << msg << "\n";
    }
    void debug(const std::string& msg) const {
        if (level >= LogLevel::Debug) err << "[debug] " << msg << "\n";
    }
    void warn(const std::string& msg) const {
        if (level >= LogLevel::Info) err << "[warn] " << msg << "\n";
    }
};

std::string format_accuracy(double acc) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", acc);
    return buf;
}

int cmd_train(const TrainConfig& cfg, const std::string& data,
              const std::string& data_train, const std::string& data_test,
              std::size_t split_train, std::uint64_t split_seed,
              const std::string& out_path, unsigned threads, const Logger& log) {
    DatasetManifest train_set;
    DatasetManifest test_set;
    bool have_test = false;

    auto warn = [&](const std::string& msg) { log.warn(msg); };
    if (!data_train.empty()) {
        train_set = ingest(data_train, warn);
        if (!data_test.empty()) {
            test_set = ingest(data_test, warn);
            have_test = true;
        }
    } else {
        DatasetManifest full = ingest(data, warn);
        if (split_train > 0) {
            std::tie(train_set, test_set) = split(full, split_train, split_seed);
            have_test = true;
        } else {
            train_set = full;
        }
    }

    log.info("training on " + std::to_string(train_set.image_count()) +
             " images across " + std::to_string(train_set.classes.size()) +
             " classes");
    const TrainedModel model = train_model(train_set, cfg, threads);
    save_model(model, out_path);
    log.info("model written to " + out_path);

    if (have_test) {
        const EvalReport report = evaluate(model, test_set, threads);
        log.info("held-out accuracy " + format_accuracy(report.accuracy) +
                 " on " + std::to_string(report.total) + " images");
    }
    return 0;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
    Logger log{err};

    CLI::App app{"Probabilistic patch-based image classifier"};
    app.require_subcommand(1);

    // train
    TrainConfig cfg;
    std::string data, data_train, data_test, out_path;
    std::string order_name = "zigzag";
    std::size_t split_train = 0;
    unsigned threads = default_threads();
    auto* train = app.add_subcommand("train", "Train a model on a dataset tree");
    train->add_option("--data", data, "Dataset root (class-per-directory)");
    train->add_option("--data-train", data_train, "Pre-split training root");
    train->add_option("--data-test", data_test,
                      "Pre-split test root (evaluated after training)");
    train->add_option("--grid", cfg.grid_side, "Grid side g; n = g^2 patches")
        ->capture_default_str();
    train->add_option("--components", cfg.gmm_components,
                      "Gaussian components per class GMM")
        ->capture_default_str();
    train->add_option("--order", order_name,
                      "Scan order: zigzag|hilbert|rowprime|rowraster")
        ->capture_default_str();
    train->add_option("--out", out_path, "Output model file")->required();
    train->add_option("--seed", cfg.seed, "Global seed")->capture_default_str();
    train->add_option("--svm-c", cfg.svm_c, "SVM soft-margin C")
        ->capture_default_str();
    train->add_option("--svm-gamma", cfg.svm_gamma,
                      "RBF gamma (0 = 1/feature-dimension)")
        ->capture_default_str();
    train->add_option("--kl-samples", cfg.kl_samples,
                      "Monte-Carlo samples per KL estimate")
        ->capture_default_str();
    train->add_option("--transition-include-self", cfg.transition_include_self,
                      "Include the self class in the preference softmax")
        ->capture_default_str();
    train->add_option("--split-train", split_train,
                      "Per-class training count; the rest becomes a held-out "
                      "test side");
    train->add_option("--threads", threads, "Worker threads")
        ->capture_default_str();

    // featurize
    std::string model_path, image_path, feature_out;
    auto* featurize =
        app.add_subcommand("featurize", "Emit the chain marginal feature vector");
    featurize->add_option("--model", model_path, "Model file")->required();
    featurize->add_option("--image", image_path, "Image file")->required();
    featurize->add_option("--out", feature_out, "Output file (default stdout)");

    // predict
    std::string p_model, p_image;
    auto* predict_cmd = app.add_subcommand("predict", "Classify one image");
    predict_cmd->add_option("--model", p_model, "Model file")->required();
    predict_cmd->add_option("--image", p_image, "Image file")->required();

    // eval
    std::string e_model, e_data, e_report;
    unsigned e_threads = default_threads();
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
    eval_cmd->add_option("--model", e_model, "Model file")->required();
    eval_cmd->add_option("--data", e_data, "Dataset root")->required();
    eval_cmd->add_option("--report", e_report, "Report file (default stdout)");
    eval_cmd->add_option("--threads", e_threads, "Worker threads")
        ->capture_default_str();

    // scan
    std::size_t scan_grid = 3;
    std::string scan_order = "zigzag";
    auto* scan_cmd = app.add_subcommand("scan", "Print a grid scan path");
    scan_cmd->add_option("--grid", scan_grid, "Grid side")->capture_default_str();
    scan_cmd->add_option("--order", scan_order,
                         "Scan order: zigzag|hilbert|rowprime|rowraster")
        ->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        err << app.help();
        return 2;
    }

    try {
        if (train->parsed()) {
            cfg.order = parse_scan_order(order_name);
            if (data.empty() && data_train.empty())
                throw Error("train needs --data or --data-train");
            if (!data.empty() && !data_train.empty())
                throw Error("--data and --data-train are mutually exclusive");
            return cmd_train(cfg, data, data_train, data_test, split_train,
                             cfg.seed, out_path, threads, log);
        }
        if (featurize->parsed()) {
            const TrainedModel model = load_model(model_path);
            const auto feature = featurize_image(model, load_image(image_path));
            const std::string doc = serialize_feature(model, feature);
            if (feature_out.empty()) {
                out << doc;
            } else {
                std::ofstream f(feature_out, std::ios::binary);
                if (!f) throw Error("cannot write " + feature_out);
                f << doc;
            }
            return 0;
        }
        if (predict_cmd->parsed()) {
            const TrainedModel model = load_model(p_model);
            const Prediction p = predict(model, load_image(p_image));
            out << json{{"class", p.class_name},
                        {"index", p.class_index},
                        {"decisions", p.decisions}}
                       .dump()
                << "\n";
            return 0;
        }
        if (eval_cmd->parsed()) {
            const TrainedModel model = load_model(e_model);
            const DatasetManifest set =
                ingest(e_data, [&](const std::string& m) { log.warn(m); });
            const EvalReport report = evaluate(model, set, e_threads);
            const std::string doc = serialize_report(report);
            if (e_report.empty()) {
                out << doc;
            } else {
                std::ofstream f(e_report, std::ios::binary);
                if (!f) throw Error("cannot write " + e_report);
                f << doc;
                log.info("accuracy " + format_accuracy(report.accuracy) +
                         " on " + std::to_string(report.total) + " images");
            }
            return 0;
        }
        if (scan_cmd->parsed()) {
            const auto path = scan_sequence(GridSpec{scan_grid, scan_grid},
                                            parse_scan_order(scan_order));
            for (std::size_t i = 0; i < path.size(); ++i)
                out << (i ? " " : "") << "(" << path[i].row << "," << path[i].col
                    << ")";
            out << "\n";
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "error: no subcommand given\n";
    return 2;
}

} // namespace patchcrf
