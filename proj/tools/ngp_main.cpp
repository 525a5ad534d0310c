// Command-line front end: generate datasets, run a selection, run
// Monte-Carlo sweeps, and render comparison reports.
//
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ngp/harness.hpp"
#include "ngp/io.hpp"
#include "ngp/json_io.hpp"

namespace fs = std::filesystem;
using ngp::Json;

namespace {

int log_level() {
    const char* env = std::getenv("NGP_LOG");
    if (!env) return 1;
    const std::string v = env;
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << msg << "\n";
}

std::string sidecar_path(const std::string& csv_path) {
    fs::path p(csv_path);
    p.replace_extension(".json");
    return p.string();
}

std::string format_number(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string join_one_based(const std::vector<int>& indices) {
    std::string out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(indices[i] + 1);
    }
    return out;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    Json j;
    in >> j;
    return j;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
    std::string law = "ohm";
    long samples = 1000;
    int features = 10;
    double noise_sigma = -1.0;  // <0 = per-generator default
    std::uint64_t seed = 0;
    std::string out;
    // augmentation mode
    std::string augment_csv;
    std::vector<std::string> targets{"t"};
    bool no_header = false;
    int count = 100;
    double low = -10.0, high = 10.0;
};

int cmd_generate(const GenerateOpts& opts) {
    ngp::Dataset data;
    Json sidecar;
    if (!opts.augment_csv.empty()) {
        data = ngp::load_csv(opts.augment_csv, opts.targets, !opts.no_header);
        const auto input_sidecar = sidecar_path(opts.augment_csv);
        if (fs::exists(input_sidecar)) {
            const Json meta = load_json_file(input_sidecar);
            if (meta.contains("true_support"))
                data.true_support =
                    ngp::to_zero_based(meta.at("true_support").get<std::vector<int>>());
        }
        if (!data.true_support) {
            std::vector<int> all(static_cast<std::size_t>(data.feature_count()));
            std::iota(all.begin(), all.end(), 0);
            data.true_support = std::move(all);
            log_info("marking all " + std::to_string(data.feature_count()) +
                     " original columns as the true support");
        }
        data = ngp::augment_irrelevant(data, opts.count, opts.low, opts.high, opts.seed);
        sidecar["source_csv"] = opts.augment_csv;
        sidecar["augment"] = Json{{"count", opts.count}, {"low", opts.low}, {"high", opts.high}};
        sidecar["notes"] =
            Json::array({"appended features are i.i.d. uniform(low, high)"});
    } else {
        ngp::GenConfig gen;
        gen.samples = opts.samples;
        gen.features = opts.features;
        gen.seed = opts.seed;
        if (opts.law == "correlated") {
            gen.noise_sigma = opts.noise_sigma < 0.0 ? 1.0 : opts.noise_sigma;
            data = ngp::gen_correlated_model(gen);
            sidecar["notes"] = Json::array(
                {"the 'or' between features in the target model is the pairwise maximum"});
        } else if (opts.law == "ohm") {
            data = ngp::gen_physical_law(ngp::LawKind::ohm, gen);
        } else if (opts.law == "planck") {
            data = ngp::gen_physical_law(ngp::LawKind::planck, gen);
        } else if (opts.law == "gravitation") {
            data = ngp::gen_physical_law(ngp::LawKind::gravitation, gen);
        } else {
            throw CLI::ValidationError("--law", "unknown generator '" + opts.law + "'");
        }
        sidecar["generator"] = opts.law;
        sidecar["noise_sigma"] = gen.noise_sigma;
    }

    sidecar["samples"] = data.sample_count();
    sidecar["features"] = data.feature_count();
    sidecar["seed"] = opts.seed;
    if (data.true_support) sidecar["true_support"] = ngp::to_one_based(*data.true_support);

    ngp::save_csv(data, opts.out);
    std::ofstream side(sidecar_path(opts.out));
    side << sidecar.dump(2) << "\n";

    std::cout << "wrote " << opts.out << " (J=" << data.sample_count()
              << ", P=" << data.feature_count() << ")\n";
    if (data.true_support)
        std::cout << "support: " << join_one_based(*data.true_support) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// select

struct SelectOpts {
    std::string data_csv, images, labels;
    std::vector<std::string> targets{"t"};
    bool no_header = false;
    long limit = 0;
    std::string method = "ngp";
    int max_features = 0;
    double eta = -1.0;
    double val_fraction = 0.2;
    // predictor
    std::string family = "mlp";
    std::string loss;  // empty = auto
    int hidden_units = 500;
    int epochs = 10;
    double learning_rate = 0.01;
    int batch_size = 32;
    double weight_decay = 1e-4;
    double ridge_lambda = 0.0;
    // group
    int grid_rows = 0, grid_cols = 0;
    std::vector<int> window{4, 4};
    int stride = 4;
    // baselines
    double lambda = 0.01;
    double threshold = 0.01;

    std::uint64_t seed = 42;
    int threads = 0;
    std::string out, dump_model, config_path;
    bool json = false;
    bool dry_run = false;
};

ngp::ExperimentConfig select_config(const SelectOpts& opts, const CLI::App* cmd) {
    ngp::ExperimentConfig config;
    if (!opts.config_path.empty())
        config = ngp::experiment_config_from_json(load_json_file(opts.config_path));

    auto passed = [&](const std::string& flag) { return cmd->count(flag) > 0; };

    if (passed("--data")) {
        config.dataset = ngp::DatasetSpec{};
        config.dataset.kind = ngp::DatasetSpec::Kind::csv;
        config.dataset.csv_path = opts.data_csv;
        config.dataset.target_columns = opts.targets;
        config.dataset.has_header = !opts.no_header;
    } else if (passed("--images")) {
        config.dataset = ngp::DatasetSpec{};
        config.dataset.kind = ngp::DatasetSpec::Kind::idx;
        config.dataset.images_path = opts.images;
        config.dataset.labels_path = opts.labels;
        if (opts.limit > 0) config.dataset.limit = static_cast<std::size_t>(opts.limit);
        config.ngp.predictor.loss = ngp::LossKind::cross_entropy;
    } else if (opts.config_path.empty()) {
        throw CLI::RequiredError("--data or --images");
    }

    if (passed("--method") || opts.config_path.empty()) {
        if (opts.method == "ngp")
            config.method = ngp::Method::ngp;
        else if (opts.method == "ngp_group")
            config.method = ngp::Method::ngp_group;
        else if (opts.method == "correlation")
            config.method = ngp::Method::correlation;
        else if (opts.method == "lasso")
            config.method = ngp::Method::lasso;
        else
            throw CLI::ValidationError("--method", "unknown method '" + opts.method + "'");
    }

    config.split = {1.0 - opts.val_fraction, opts.val_fraction, 0.0};
    if (passed("--max-features")) config.ngp.max_features = opts.max_features;
    if (passed("--eta")) config.ngp.eta = opts.eta;
    if (passed("--predictor")) {
        config.ngp.predictor.family =
            opts.family == "linear" ? ngp::PredictorFamily::linear : ngp::PredictorFamily::mlp;
        if (opts.family != "linear" && opts.family != "mlp")
            throw CLI::ValidationError("--predictor", "unknown family '" + opts.family + "'");
    }
    if (passed("--loss"))
        config.ngp.predictor.loss = opts.loss == "cross_entropy" ? ngp::LossKind::cross_entropy
                                                                 : ngp::LossKind::mean_square;
    if (passed("--hidden-units")) config.ngp.predictor.hidden_units = opts.hidden_units;
    if (passed("--epochs")) config.ngp.predictor.epochs = opts.epochs;
    if (passed("--learning-rate")) config.ngp.predictor.learning_rate = opts.learning_rate;
    if (passed("--batch-size")) config.ngp.predictor.batch_size = opts.batch_size;
    if (passed("--weight-decay")) config.ngp.predictor.weight_decay = opts.weight_decay;
    if (passed("--ridge-lambda")) config.ngp.predictor.ridge_lambda = opts.ridge_lambda;
    if (passed("--grid-rows")) config.group.rows = opts.grid_rows;
    if (passed("--grid-cols")) config.group.cols = opts.grid_cols;
    if (passed("--window") && opts.window.size() == 2) {
        config.group.window_h = opts.window[0];
        config.group.window_w = opts.window[1];
    }
    if (passed("--stride")) config.group.stride = opts.stride;
    if (passed("--lambda")) config.lasso_lambda = opts.lambda;
    if (passed("--threshold")) config.importance_threshold = opts.threshold;
    if (passed("--seed") || opts.config_path.empty()) config.master_seed = opts.seed;
    if (passed("--threads")) config.threads = opts.threads;
    config.runs = 1;

    // a sidecar written by `generate` carries the true support
    if (config.dataset.kind == ngp::DatasetSpec::Kind::csv) {
        const auto side = sidecar_path(config.dataset.csv_path);
        if (fs::exists(side)) {
            const Json meta = load_json_file(side);
            if (meta.contains("true_support"))
                config.dataset.true_support_override =
                    ngp::to_zero_based(meta.at("true_support").get<std::vector<int>>());
        }
    }
    return config;
}

int cmd_select(const SelectOpts& opts, const CLI::App* cmd) {
    ngp::ExperimentConfig config = select_config(opts, cmd);
    config.validate();
    if (opts.dry_run) {
        std::cout << ngp::detail::config_echo(config).dump(2) << "\n";
        return 0;
    }
    log_debug("resolved config: " + ngp::detail::config_echo(config).dump());

    const ngp::RunResult result = ngp::run_single(config);

    Json output;
    if (result.has_selection) {
        output = ngp::selection_to_json(result.selection, config.ngp);
    } else {
        Json imp = Json::array();
        for (Eigen::Index i = 0; i < result.importance.size(); ++i)
            imp.push_back(Json{{"index", i + 1}, {"importance", result.importance(i)}});
        output = Json{{"method", to_string(config.method)},
                      {"selected", ngp::to_one_based(result.selected)},
                      {"importance", imp}};
    }
    output["metrics"] = ngp::to_json(result.metrics);

    if (opts.json) {
        std::cout << output.dump(2) << "\n";
    } else if (result.has_selection) {
        const auto& sel = result.selection;
        std::printf("%4s  %-10s  %-12s  %s\n", "k", "feature", "loss", "improvement");
        double prev = sel.baseline_loss;
        for (const auto& entry : sel.trace.entries) {
            std::string label = entry.group_row >= 0
                                    ? "win(" + std::to_string(entry.group_row) + "," +
                                          std::to_string(entry.group_col) + ")"
                                    : std::to_string(entry.index + 1);
            const double improvement =
                prev > 0.0 ? (prev - entry.loss) / prev * 100.0 : 0.0;
            std::printf("%4d  %-10s  %-12.6g  %7.2f%%%s\n", entry.iteration, label.c_str(),
                        entry.loss, improvement, entry.rolled_back ? "  (rolled back)" : "");
            prev = entry.loss;
        }
        std::printf("baseline loss: %.6g\n", sel.baseline_loss);
        std::printf("selected (descending importance): %s\n",
                    join_one_based(result.selected).c_str());
        std::printf("stop reason: %s\n", result.stop_reason.c_str());
        std::printf("trainings performed: %ld\n", result.trainings);
    } else {
        std::printf("%-8s  %s\n", "feature", "importance");
        auto order = ngp::select_by_importance({result.importance}, -1.0);  // full ranking
        for (int i : order.indices)
            std::printf("%-8d  %.6f\n", i + 1, result.importance(i));
        std::printf("selected (importance > %g): %s\n", config.importance_threshold,
                    join_one_based(result.selected).c_str());
    }
    if (!opts.json) {
        if (result.metrics.fpsr)
            std::printf("FPSR: %.4f\n", *result.metrics.fpsr);
        if (result.metrics.fnsr)
            std::printf("FNSR: %.4f\n", *result.metrics.fnsr);
        if (result.metrics.accuracy)
            std::printf("test accuracy: %.4f\n", *result.metrics.accuracy);
    }

    if (!opts.out.empty()) {
        if (result.has_selection) {
            std::ofstream f(opts.out);
            f << output.dump(2) << "\n";
        } else {
            std::ofstream f(opts.out);  // importance CSV for plotting
            f << "index,importance\n";
            for (Eigen::Index i = 0; i < result.importance.size(); ++i)
                f << (i + 1) << "," << ngp::detail::format_double(result.importance(i)) << "\n";
        }
        log_info("wrote " + opts.out);
    }
    if (!opts.dump_model.empty() && result.has_selection) {
        std::ofstream f(opts.dump_model);
        f << ngp::model_dump(result.selection.final_model).dump(2) << "\n";
        log_info("wrote " + opts.dump_model);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    int threads = 0;
    int runs = 0;
    bool dry_run = false;
};

int cmd_sweep(const SweepOpts& opts, const CLI::App* cmd) {
    ngp::ExperimentConfig config =
        ngp::experiment_config_from_json(load_json_file(opts.config_path));
    if (cmd->count("--seed")) config.master_seed = opts.seed;
    if (cmd->count("--threads")) config.threads = opts.threads;
    if (cmd->count("--runs")) config.runs = opts.runs;
    if (cmd->count("--out")) config.out = opts.out;
    if (config.out.empty())
        throw CLI::ValidationError("--out", "output directory required (flag or config key)");
    config.validate();

    if (opts.dry_run) {
        std::cout << ngp::detail::config_echo(config).dump(2) << "\n";
        return 0;
    }
    log_debug("resolved config: " + ngp::detail::config_echo(config).dump());

    const ngp::SweepResult result = ngp::run_experiment(config);
    ngp::persist_results(result, config.out);
    std::cout << ngp::summary_csv(result);
    log_info("results in " + config.out);
    return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOpts {
    std::string dir;
    bool json = false;
};

struct ReportRow {
    std::string label;
    double fpsr, fnsr, f_mse, f_nme, p_mse, p_nme;
    bool reported = false;  // published reference value, not computed here
};

std::string na_or(double v, int precision = 3) {
    return std::isnan(v) ? "N/A" : format_number(v, precision);
}

int cmd_report(const ReportOpts& opts) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<ReportRow> rows;
    bool correlated_benchmark = false;

    std::vector<fs::path> dirs;
    if (!fs::is_directory(opts.dir)) throw std::runtime_error("not a directory: " + opts.dir);
    for (const auto& entry : fs::directory_iterator(opts.dir))
        if (entry.is_directory() && fs::exists(entry.path() / "summary.csv"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty())
        throw std::runtime_error("no result directories with summary.csv under " + opts.dir);

    for (const auto& dir : dirs) {
        Json config;
        if (fs::exists(dir / "config.json")) config = load_json_file((dir / "config.json"));
        std::ifstream in(dir / "summary.csv");
        std::string header, line, last;
        std::getline(in, header);
        while (std::getline(in, line))
            if (!line.empty()) last = line;
        if (last.empty()) continue;

        std::map<std::string, double> cells;
        {
            std::stringstream hs(header), ls(last);
            std::string name, value;
            while (std::getline(hs, name, ',') && std::getline(ls, value, ','))
                cells[name] = value == "nan" ? nan : std::stod(value);
        }
        ReportRow row;
        row.label = config.value("method", dir.filename().string());
        if (config.contains("predictor"))
            row.label += " + " + config["predictor"].value("family", "");
        if (config.contains("dataset") && config["dataset"].value("generator", "") == "correlated")
            correlated_benchmark = true;
        auto cell = [&](const std::string& name) {
            auto it = cells.find(name);
            return it == cells.end() ? nan : it->second;
        };
        row.fpsr = cell("fpsr_mean");
        row.fnsr = cell("fnsr_mean");
        row.f_mse = cell("f_mse_mean");
        row.f_nme = cell("f_nme_db_mean");
        row.p_mse = cell("p_mse_mean");
        row.p_nme = cell("p_nme_db_mean");
        rows.push_back(row);
    }

    // published reference values for external estimators on the correlated
    // artificial benchmark; never computed by this tool
    if (correlated_benchmark) {
        rows.push_back({"ngp + ssfn (reported)", 0.016, 0.00, 0.144, -11.93, 0.076, -12.01, true});
        rows.push_back({"drop-one-out (reported)", 0.038, 0.00, nan, nan, nan, nan, true});
        rows.push_back({"rf (reported)", 0.060, 0.18, 0.038, -18.98, 0.099, -10.53, true});
        rows.push_back({"bart-50 (reported)", 0.991, 0.00, 0.114, -8.305, 0.132, -6.655, true});
        rows.push_back({"gam (reported)", 0.985, 0.00, 0.147, -5.841, 0.155, -6.167, true});
    }

    if (opts.json) {
        Json out = Json::array();
        for (const auto& r : rows) {
            Json j{{"method", r.label}, {"reported", r.reported}};
            auto put = [&](const char* k, double v) {
                if (std::isnan(v))
                    j[k] = nullptr;
                else
                    j[k] = v;
            };
            put("fpsr", r.fpsr);
            put("fnsr", r.fnsr);
            put("f_mse", r.f_mse);
            put("f_nme_db", r.f_nme);
            put("p_mse", r.p_mse);
            put("p_nme_db", r.p_nme);
            out.push_back(j);
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    std::printf("%-28s %8s %8s %8s %8s %8s %8s\n", "method", "FPSR", "FNSR", "F-MSE", "F-NME",
                "P-MSE", "P-NME");
    for (const auto& r : rows)
        std::printf("%-28s %8s %8s %8s %8s %8s %8s\n", r.label.c_str(), na_or(r.fpsr).c_str(),
                    na_or(r.fnsr).c_str(), na_or(r.f_mse).c_str(), na_or(r.f_nme).c_str(),
                    na_or(r.p_mse).c_str(), na_or(r.p_nme).c_str());
    if (correlated_benchmark)
        std::printf("rows marked (reported) are published reference values, not computed here\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"greedy feature selection with retrained predictors"};
    app.require_subcommand(1);

    GenerateOpts gen;
    auto* cmd_gen = app.add_subcommand("generate", "generate a synthetic dataset as CSV + sidecar");
    cmd_gen->add_option("--law", gen.law, "ohm | planck | gravitation | correlated");
    cmd_gen->add_option("--samples", gen.samples, "sample count");
    cmd_gen->add_option("--features", gen.features, "total feature count");
    cmd_gen->add_option("--noise-sigma", gen.noise_sigma, "target noise (correlated model)");
    cmd_gen->add_option("--seed", gen.seed, "generator seed");
    cmd_gen->add_option("--out", gen.out, "output CSV path")->required();
    cmd_gen->add_option("--augment", gen.augment_csv,
                        "augment an existing CSV with irrelevant features instead");
    cmd_gen->add_option("--targets", gen.targets, "target columns of the input CSV");
    cmd_gen->add_flag("--no-header", gen.no_header, "input CSV has no header row");
    cmd_gen->add_option("--count", gen.count, "number of appended features");
    cmd_gen->add_option("--low", gen.low, "lower bound of appended uniforms");
    cmd_gen->add_option("--high", gen.high, "upper bound of appended uniforms");

    SelectOpts sel;
    auto* cmd_sel = app.add_subcommand("select", "run feature selection on a dataset");
    cmd_sel->add_option("--data", sel.data_csv, "CSV dataset path");
    cmd_sel->add_option("--targets", sel.targets, "target columns (names or 1-based positions)");
    cmd_sel->add_flag("--no-header", sel.no_header, "CSV has no header row");
    cmd_sel->add_option("--images", sel.images, "IDX image file");
    cmd_sel->add_option("--labels", sel.labels, "IDX label file");
    cmd_sel->add_option("--limit", sel.limit, "max samples to load from IDX");
    cmd_sel->add_option("--method", sel.method, "ngp | ngp_group | correlation | lasso");
    cmd_sel->add_option("--max-features", sel.max_features, "selection budget N");
    cmd_sel->add_option("--eta", sel.eta, "relative-improvement stopping threshold");
    cmd_sel->add_option("--val-fraction", sel.val_fraction, "validation share of the data");
    cmd_sel->add_option("--predictor", sel.family, "mlp | linear");
    cmd_sel->add_option("--loss", sel.loss, "mean_square | cross_entropy");
    cmd_sel->add_option("--hidden-units", sel.hidden_units, "MLP hidden layer width");
    cmd_sel->add_option("--epochs", sel.epochs, "MLP training epochs");
    cmd_sel->add_option("--learning-rate", sel.learning_rate, "SGD learning rate");
    cmd_sel->add_option("--batch-size", sel.batch_size, "SGD mini-batch size");
    cmd_sel->add_option("--weight-decay", sel.weight_decay, "l2 weight penalty");
    cmd_sel->add_option("--ridge-lambda", sel.ridge_lambda, "ridge penalty (linear family)");
    cmd_sel->add_option("--grid-rows", sel.grid_rows, "feature grid rows (ngp_group)");
    cmd_sel->add_option("--grid-cols", sel.grid_cols, "feature grid cols (ngp_group)");
    cmd_sel->add_option("--window", sel.window, "window height width (ngp_group)")->expected(2);
    cmd_sel->add_option("--stride", sel.stride, "window stride (ngp_group)");
    cmd_sel->add_option("--lambda", sel.lambda, "lasso regression constant");
    cmd_sel->add_option("--threshold", sel.threshold, "importance selection threshold");
    cmd_sel->add_option("--seed", sel.seed, "master seed");
    cmd_sel->add_option("--threads", sel.threads, "worker budget (0 = hardware)");
    cmd_sel->add_option("--out", sel.out, "write result JSON (or importance CSV) here");
    cmd_sel->add_option("--dump-model", sel.dump_model, "write final model JSON here");
    cmd_sel->add_option("--config", sel.config_path, "JSON config file (flags win)");
    cmd_sel->add_flag("--json", sel.json, "machine-readable output");
    cmd_sel->add_flag("--dry-run", sel.dry_run, "print the resolved config and exit");

    SweepOpts swp;
    auto* cmd_swp = app.add_subcommand("sweep", "run a Monte-Carlo experiment from a config file");
    cmd_swp->add_option("--config", swp.config_path, "experiment JSON config")->required();
    cmd_swp->add_option("--out", swp.out, "output directory");
    cmd_swp->add_option("--seed", swp.seed, "master seed override");
    cmd_swp->add_option("--threads", swp.threads, "worker budget (0 = hardware)");
    cmd_swp->add_option("--runs", swp.runs, "Monte-Carlo run count override");
    cmd_swp->add_flag("--dry-run", swp.dry_run, "print the resolved config and exit");

    ReportOpts rep;
    auto* cmd_rep = app.add_subcommand("report", "tabulate persisted sweep results");
    cmd_rep->add_option("--dir", rep.dir, "directory holding result subdirectories")->required();
    cmd_rep->add_flag("--json", rep.json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*cmd_gen) return cmd_generate(gen);
        if (*cmd_sel) return cmd_select(sel, cmd_sel);
        if (*cmd_swp) return cmd_sweep(swp, cmd_swp);
        if (*cmd_rep) return cmd_report(rep);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
