// multilink: multiplex link-prediction runs from the command line.
//
//   multilink validate --dataset net.edges
//   multilink evaluate --dataset net.edges --target-layer calls --method aa,maa
//   multilink sweep    --dataset net.edges --target-layer calls --out grid.csv
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "multilink/config.hpp"
#include "multilink/edgelist.hpp"
#include "multilink/evaluation.hpp"
#include "multilink/graph.hpp"
#include "multilink/scorers.hpp"
#include "multilink/sweep.hpp"
#include "multilink/triads.hpp"

namespace ml = multilink;

namespace {

// Thrown for problems the user can fix by changing flags/config (exit 2);
// plain std::runtime_error and friends signal runtime failures (exit 1).
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

ml::MultiplexNetwork load_dataset(const ml::RunConfig& cfg) {
    ml::EdgeListOptions opts;
    opts.select_layers = cfg.layers;
    if (!cfg.layer_names.empty()) {
        try {
            opts.layer_names = ml::load_layer_names_file(cfg.layer_names);
        } catch (const std::exception& e) {
            throw UsageError(std::string("layer names file: ") + e.what());
        }
    }
    std::vector<std::string> warnings;
    try {
        ml::MultiplexNetwork net = ml::load_multiplex_file(cfg.dataset, opts, &warnings);
        for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
        return net;
    } catch (const std::exception& e) {
        throw UsageError(std::string("dataset: ") + e.what());
    }
}

ml::LayerId resolve_target_layer(const ml::MultiplexNetwork& net, const std::string& label) {
    if (label.empty()) throw UsageError("--target-layer is required");
    if (const auto id = net.layer_id(label)) return *id;
    std::uint32_t numeric = 0;
    const auto res = std::from_chars(label.data(), label.data() + label.size(), numeric);
    if (res.ec == std::errc() && res.ptr == label.data() + label.size() && numeric < net.n_layers())
        return numeric;
    throw UsageError("unknown target layer: " + label);
}

ml::CoefficientVector resolve_eta(const ml::RunConfig& cfg, std::size_t n_layers) {
    if (cfg.eta.empty()) return ml::CoefficientVector::uniform(n_layers);
    if (cfg.eta.size() != n_layers)
        throw UsageError("--eta needs exactly one weight per layer (" + std::to_string(n_layers) + ")");
    ml::CoefficientVector cv{cfg.eta};
    if (!cv.on_simplex()) throw UsageError("--eta weights must be nonnegative and sum to 1");
    return cv;
}

ml::ScorerSpec make_spec(const ml::RunConfig& cfg, ml::Method method,
                         const ml::MultiplexNetwork& net) {
    ml::ScorerSpec spec;
    spec.method = method;
    spec.beta = cfg.katz_beta;
    spec.max_len = cfg.katz_max_len;
    spec.katz_mode = cfg.katz_mode == "exact" ? ml::KatzMode::exact : ml::KatzMode::truncated;
    spec.seed = cfg.seed;
    if (method == ml::Method::maa) spec.eta = resolve_eta(cfg, net.n_layers());
    if (cfg.baseline_layer == "aggregate")
        spec.layer = ml::LayerSelector::aggregate_all();
    else if (cfg.baseline_layer == "target")
        spec.layer = ml::LayerSelector::target();
    else {
        if (!net.layer_id(cfg.baseline_layer))
            throw UsageError("unknown baseline layer: " + cfg.baseline_layer);
        spec.layer = ml::LayerSelector::named(cfg.baseline_layer);
    }
    return spec;
}

void write_text_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

// ---- validate --------------------------------------------------------

int cmd_validate(const ml::RunConfig& cfg) {
    const ml::MultiplexNetwork net = load_dataset(cfg);

    std::size_t name_width = std::string("aggregate").size();
    for (const std::string& name : net.layer_names()) name_width = std::max(name_width, name.size());

    std::ostringstream table;
    table << std::left << std::setw(static_cast<int>(name_width) + 2) << "layer" << std::right
          << std::setw(8) << "nodes" << std::setw(8) << "links" << '\n';
    for (ml::LayerId a = 0; a < net.n_layers(); ++a) {
        const ml::Layer& layer = net.layer(a);
        table << std::left << std::setw(static_cast<int>(name_width) + 2) << net.layer_name(a)
              << std::right << std::setw(8) << layer.active_nodes() << std::setw(8)
              << layer.edge_count() << '\n';
    }
    const ml::Layer all = ml::aggregate(net);
    table << std::left << std::setw(static_cast<int>(name_width) + 2) << "aggregate" << std::right
          << std::setw(8) << all.active_nodes() << std::setw(8) << all.edge_count() << '\n';
    std::cout << table.str();
    return 0;
}

// ---- evaluate --------------------------------------------------------

int cmd_evaluate(const ml::RunConfig& cfg) {
    const ml::MultiplexNetwork net = load_dataset(cfg);
    const ml::LayerId target = resolve_target_layer(net, cfg.target_layer);

    std::vector<std::string> method_names = cfg.methods;
    if (method_names.empty()) method_names = {"aa", "cn", "jc", "pa", "katz", "maa"};
    std::vector<ml::Method> methods;
    for (const std::string& name : method_names) {
        try {
            methods.push_back(ml::parse_method(name));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }

    ml::EvalProtocol protocol = cfg.protocol();
    // the cross-layer test set is deterministic, so repeating it is pure waste
    if (protocol.mode == ml::EvalMode::cross_layer && !cfg.reps_given) protocol.repetitions = 1;

    std::string csv = ml::metrics_csv_header() + "\n";
    for (std::size_t i = 0; i < methods.size(); ++i) {
        const ml::ScorerSpec spec = make_spec(cfg, methods[i], net);
        std::cerr << "evaluate " << ml::method_name(methods[i]) << " (" << protocol.repetitions
                  << " repetitions)..." << std::endl;
        const ml::MetricsReport report = ml::evaluate(spec, net, target, protocol);
        csv += ml::metrics_csv_row(cfg.dataset, net.layer_name(target), method_names[i],
                                   spec.params(), report);
        csv += '\n';
    }
    write_text_output(cfg.out, csv);
    return 0;
}

// ---- sweep -----------------------------------------------------------

std::string summary_path_for(const std::string& out) {
    std::filesystem::path p(out);
    if (p.extension() == ".csv") {
        p.replace_extension(".json");
        return p.string();
    }
    return out + ".json";
}

nlohmann::json point_json(const ml::SweepPointMetrics& pt) {
    return {{"eta", pt.eta.eta}, {"auc", pt.auc}, {"precision", pt.precision}};
}

// Loads a usable cached index or rebuilds (and re-saves) one covering the
// split. A cache is usable when it matches the network's layer averages and
// covers every candidate pair.
ml::TriadIndex cached_or_fresh_index(const ml::RunConfig& cfg, const ml::MultiplexNetwork& net,
                                     const ml::EvalSplit& split) {
    std::vector<ml::Edge> all_pairs;
    all_pairs.reserve(split.positives.size() + split.negatives.size());
    all_pairs.insert(all_pairs.end(), split.positives.begin(), split.positives.end());
    all_pairs.insert(all_pairs.end(), split.negatives.begin(), split.negatives.end());

    if (!cfg.index_cache.empty() && std::filesystem::exists(cfg.index_cache)) {
        try {
            ml::TriadIndex index = ml::load_triad_index_csv_file(cfg.index_cache);
            const auto avg = index.layer_avg_degrees();
            bool usable = avg.size() == net.n_layers();
            for (ml::LayerId a = 0; usable && a < net.n_layers(); ++a)
                usable = avg[a] == net.layer(a).avg_degree();
            for (std::size_t i = 0; usable && i < all_pairs.size(); ++i)
                usable = index.find(all_pairs[i].first, all_pairs[i].second) != nullptr;
            if (usable) {
                std::cerr << "using triad-index cache " << cfg.index_cache << std::endl;
                return index;
            }
            std::cerr << "triad-index cache does not match this run; rebuilding" << std::endl;
        } catch (const std::exception& e) {
            std::cerr << "triad-index cache unreadable (" << e.what() << "); rebuilding"
                      << std::endl;
        }
    }

    ml::TriadIndex index = ml::build_triad_index(net, all_pairs);
    if (!cfg.index_cache.empty()) {
        ml::save_triad_index_csv_file(cfg.index_cache, index);
        std::cerr << "wrote triad-index cache " << cfg.index_cache << std::endl;
    }
    return index;
}

int cmd_sweep(const ml::RunConfig& cfg) {
    for (const std::string& m : cfg.methods)
        if (ml::parse_method(m) != ml::Method::maa)
            throw UsageError("sweep only applies to method maa");
    if (cfg.out.empty()) throw UsageError("sweep needs --out for the grid CSV");

    const ml::MultiplexNetwork net = load_dataset(cfg);
    const ml::LayerId target = resolve_target_layer(net, cfg.target_layer);
    const ml::SimplexGrid grid = ml::simplex_grid(net.n_layers(), cfg.step);
    const ml::SweepObjective objective = ml::parse_sweep_objective(cfg.objective);

    ml::EvalProtocol protocol = cfg.protocol();
    if (protocol.mode == ml::EvalMode::cross_layer && !cfg.reps_given) protocol.repetitions = 1;

    std::cerr << "sweep over " << grid.points.size() << " grid points, "
              << (protocol.mode == ml::EvalMode::cross_layer
                      ? std::string("cross-layer test set")
                      : std::to_string(protocol.repetitions) + " holdout repetitions")
              << "..." << std::endl;

    ml::SweepResult result;
    if (protocol.mode == ml::EvalMode::cross_layer) {
        const ml::EvalSplit split =
            ml::cross_layer_testset(net, target, protocol.neg_cap, protocol.seed);
        const ml::TriadIndex index = cached_or_fresh_index(cfg, net, split);
        result = ml::sweep(index, {&split, 1}, grid, objective, protocol.threads);
    } else {
        ml::EvalProtocol selection = protocol;
        if (cfg.validation_fraction > 0.0) {
            // tune eta on a separate stream of splits
            selection.fraction = cfg.validation_fraction;
            selection.seed = ml::mix64(protocol.seed + 1);
        }
        result = ml::sweep_holdout(net, target, grid, objective, selection);
    }

    const ml::GridCoordinates coordinates =
        cfg.coordinates == "raw"
            ? ml::GridCoordinates::raw
            : cfg.coordinates == "barycentric"
                  ? ml::GridCoordinates::barycentric
                  : (net.n_layers() == 3 ? ml::GridCoordinates::barycentric : ml::GridCoordinates::raw);

    std::ostringstream grid_csv;
    ml::export_grid(result, coordinates, grid_csv);
    write_text_output(cfg.out, grid_csv.str());

    nlohmann::json summary;
    summary["config"] = cfg.to_json();
    summary["target_layer"] = net.layer_name(target);
    summary["grid_points"] = result.points.size();
    summary["objective"] = ml::sweep_objective_name(objective);
    summary["best_by_auc"] = point_json(result.best_by_auc());
    summary["best_by_precision"] = point_json(result.best_by_precision());

    if (cfg.validation_fraction > 0.0 && protocol.mode == ml::EvalMode::random_holdout) {
        // report held-out metrics of the tuned eta under the main protocol
        ml::ScorerSpec spec = make_spec(cfg, ml::Method::maa, net);
        spec.eta = result.best().eta;
        const ml::MetricsReport held_out = ml::evaluate(spec, net, target, protocol);
        summary["holdout_at_best"] = {{"eta", spec.eta.eta},
                                      {"auc", held_out.auc},
                                      {"auc_min", held_out.auc_min},
                                      {"auc_max", held_out.auc_max},
                                      {"p1", held_out.p1},
                                      {"p2", held_out.p2},
                                      {"precision", held_out.precision},
                                      {"n", held_out.n},
                                      {"repetitions", held_out.repetitions},
                                      {"seed", held_out.seed}};
    }

    const std::string summary_text = summary.dump(2) + "\n";
    if (cfg.out == "-") {
        std::cout << summary_text;
    } else {
        write_text_output(summary_path_for(cfg.out), summary_text);
        std::cout << summary_text;
    }
    return 0;
}

void add_common_options(CLI::App* cmd, ml::RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--dataset", cfg.dataset, "edge-list file (layer node node [weight])");
    cmd->add_option("--layers", cfg.layers, "comma-separated layer selection")->delimiter(',');
    cmd->add_option("--layer-names", cfg.layer_names, "sidecar file mapping layer ids to names");
    cmd->add_option("--config", config_path, "JSON config file; its values override flags");
}

void add_protocol_options(CLI::App* cmd, ml::RunConfig& cfg) {
    cmd->add_option("--target-layer", cfg.target_layer, "prediction layer (name or index)");
    cmd->add_option("--fraction", cfg.fraction, "holdout fraction of target-layer links")
        ->capture_default_str();
    cmd->add_option("--reps", cfg.reps, "number of repetitions")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "base seed; repetition i uses seed + i")
        ->capture_default_str();
    cmd->add_option("--neg-cap", cfg.neg_cap, "max negative candidates (0 = unlimited)")
        ->capture_default_str();
    cmd->add_option("--mode", cfg.mode, "evaluation mode: random | crosslayer")
        ->capture_default_str();
    cmd->add_option("--threads", cfg.threads, "worker thread cap")->capture_default_str();
    cmd->add_option("--out", cfg.out, "output file ('-' = stdout)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiplex link prediction: scorers, evaluation, coefficient sweeps"};
    app.require_subcommand(1);

    ml::RunConfig cfg;
    std::string config_path;

    CLI::App* validate = app.add_subcommand("validate", "parse a dataset and print layer summaries");
    add_common_options(validate, cfg, config_path);

    CLI::App* evaluate = app.add_subcommand("evaluate", "score methods under the holdout protocol");
    add_common_options(evaluate, cfg, config_path);
    add_protocol_options(evaluate, cfg);
    evaluate->add_option("--method", cfg.methods, "methods: aa,cn,jc,pa,katz,maa,random")
        ->delimiter(',');
    evaluate->add_option("--eta", cfg.eta, "maa layer weights (default: uniform)")->delimiter(',');
    evaluate
        ->add_option("--baseline-layer", cfg.baseline_layer,
                     "layer for single-layer scorers: aggregate | target | <name>")
        ->capture_default_str();
    evaluate->add_option("--katz-beta", cfg.katz_beta, "katz attenuation")->capture_default_str();
    evaluate->add_option("--katz-max-len", cfg.katz_max_len, "katz max path length (truncated)")
        ->capture_default_str();
    evaluate->add_option("--katz-mode", cfg.katz_mode, "katz mode: truncated | exact")
        ->capture_default_str();

    CLI::App* sweep = app.add_subcommand("sweep", "grid-search maa layer weights");
    add_common_options(sweep, cfg, config_path);
    add_protocol_options(sweep, cfg);
    sweep->add_option("--method", cfg.methods, "must be maa")->delimiter(',');
    sweep->add_option("--step", cfg.step, "simplex grid step (1/k)")->capture_default_str();
    sweep->add_option("--objective", cfg.objective, "argmax objective: auc | precision")
        ->capture_default_str();
    sweep
        ->add_option("--validation-fraction", cfg.validation_fraction,
                     "tune eta on separate splits with this holdout fraction (0 = in-sample)")
        ->capture_default_str();
    sweep->add_option("--index-cache", cfg.index_cache,
                      "triad-index CSV cache (crosslayer mode); rebuilt when missing or stale");
    sweep->add_option("--coordinates", cfg.coordinates, "grid CSV coordinates: auto | raw | barycentric")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nrun with --help for usage\n";
        return 2;
    }

    try {
        cfg.reps_given = evaluate->count("--reps") > 0 || sweep->count("--reps") > 0;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw UsageError("config: cannot open " + config_path);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw UsageError("config: invalid JSON in " + config_path + ": " + e.what());
            }
            cfg.apply_json(j);
        }

        if (validate->parsed()) {
            if (cfg.dataset.empty()) throw UsageError("--dataset is required");
            return cmd_validate(cfg);
        }
        cfg.validate();
        if (evaluate->parsed()) return cmd_evaluate(cfg);
        return cmd_sweep(cfg);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 1;
    }
}
