#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "multilink/evaluation.hpp"
#include "multilink/scorers.hpp"
#include "multilink/sweep.hpp"

// Everything a batch run needs, in one serializable bundle: a run is
// reproducible from its RunConfig alone. JSON keys match the long CLI flags;
// values from a config file override flag values.

namespace multilink {

struct RunConfig {
    std::string dataset;
    std::vector<std::string> layers;     // layer selection; empty keeps all
    std::string layer_names;             // optional sidecar file with display names
    std::string target_layer;            // layer name, or numeric id as text
    std::vector<std::string> methods;    // evaluate; empty = aa,cn,jc,pa,katz,maa
    std::vector<double> eta;             // maa weights; empty = uniform
    std::string baseline_layer = "aggregate";  // aggregate | target | <layer name>
    double step = 0.01;
    double fraction = 0.2;
    unsigned reps = 100;
    std::uint64_t seed = 0;
    std::uint64_t neg_cap = kDefaultNegativeCap;
    std::string mode = "random";         // random | crosslayer
    std::string objective = "auc";       // auc | precision
    std::string out;
    unsigned threads = 1;
    double validation_fraction = 0.0;    // sweep: > 0 tunes eta on separate splits
    double katz_beta = 0.005;
    unsigned katz_max_len = 5;
    std::string katz_mode = "truncated";  // truncated | exact
    std::string index_cache;              // optional triad-index CSV cache
    std::string coordinates = "auto";     // grid export: auto | raw | barycentric

    // set only through the CLI layer; excluded from serialization
    bool reps_given = false;

    void validate() const {
        if (dataset.empty()) throw std::invalid_argument("config: dataset is required");
        if (!(fraction > 0.0) || !(fraction < 1.0))
            throw std::invalid_argument("config: fraction must be in (0, 1)");
        if (validation_fraction != 0.0 && (!(validation_fraction > 0.0) || !(validation_fraction < 1.0)))
            throw std::invalid_argument("config: validation_fraction must be in (0, 1)");
        if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("config: step must be in (0, 1]");
        if (reps == 0) throw std::invalid_argument("config: reps must be >= 1");
        if (threads == 0) throw std::invalid_argument("config: threads must be >= 1");
        parse_eval_mode(mode);
        parse_sweep_objective(objective);
        if (katz_mode != "truncated" && katz_mode != "exact")
            throw std::invalid_argument("config: katz_mode must be truncated or exact");
        if (katz_max_len < 2) throw std::invalid_argument("config: katz_max_len must be >= 2");
        if (!(katz_beta > 0.0)) throw std::invalid_argument("config: katz_beta must be > 0");
        if (coordinates != "auto" && coordinates != "raw" && coordinates != "barycentric")
            throw std::invalid_argument("config: coordinates must be auto, raw, or barycentric");
        for (const std::string& m : methods) parse_method(m);
    }

    EvalProtocol protocol() const {
        EvalProtocol p;
        p.mode = parse_eval_mode(mode);
        p.fraction = fraction;
        p.repetitions = reps;
        p.seed = seed;
        p.neg_cap = static_cast<std::size_t>(neg_cap);
        p.threads = threads;
        return p;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["dataset"] = dataset;
        j["layers"] = layers;
        j["layer_names"] = layer_names;
        j["target_layer"] = target_layer;
        j["methods"] = methods;
        j["eta"] = eta;
        j["baseline_layer"] = baseline_layer;
        j["step"] = step;
        j["fraction"] = fraction;
        j["reps"] = reps;
        j["seed"] = seed;
        j["neg_cap"] = neg_cap;
        j["mode"] = mode;
        j["objective"] = objective;
        j["out"] = out;
        j["threads"] = threads;
        j["validation_fraction"] = validation_fraction;
        j["katz_beta"] = katz_beta;
        j["katz_max_len"] = katz_max_len;
        j["katz_mode"] = katz_mode;
        j["index_cache"] = index_cache;
        j["coordinates"] = coordinates;
        return j;
    }

    // Overlays values from a parsed config file; unknown keys are rejected so
    // typos fail loudly instead of silently running the wrong experiment.
    void apply_json(const nlohmann::json& j) {
        if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            try {
                if (key == "dataset")
                    dataset = value.get<std::string>();
                else if (key == "layers")
                    layers = value.get<std::vector<std::string>>();
                else if (key == "layer_names")
                    layer_names = value.get<std::string>();
                else if (key == "target_layer") {
                    if (value.is_number_unsigned())
                        target_layer = std::to_string(value.get<std::uint64_t>());
                    else if (value.is_number_integer())
                        target_layer = std::to_string(value.get<std::int64_t>());
                    else
                        target_layer = value.get<std::string>();
                }
                else if (key == "methods")
                    methods = value.get<std::vector<std::string>>();
                else if (key == "eta")
                    eta = value.get<std::vector<double>>();
                else if (key == "baseline_layer")
                    baseline_layer = value.get<std::string>();
                else if (key == "step")
                    step = value.get<double>();
                else if (key == "fraction")
                    fraction = value.get<double>();
                else if (key == "reps") {
                    reps = value.get<unsigned>();
                    reps_given = true;
                } else if (key == "seed")
                    seed = value.get<std::uint64_t>();
                else if (key == "neg_cap")
                    neg_cap = value.get<std::uint64_t>();
                else if (key == "mode")
                    mode = value.get<std::string>();
                else if (key == "objective")
                    objective = value.get<std::string>();
                else if (key == "out")
                    out = value.get<std::string>();
                else if (key == "threads")
                    threads = value.get<unsigned>();
                else if (key == "validation_fraction")
                    validation_fraction = value.get<double>();
                else if (key == "katz_beta")
                    katz_beta = value.get<double>();
                else if (key == "katz_max_len")
                    katz_max_len = value.get<unsigned>();
                else if (key == "katz_mode")
                    katz_mode = value.get<std::string>();
                else if (key == "index_cache")
                    index_cache = value.get<std::string>();
                else if (key == "coordinates")
                    coordinates = value.get<std::string>();
                else
                    throw std::invalid_argument("config: unknown key '" + key + "'");
            } catch (const nlohmann::json::exception&) {
                throw std::invalid_argument("config: bad value type for key '" + key + "'");
            }
        }
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig cfg;
        cfg.apply_json(j);
        return cfg;
    }
};

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: invalid JSON in " + path + ": " + e.what());
    }
    return RunConfig::from_json(j);
}

}  // namespace multilink
