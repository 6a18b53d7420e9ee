#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "multilink/graph.hpp"

// Reader/writer for the whitespace-separated multiplex edge-list format
//
//   layerLabel nodeLabel nodeLabel [weight]
//
// as used by the public multiplex network repositories. '#'-prefixed comment
// lines and blank lines are skipped; the optional weight must be numeric and
// is discarded (all downstream metrics are binary-topology metrics).
// Directed source data is symmetrized, duplicate records are merged, and
// self loops are dropped with a warning.

namespace multilink {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct EdgeListOptions {
    // Keep only these layers, in this order. Entries match either the raw
    // layer label from the file or its sidecar display name. Empty: keep all
    // layers in first-appearance order.
    std::vector<std::string> select_layers;
    // Raw layer label -> display name (from a sidecar file).
    std::unordered_map<std::string, std::string> layer_names;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

inline bool is_numeric(std::string_view s) {
    double value;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    return ec == std::errc() && ptr == end;
}

}  // namespace detail

// Sidecar format: one `layerLabel humanName` record per line. A literal
// `layerID layerLabel` header row (comunelab convention) is skipped.
inline std::unordered_map<std::string, std::string> load_layer_names(std::istream& in) {
    std::unordered_map<std::string, std::string> names;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens[0].front() == '#') continue;
        if (tokens.size() == 2 && tokens[0] == "layerID" && tokens[1] == "layerLabel") continue;
        if (tokens.size() != 2)
            throw ParseError(line_no, "expected `layerLabel humanName`");
        names[std::string(tokens[0])] = std::string(tokens[1]);
    }
    return names;
}

inline std::unordered_map<std::string, std::string> load_layer_names_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open layer-name file: " + path);
    return load_layer_names(in);
}

inline MultiplexNetwork load_multiplex(std::istream& in, const EdgeListOptions& opts = {},
                                       std::vector<std::string>* warnings = nullptr) {
    struct RawLayer {
        std::string label;
        std::vector<Edge> edges;
    };

    const auto display_name = [&](const std::string& raw) {
        auto it = opts.layer_names.find(raw);
        return it != opts.layer_names.end() ? it->second : raw;
    };

    // Selection slot for a raw label, or -1 when the layer is excluded.
    const auto selection_slot = [&](const std::string& raw) -> int {
        if (opts.select_layers.empty()) return 0;
        const std::string display = display_name(raw);
        for (std::size_t i = 0; i < opts.select_layers.size(); ++i)
            if (opts.select_layers[i] == raw || opts.select_layers[i] == display)
                return static_cast<int>(i);
        return -1;
    };

    std::vector<std::string> node_labels;
    std::unordered_map<std::string, NodeId> node_ids;
    const auto intern_node = [&](std::string_view label) {
        auto it = node_ids.find(std::string(label));
        if (it != node_ids.end()) return it->second;
        const NodeId id = static_cast<NodeId>(node_labels.size());
        node_labels.emplace_back(label);
        node_ids.emplace(node_labels.back(), id);
        return id;
    };

    std::vector<RawLayer> layers;
    std::unordered_map<std::string, std::size_t> layer_slots;
    std::string line;
    std::size_t line_no = 0;
    std::size_t self_loops = 0;

    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens[0].front() == '#') continue;
        if (tokens.size() < 3 || tokens.size() > 4)
            throw ParseError(line_no, "expected `layer src dst [weight]`, got " +
                                          std::to_string(tokens.size()) + " tokens");
        if (tokens.size() == 4 && !detail::is_numeric(tokens[3]))
            throw ParseError(line_no, "weight is not numeric: " + std::string(tokens[3]));

        const std::string raw_label(tokens[0]);
        if (selection_slot(raw_label) < 0) continue;

        auto [it, inserted] = layer_slots.emplace(raw_label, layers.size());
        if (inserted) layers.push_back(RawLayer{raw_label, {}});
        RawLayer& layer = layers[it->second];

        const NodeId u = intern_node(tokens[1]);
        const NodeId v = intern_node(tokens[2]);
        if (u == v) {
            ++self_loops;
            if (warnings)
                warnings->push_back("line " + std::to_string(line_no) + ": self loop on node '" +
                                    std::string(tokens[1]) + "' dropped");
            continue;
        }
        layer.edges.push_back(make_edge(u, v));
    }

    if (layers.empty())
        throw std::runtime_error(line_no == 0 ? "empty input" : "input contains no edge records");

    // Selected order when a selection was given, first-appearance order otherwise.
    if (!opts.select_layers.empty()) {
        std::vector<RawLayer> ordered(opts.select_layers.size());
        std::vector<bool> seen(opts.select_layers.size(), false);
        for (RawLayer& layer : layers) {
            const int slot = selection_slot(layer.label);
            if (seen[slot])
                throw std::runtime_error("layer selection '" + opts.select_layers[slot] +
                                         "' matches more than one layer");
            seen[slot] = true;
            ordered[slot] = std::move(layer);
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i])
                throw std::runtime_error("selected layer not found: " + opts.select_layers[i]);
        layers = std::move(ordered);
    }

    const std::size_t n_nodes = node_labels.size();
    std::vector<Layer> built;
    std::vector<std::string> names;
    built.reserve(layers.size());
    for (const RawLayer& layer : layers) {
        built.emplace_back(n_nodes, layer.edges);
        names.push_back(display_name(layer.label));
    }
    return MultiplexNetwork(std::move(built), std::move(node_labels), std::move(names));
}

inline MultiplexNetwork load_multiplex_file(const std::string& path, const EdgeListOptions& opts = {},
                                            std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    return load_multiplex(in, opts, warnings);
}

// Serializes back to the edge-list format; reloading yields an identical
// adjacency structure.
inline void write_multiplex(std::ostream& out, const MultiplexNetwork& net) {
    for (LayerId a = 0; a < net.n_layers(); ++a)
        for (const Edge& e : net.layer(a).edges())
            out << net.layer_name(a) << ' ' << net.node_label(e.first) << ' '
                << net.node_label(e.second) << '\n';
}

}  // namespace multilink
