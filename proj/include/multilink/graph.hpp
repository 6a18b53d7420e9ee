#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

// Immutable multiplex graph model: L undirected layers over one shared,
// dense node index. Construction canonicalizes the edge set; afterwards a
// network is read-only and safe to share across threads.

namespace multilink {

using NodeId = std::uint32_t;
using LayerId = std::uint32_t;

// Unordered node pair, stored with first < second.
using Edge = std::pair<NodeId, NodeId>;

inline Edge make_edge(NodeId a, NodeId b) {
    return a < b ? Edge{a, b} : Edge{b, a};
}

inline std::uint64_t edge_key(NodeId u, NodeId v) {
    const Edge e = make_edge(u, v);
    return (static_cast<std::uint64_t>(e.first) << 32) | e.second;
}

inline std::uint64_t edge_key(const Edge& e) { return edge_key(e.first, e.second); }

// One undirected simple layer: sorted neighbor lists, no self loops, no
// duplicate edges. avg_degree is taken over active nodes (degree >= 1), so
// it is >= 1 whenever the layer has an edge.
class Layer {
public:
    Layer() = default;

    Layer(std::size_t n_nodes, std::span<const Edge> edges) : adj_(n_nodes) {
        for (const Edge& e : edges) {
            if (e.first == e.second) continue;
            if (e.first >= n_nodes || e.second >= n_nodes)
                throw std::out_of_range("Layer: edge endpoint out of range");
            adj_[e.first].push_back(e.second);
            adj_[e.second].push_back(e.first);
        }
        std::size_t degree_sum = 0;
        for (auto& list : adj_) {
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
            list.shrink_to_fit();
            if (!list.empty()) ++active_nodes_;
            degree_sum += list.size();
        }
        edge_count_ = degree_sum / 2;
        avg_degree_ = active_nodes_ > 0
                          ? static_cast<double>(degree_sum) / static_cast<double>(active_nodes_)
                          : 0.0;
    }

    std::size_t n_nodes() const { return adj_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    std::size_t active_nodes() const { return active_nodes_; }
    double avg_degree() const { return avg_degree_; }

    std::size_t degree(NodeId u) const { return adj_.at(u).size(); }

    std::span<const NodeId> neighbors(NodeId u) const {
        const auto& list = adj_.at(u);
        return {list.data(), list.size()};
    }

    bool has_edge(NodeId u, NodeId v) const {
        const auto& list = adj_.at(u);
        return std::binary_search(list.begin(), list.end(), v);
    }

    // Canonical (u < v) edges in ascending order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (NodeId u = 0; u < adj_.size(); ++u)
            for (NodeId v : adj_[u])
                if (u < v) out.emplace_back(u, v);
        return out;
    }

private:
    std::vector<std::vector<NodeId>> adj_;
    std::size_t edge_count_ = 0;
    std::size_t active_nodes_ = 0;
    double avg_degree_ = 0.0;
};

class MultiplexNetwork {
public:
    MultiplexNetwork(std::vector<Layer> layers, std::vector<std::string> node_labels,
                     std::vector<std::string> layer_names)
        : layers_(std::move(layers)),
          node_labels_(std::move(node_labels)),
          layer_names_(std::move(layer_names)) {
        if (layers_.empty()) throw std::invalid_argument("MultiplexNetwork: no layers");
        if (layer_names_.size() != layers_.size())
            throw std::invalid_argument("MultiplexNetwork: layer name count mismatch");
        for (const Layer& l : layers_)
            if (l.n_nodes() != node_labels_.size())
                throw std::invalid_argument("MultiplexNetwork: layers disagree on node count");
        for (NodeId u = 0; u < node_labels_.size(); ++u)
            node_index_.emplace(node_labels_[u], u);
        for (LayerId a = 0; a < layer_names_.size(); ++a)
            if (!layer_index_.emplace(layer_names_[a], a).second)
                throw std::invalid_argument("MultiplexNetwork: duplicate layer name");
    }

    std::size_t n_nodes() const { return node_labels_.size(); }
    std::size_t n_layers() const { return layers_.size(); }

    const Layer& layer(LayerId a) const {
        if (a >= layers_.size()) throw std::out_of_range("layer id out of range");
        return layers_[a];
    }
    const std::vector<Layer>& layers() const { return layers_; }

    const std::string& node_label(NodeId u) const { return node_labels_.at(u); }
    const std::string& layer_name(LayerId a) const { return layer_names_.at(a); }
    const std::vector<std::string>& node_labels() const { return node_labels_; }
    const std::vector<std::string>& layer_names() const { return layer_names_; }

    std::optional<NodeId> node_id(std::string_view label) const {
        auto it = node_index_.find(std::string(label));
        if (it == node_index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<LayerId> layer_id(std::string_view name) const {
        auto it = layer_index_.find(std::string(name));
        if (it == layer_index_.end()) return std::nullopt;
        return it->second;
    }

    // Copy of the network with one layer replaced; used by holdout splits.
    MultiplexNetwork with_layer(LayerId a, Layer replacement) const {
        if (a >= layers_.size()) throw std::out_of_range("layer id out of range");
        if (replacement.n_nodes() != n_nodes())
            throw std::invalid_argument("with_layer: node count mismatch");
        std::vector<Layer> ls = layers_;
        ls[a] = std::move(replacement);
        return MultiplexNetwork(std::move(ls), node_labels_, layer_names_);
    }

private:
    std::vector<Layer> layers_;
    std::vector<std::string> node_labels_;
    std::vector<std::string> layer_names_;
    std::unordered_map<std::string, NodeId> node_index_;
    std::unordered_map<std::string, LayerId> layer_index_;
};

// Union of the selected layers' edge sets (all layers when subset is empty).
inline Layer aggregate(const MultiplexNetwork& net, std::span<const LayerId> subset) {
    if (subset.empty()) throw std::invalid_argument("aggregate: empty layer subset");
    std::vector<Edge> edges;
    for (LayerId a : subset) {
        if (a >= net.n_layers()) throw std::out_of_range("aggregate: layer id out of range");
        const auto le = net.layer(a).edges();
        edges.insert(edges.end(), le.begin(), le.end());
    }
    return Layer(net.n_nodes(), edges);
}

inline Layer aggregate(const MultiplexNetwork& net) {
    std::vector<LayerId> all(net.n_layers());
    for (LayerId a = 0; a < net.n_layers(); ++a) all[a] = a;
    return aggregate(net, all);
}

inline std::size_t degree(const MultiplexNetwork& net, NodeId u, LayerId a) {
    if (u >= net.n_nodes()) throw std::out_of_range("node id out of range");
    return net.layer(a).degree(u);
}

inline double avg_degree(const MultiplexNetwork& net, LayerId a) {
    return net.layer(a).avg_degree();
}

inline std::span<const NodeId> neighbors(const MultiplexNetwork& net, NodeId u, LayerId a) {
    if (u >= net.n_nodes()) throw std::out_of_range("node id out of range");
    return net.layer(a).neighbors(u);
}

}  // namespace multilink
