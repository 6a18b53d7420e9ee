#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "multilink/graph.hpp"

// Cross-layer triadic closure. For a node pair (u, v) and layers (a, b) the
// member set is every third node w adjacent to u in layer a and to v in
// layer b. The per-pair TriadMatrix stores, for every ordered layer pair,
// the sum over members of 1/sqrt(ln k_w^a * ln k_w^b); those sums only
// depend on the training graph, so a coefficient sweep can re-score a pair
// in O(L^2) without touching adjacency lists again.

namespace multilink {

// {w : w in neighbors(u, a), w in neighbors(v, b), w not in {u, v}}, sorted.
inline std::vector<NodeId> triad_members(const MultiplexNetwork& net, NodeId u, NodeId v,
                                         LayerId a, LayerId b) {
    if (u == v) throw std::invalid_argument("triad_members: u == v");
    const auto nu = neighbors(net, u, a);
    const auto nv = neighbors(net, v, b);
    std::vector<NodeId> out;
    std::size_t i = 0, j = 0;
    while (i < nu.size() && j < nv.size()) {
        if (nu[i] < nv[j]) {
            ++i;
        } else if (nv[j] < nu[i]) {
            ++j;
        } else {
            if (nu[i] != u && nu[i] != v) out.push_back(nu[i]);
            ++i;
            ++j;
        }
    }
    return out;
}

class TriadMatrix {
public:
    TriadMatrix() = default;
    TriadMatrix(NodeId u, NodeId v, std::uint32_t n_layers)
        : u_(u), v_(v), n_layers_(n_layers), s_(std::size_t{n_layers} * n_layers, 0.0) {}

    NodeId u() const { return u_; }
    NodeId v() const { return v_; }
    std::uint32_t n_layers() const { return n_layers_; }

    double operator()(LayerId a, LayerId b) const { return s_[std::size_t{a} * n_layers_ + b]; }
    double& entry(LayerId a, LayerId b) { return s_[std::size_t{a} * n_layers_ + b]; }

    bool all_zero() const {
        for (double x : s_)
            if (x != 0.0) return false;
        return true;
    }

private:
    NodeId u_ = 0;
    NodeId v_ = 0;
    std::uint32_t n_layers_ = 0;
    std::vector<double> s_;
};

namespace detail {

// ln(degree) per node per layer, with 0 marking degrees < 2. A contribution
// involving such a node is skipped: ln(1) = 0 would make the weight singular,
// and a degree-0 node closes no triad anyway.
inline std::vector<std::vector<double>> log_degree_table(const MultiplexNetwork& net) {
    std::vector<std::vector<double>> table(net.n_layers());
    for (LayerId a = 0; a < net.n_layers(); ++a) {
        table[a].resize(net.n_nodes());
        const Layer& layer = net.layer(a);
        for (NodeId w = 0; w < net.n_nodes(); ++w) {
            const std::size_t k = layer.degree(w);
            table[a][w] = k >= 2 ? std::log(static_cast<double>(k)) : 0.0;
        }
    }
    return table;
}

inline TriadMatrix triad_matrix_with(const MultiplexNetwork& net,
                                     const std::vector<std::vector<double>>& log_deg, NodeId u,
                                     NodeId v) {
    if (u == v) throw std::invalid_argument("triad_matrix: u == v");
    const auto L = static_cast<std::uint32_t>(net.n_layers());
    TriadMatrix tm(u, v, L);
    for (LayerId a = 0; a < L; ++a) {
        const auto nu = neighbors(net, u, a);
        if (nu.empty()) continue;
        for (LayerId b = 0; b < L; ++b) {
            const auto nv = neighbors(net, v, b);
            double sum = 0.0;
            std::size_t i = 0, j = 0;
            while (i < nu.size() && j < nv.size()) {
                if (nu[i] < nv[j]) {
                    ++i;
                } else if (nv[j] < nu[i]) {
                    ++j;
                } else {
                    const NodeId w = nu[i];
                    if (w != u && w != v) {
                        const double la = log_deg[a][w];
                        const double lb = log_deg[b][w];
                        // a == b collapses to 1/ln k_w; computing it directly
                        // keeps the diagonal bit-identical to the plain
                        // Adamic-Adar sum.
                        if (la != 0.0 && lb != 0.0)
                            sum += a == b ? 1.0 / la : 1.0 / std::sqrt(la * lb);
                    }
                    ++i;
                    ++j;
                }
            }
            tm.entry(a, b) = sum;
        }
    }
    return tm;
}

}  // namespace detail

inline TriadMatrix triad_matrix(const MultiplexNetwork& net, NodeId u, NodeId v) {
    return detail::triad_matrix_with(net, detail::log_degree_table(net), u, v);
}

// Immutable store of TriadMatrix entries for a fixed candidate pair set,
// keyed by canonical (u < v) pairs, plus the layer average degrees of the
// network it was built from. Content is deterministic given network + pairs.
class TriadIndex {
public:
    TriadIndex() = default;
    TriadIndex(std::vector<double> layer_avg_degrees, std::vector<TriadMatrix> entries)
        : avg_deg_(std::move(layer_avg_degrees)), entries_(std::move(entries)) {
        keys_.reserve(entries_.size());
        for (const TriadMatrix& tm : entries_) keys_.push_back(edge_key(tm.u(), tm.v()));
        if (!std::is_sorted(keys_.begin(), keys_.end()))
            throw std::invalid_argument("TriadIndex: entries must be sorted by pair");
    }

    std::size_t size() const { return entries_.size(); }
    std::span<const double> layer_avg_degrees() const { return avg_deg_; }
    std::span<const TriadMatrix> entries() const { return entries_; }

    // Lookup is symmetric in (u, v); entries are stored with u < v.
    const TriadMatrix* find(NodeId u, NodeId v) const {
        const std::uint64_t key = edge_key(u, v);
        const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
        if (it == keys_.end() || *it != key) return nullptr;
        return &entries_[static_cast<std::size_t>(it - keys_.begin())];
    }

    const TriadMatrix& at(NodeId u, NodeId v) const {
        const TriadMatrix* tm = find(u, v);
        if (!tm)
            throw std::out_of_range("TriadIndex: no entry for pair (" + std::to_string(u) + ", " +
                                    std::to_string(v) + ")");
        return *tm;
    }

private:
    std::vector<double> avg_deg_;
    std::vector<TriadMatrix> entries_;
    std::vector<std::uint64_t> keys_;
};

// Builds one TriadMatrix per pair. Pairs must be distinct as unordered
// pairs, with u != v; each is stored in canonical (u < v) orientation, so
// the result is independent of input order.
inline TriadIndex build_triad_index(const MultiplexNetwork& net, std::span<const Edge> pairs) {
    std::vector<Edge> canonical;
    canonical.reserve(pairs.size());
    for (const Edge& p : pairs) {
        if (p.first == p.second) throw std::invalid_argument("build_triad_index: u == v");
        canonical.push_back(make_edge(p.first, p.second));
    }
    std::sort(canonical.begin(), canonical.end());
    if (std::adjacent_find(canonical.begin(), canonical.end()) != canonical.end())
        throw std::invalid_argument("build_triad_index: duplicate pair");

    const auto log_deg = detail::log_degree_table(net);
    std::vector<TriadMatrix> entries;
    entries.reserve(canonical.size());
    for (const Edge& p : canonical)
        entries.push_back(detail::triad_matrix_with(net, log_deg, p.first, p.second));

    std::vector<double> avg;
    avg.reserve(net.n_layers());
    for (LayerId a = 0; a < net.n_layers(); ++a) avg.push_back(net.layer(a).avg_degree());
    return TriadIndex(std::move(avg), std::move(entries));
}

namespace detail {

// Shortest round-trip decimal form, for lossless and deterministic output.
inline std::string write_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline void write_double(std::ostream& out, double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    out.write(buf, res.ptr - buf);
}

}  // namespace detail

// CSV cache of an index: a versioned header, the layer average degrees, and
// one `u,v,alpha,beta,s` row per matrix entry. Values are written in
// shortest round-trip form, so save/load is lossless.
inline void save_triad_index_csv(std::ostream& out, const TriadIndex& index) {
    out << "# multilink-triad-index v1 layers=" << index.layer_avg_degrees().size()
        << " pairs=" << index.size() << '\n';
    out << "# avg_degree";
    for (double d : index.layer_avg_degrees()) {
        out << ' ';
        detail::write_double(out, d);
    }
    out << '\n';
    out << "u,v,alpha,beta,s\n";
    for (const TriadMatrix& tm : index.entries()) {
        for (LayerId a = 0; a < tm.n_layers(); ++a)
            for (LayerId b = 0; b < tm.n_layers(); ++b) {
                out << tm.u() << ',' << tm.v() << ',' << a << ',' << b << ',';
                detail::write_double(out, tm(a, b));
                out << '\n';
            }
    }
}

inline TriadIndex load_triad_index_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# multilink-triad-index v1", 0) != 0)
        throw std::runtime_error("triad-index cache: bad or missing version header");
    std::size_t n_layers = 0, n_pairs = 0;
    {
        const auto lpos = line.find("layers=");
        const auto ppos = line.find("pairs=");
        if (lpos == std::string::npos || ppos == std::string::npos)
            throw std::runtime_error("triad-index cache: malformed header");
        n_layers = std::stoul(line.substr(lpos + 7));
        n_pairs = std::stoul(line.substr(ppos + 6));
    }
    if (!std::getline(in, line) || line.rfind("# avg_degree", 0) != 0)
        throw std::runtime_error("triad-index cache: missing avg_degree header");
    std::vector<double> avg;
    {
        std::istringstream ss(line.substr(12));
        double x;
        while (ss >> x) avg.push_back(x);
        if (avg.size() != n_layers)
            throw std::runtime_error("triad-index cache: avg_degree count mismatch");
    }
    if (!std::getline(in, line) || line != "u,v,alpha,beta,s")
        throw std::runtime_error("triad-index cache: missing column header");

    std::vector<TriadMatrix> entries;
    entries.reserve(n_pairs);
    std::size_t row = 3;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::uint64_t u, v, a, b;
        double s;
        char c1, c2, c3, c4;
        std::istringstream ss(line);
        if (!(ss >> u >> c1 >> v >> c2 >> a >> c3 >> b >> c4 >> s) || c1 != ',' || c2 != ',' ||
            c3 != ',' || c4 != ',')
            throw std::runtime_error("triad-index cache: malformed row " + std::to_string(row));
        if (a >= n_layers || b >= n_layers)
            throw std::runtime_error("triad-index cache: layer id out of range at row " +
                                     std::to_string(row));
        if (entries.empty() || entries.back().u() != u || entries.back().v() != v) {
            if (u >= v)
                throw std::runtime_error("triad-index cache: pair not canonical at row " +
                                         std::to_string(row));
            entries.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v),
                                 static_cast<std::uint32_t>(n_layers));
        }
        entries.back().entry(static_cast<LayerId>(a), static_cast<LayerId>(b)) = s;
    }
    if (entries.size() != n_pairs)
        throw std::runtime_error("triad-index cache: pair count mismatch");
    return TriadIndex(std::move(avg), std::move(entries));
}

inline void save_triad_index_csv_file(const std::string& path, const TriadIndex& index) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("triad-index cache: cannot open " + path + " for writing");
    save_triad_index_csv(out, index);
    if (!out) throw std::runtime_error("triad-index cache: failed writing " + path);
}

inline TriadIndex load_triad_index_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("triad-index cache: cannot open " + path);
    return load_triad_index_csv(in);
}

}  // namespace multilink
