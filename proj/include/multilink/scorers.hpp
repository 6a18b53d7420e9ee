#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "multilink/graph.hpp"
#include "multilink/rng.hpp"
#include "multilink/triads.hpp"

// Link scorers. All of them are symmetric, deterministic functions of an
// immutable layer (or triad index), and all but exact Katz are nonnegative
// by construction.

namespace multilink {

// Layer weights eta for a fixed prediction layer: a point on the simplex
// (entries in [0, 1], summing to 1 within kSimplexTol).
struct CoefficientVector {
    std::vector<double> eta;

    static constexpr double kSimplexTol = 1e-9;

    bool on_simplex() const {
        double sum = 0.0;
        for (double e : eta) {
            if (e < 0.0 || e > 1.0) return false;
            sum += e;
        }
        return std::abs(sum - 1.0) <= kSimplexTol;
    }

    static CoefficientVector one_hot(std::size_t n_layers, std::size_t which) {
        CoefficientVector cv;
        cv.eta.assign(n_layers, 0.0);
        cv.eta.at(which) = 1.0;
        return cv;
    }

    static CoefficientVector uniform(std::size_t n_layers) {
        CoefficientVector cv;
        cv.eta.assign(n_layers, 1.0 / static_cast<double>(n_layers));
        return cv;
    }
};

struct ScoredPair {
    NodeId u = 0;
    NodeId v = 0;
    double score = 0.0;
};

namespace detail {

inline void check_distinct(NodeId u, NodeId v, const char* fn) {
    if (u == v) throw std::invalid_argument(std::string(fn) + ": u == v");
}

inline std::size_t common_neighbors(const Layer& layer, NodeId u, NodeId v) {
    const auto nu = layer.neighbors(u);
    const auto nv = layer.neighbors(v);
    std::size_t count = 0, i = 0, j = 0;
    while (i < nu.size() && j < nv.size()) {
        if (nu[i] < nv[j])
            ++i;
        else if (nv[j] < nu[i])
            ++j;
        else
            ++count, ++i, ++j;
    }
    return count;
}

}  // namespace detail

// Sum of 1/ln(k_w) over common neighbors w; a common neighbor always has
// degree >= 2 in its own layer, so the weight is never singular.
inline double aa_score(const Layer& layer, NodeId u, NodeId v) {
    detail::check_distinct(u, v, "aa_score");
    const auto nu = layer.neighbors(u);
    const auto nv = layer.neighbors(v);
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < nu.size() && j < nv.size()) {
        if (nu[i] < nv[j])
            ++i;
        else if (nv[j] < nu[i])
            ++j;
        else {
            sum += 1.0 / std::log(static_cast<double>(layer.degree(nu[i])));
            ++i, ++j;
        }
    }
    return sum;
}

inline double cn_score(const Layer& layer, NodeId u, NodeId v) {
    detail::check_distinct(u, v, "cn_score");
    return static_cast<double>(detail::common_neighbors(layer, u, v));
}

// Neighbor sets are used verbatim (they may contain the other endpoint);
// 0/0 is defined as 0.
inline double jc_score(const Layer& layer, NodeId u, NodeId v) {
    detail::check_distinct(u, v, "jc_score");
    const std::size_t inter = detail::common_neighbors(layer, u, v);
    const std::size_t uni = layer.degree(u) + layer.degree(v) - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double pa_score(const Layer& layer, NodeId u, NodeId v) {
    detail::check_distinct(u, v, "pa_score");
    return static_cast<double>(layer.degree(u)) * static_cast<double>(layer.degree(v));
}

// ---- Katz ------------------------------------------------------------

enum class KatzMode { truncated, exact };

// Dense symmetric table of Katz scores for all node pairs of one layer.
class KatzScores {
public:
    KatzScores() = default;
    explicit KatzScores(std::size_t n) : n_(n), tri_(n * (n + 1) / 2, 0.0) {}

    std::size_t n_nodes() const { return n_; }

    double score(NodeId u, NodeId v) const {
        detail::check_distinct(u, v, "KatzScores::score");
        return tri_[slot(u, v)];
    }

    double& slot_ref(NodeId u, NodeId v) { return tri_[slot(u, v)]; }

private:
    std::size_t slot(NodeId u, NodeId v) const {
        const Edge e = make_edge(u, v);
        if (e.second >= n_) throw std::out_of_range("KatzScores: node id out of range");
        // row-major upper triangle including the diagonal
        const std::size_t r = e.first, c = e.second;
        return r * n_ - r * (r + 1) / 2 + c;
    }

    std::size_t n_ = 0;
    std::vector<double> tri_;
};

// Largest adjacency eigenvalue by power iteration from the all-ones vector.
// Iterates the shifted operator A + I so bipartite layers, whose +/- lambda
// eigenvalue pair defeats plain power iteration, still converge.
inline double spectral_radius(const Layer& layer, std::size_t max_iter = 1000, double tol = 1e-12) {
    const std::size_t n = layer.n_nodes();
    if (layer.edge_count() == 0) return 0.0;
    std::vector<double> x(n, 1.0), y(n, 0.0);
    double shifted = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        for (NodeId u = 0; u < n; ++u) {
            double sum = x[u];
            for (NodeId w : layer.neighbors(u)) sum += x[w];
            y[u] = sum;
        }
        double norm = 0.0;
        for (double v : y) norm = std::max(norm, std::abs(v));
        if (norm == 0.0) return 0.0;
        for (double& v : y) v /= norm;
        // Rayleigh quotient of A + I on the normalized iterate
        double num = 0.0, den = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            double sum = y[u];
            for (NodeId w : layer.neighbors(u)) sum += y[w];
            num += y[u] * sum;
            den += y[u] * y[u];
        }
        const double next = den == 0.0 ? 0.0 : num / den;
        const bool converged = std::abs(next - shifted) <= tol * std::max(1.0, std::abs(next));
        shifted = next;
        x.swap(y);
        if (converged) break;
    }
    return std::max(shifted - 1.0, 0.0);
}

namespace detail {

// Gauss-Jordan inverse with partial pivoting; fine for the small graphs the
// exact Katz mode is meant for.
inline std::vector<double> invert_dense(std::vector<double> m, std::size_t n) {
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r * n + col]) > std::abs(m[pivot * n + col])) pivot = r;
        if (m[pivot * n + col] == 0.0)
            throw std::runtime_error("katz_scores: singular system (beta too close to 1/lambda_max)");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(m[pivot * n + c], m[col * n + c]);
                std::swap(inv[pivot * n + c], inv[col * n + c]);
            }
        }
        const double d = m[col * n + col];
        for (std::size_t c = 0; c < n; ++c) {
            m[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = m[r * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                m[r * n + c] -= f * m[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    return inv;
}

}  // namespace detail

// Path-based score over one layer.
//
// truncated: sum over path lengths l = 2..max_len of beta^l * (#paths of
// length l between u and v), by per-source sparse propagation. Valid for any
// beta > 0.
//
// exact: the full resolvent series (I - beta*A)^-1 - I - beta*A, which
// requires beta < 1/lambda_max and a dense O(n^3) solve; intended for small
// graphs and for validating the truncated mode.
inline KatzScores katz_scores(const Layer& layer, double beta, unsigned max_len,
                              KatzMode mode = KatzMode::truncated) {
    if (beta <= 0.0) throw std::invalid_argument("katz_scores: beta must be > 0");
    if (max_len < 2) throw std::invalid_argument("katz_scores: max_len must be >= 2");
    const std::size_t n = layer.n_nodes();
    KatzScores table(n);

    if (mode == KatzMode::truncated) {
        // walk[v] accumulates beta^l * (#walks u -> v of length l)
        std::vector<double> walk(n), next(n);
        for (NodeId u = 0; u < n; ++u) {
            if (layer.degree(u) == 0) continue;
            std::fill(walk.begin(), walk.end(), 0.0);
            walk[u] = 1.0;
            for (unsigned len = 1; len <= max_len; ++len) {
                std::fill(next.begin(), next.end(), 0.0);
                for (NodeId a = 0; a < n; ++a) {
                    const double wa = walk[a];
                    if (wa == 0.0) continue;
                    const double contrib = beta * wa;
                    for (NodeId b : layer.neighbors(a)) next[b] += contrib;
                }
                walk.swap(next);
                if (len >= 2)
                    for (NodeId v = u + 1; v < n; ++v)
                        if (walk[v] != 0.0) table.slot_ref(u, v) += walk[v];
            }
        }
        return table;
    }

    const double lambda = spectral_radius(layer);
    if (lambda > 0.0 && beta >= 1.0 / lambda)
        throw std::invalid_argument("katz_scores: exact mode diverges for beta >= 1/lambda_max");

    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : layer.neighbors(u)) m[std::size_t{u} * n + v] -= beta;
    const std::vector<double> resolvent = detail::invert_dense(std::move(m), n);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) {
            const double direct = layer.has_edge(u, v) ? beta : 0.0;
            table.slot_ref(u, v) = resolvent[std::size_t{u} * n + v] - direct;
        }
    return table;
}

// ---- Multiplex Adamic-Adar --------------------------------------------

namespace detail {

// The bilinear form sum_{a,b} eta[a]*eta[b] / sqrt(avg[a]*avg[b]) * s[a][b],
// evaluated over the symmetrized upper triangle in row-major order:
//
//   total = sum_{a<=b} q_ab * c_ab
//   c_aa  = s[a][a] / avg[a]          q_aa = eta[a]^2
//   c_ab  = (s[a][b] + s[b][a]) / sqrt(avg[a]*avg[b])   q_ab = eta[a]*eta[b]
//
// The coefficient sweep precomputes the c_ab per pair and the q_ab per grid
// point and takes the same dot product in the same order, so the two paths
// agree bit for bit. No simplex validation here (test and sweep hook); zero
// eta or zero triad terms are skipped, which leaves empty layers inert.
inline double maa_bilinear(const TriadMatrix& tm, std::span<const double> eta,
                           std::span<const double> avg_degrees) {
    const std::uint32_t L = tm.n_layers();
    double total = 0.0;
    for (LayerId a = 0; a < L; ++a) {
        const double saa = tm(a, a);
        if (saa != 0.0 && eta[a] != 0.0) total += (eta[a] * eta[a]) * (saa / avg_degrees[a]);
        for (LayerId b = a + 1; b < L; ++b) {
            const double s = tm(a, b) + tm(b, a);
            if (s != 0.0 && eta[a] != 0.0 && eta[b] != 0.0)
                total += (eta[a] * eta[b]) * (s / std::sqrt(avg_degrees[a] * avg_degrees[b]));
        }
    }
    return total;
}

}  // namespace detail

inline double maa_score(const TriadMatrix& tm, const CoefficientVector& eta,
                        std::span<const double> avg_degrees) {
    if (eta.eta.size() != tm.n_layers() || avg_degrees.size() != tm.n_layers())
        throw std::invalid_argument("maa_score: dimension mismatch");
    if (!eta.on_simplex()) throw std::invalid_argument("maa_score: eta is not on the simplex");
    for (std::size_t a = 0; a < eta.eta.size(); ++a)
        if (eta.eta[a] > 0.0 && avg_degrees[a] <= 0.0)
            throw std::invalid_argument("maa_score: positive weight on an empty layer");
    return detail::maa_bilinear(tm, eta.eta, avg_degrees);
}

// ---- Scorer spec ---------------------------------------------------------

enum class Method { aa, cn, jc, pa, katz, maa, random };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::aa: return "aa";
        case Method::cn: return "cn";
        case Method::jc: return "jc";
        case Method::pa: return "pa";
        case Method::katz: return "katz";
        case Method::maa: return "maa";
        case Method::random: return "random";
    }
    throw std::logic_error("unknown method");
}

inline Method parse_method(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "aa") return Method::aa;
    if (s == "cn") return Method::cn;
    if (s == "jc") return Method::jc;
    if (s == "pa") return Method::pa;
    if (s == "katz") return Method::katz;
    if (s == "maa") return Method::maa;
    if (s == "random") return Method::random;
    throw std::invalid_argument("unknown method: " + std::string(name));
}

// Which layer a single-layer scorer reads. Baselines default to the
// aggregated network; `target` scores on the prediction layer itself and
// `named` picks any layer by name.
struct LayerSelector {
    enum class Kind { aggregate, target, named };
    Kind kind = Kind::aggregate;
    std::string name;

    static LayerSelector aggregate_all() { return {}; }
    static LayerSelector target() { return {Kind::target, {}}; }
    static LayerSelector named(std::string n) { return {Kind::named, std::move(n)}; }
};

struct ScorerSpec {
    Method method = Method::aa;
    LayerSelector layer;                   // single-layer scorers
    CoefficientVector eta;                 // maa
    double beta = 0.005;                   // katz
    unsigned max_len = 5;                  // katz
    KatzMode katz_mode = KatzMode::truncated;
    std::uint64_t seed = 0;                // random

    // Compact parameter description for CSV/JSON reports.
    std::string params() const {
        switch (method) {
            case Method::katz: {
                std::string p = "beta=" + detail::write_double(beta) + ";max_len=" + std::to_string(max_len);
                p += katz_mode == KatzMode::exact ? ";mode=exact" : ";mode=truncated";
                return p;
            }
            case Method::maa: {
                std::string p = "eta=";
                for (std::size_t i = 0; i < eta.eta.size(); ++i) {
                    if (i) p += '|';
                    p += detail::write_double(eta.eta[i]);
                }
                return p;
            }
            case Method::random: return "seed=" + std::to_string(seed);
            default: break;
        }
        switch (layer.kind) {
            case LayerSelector::Kind::aggregate: return "layer=aggregate";
            case LayerSelector::Kind::target: return "layer=target";
            case LayerSelector::Kind::named: return "layer=" + layer.name;
        }
        return {};
    }
};

// Deterministic, symmetric per-pair uniform score for the null model.
inline double random_pair_score(NodeId u, NodeId v, std::uint64_t seed) {
    return bits_to_unit(mix64(seed ^ mix64(edge_key(u, v))));
}

namespace detail {

inline const Layer& resolve_layer(const LayerSelector& sel, const MultiplexNetwork& net,
                                  LayerId target, Layer& scratch) {
    switch (sel.kind) {
        case LayerSelector::Kind::target: return net.layer(target);
        case LayerSelector::Kind::named: {
            const auto id = net.layer_id(sel.name);
            if (!id) throw std::invalid_argument("unknown layer: " + sel.name);
            return net.layer(*id);
        }
        case LayerSelector::Kind::aggregate: break;
    }
    scratch = aggregate(net);
    return scratch;
}

}  // namespace detail

// Scores every candidate pair; output order is the candidate order. MAA
// requires an index built on the same (training) network covering all
// candidates, and uses the index's layer average degrees.
inline std::vector<ScoredPair> score_all(const ScorerSpec& spec, const MultiplexNetwork& net,
                                         LayerId target, std::span<const Edge> candidates,
                                         const TriadIndex* index = nullptr) {
    if (target >= net.n_layers()) throw std::out_of_range("score_all: target layer out of range");
    std::vector<ScoredPair> out;
    out.reserve(candidates.size());

    if (spec.method == Method::maa) {
        if (!index) throw std::invalid_argument("score_all: maa requires a triad index");
        const auto avg = index->layer_avg_degrees();
        if (!spec.eta.on_simplex())
            throw std::invalid_argument("score_all: eta is not on the simplex");
        for (std::size_t a = 0; a < spec.eta.eta.size(); ++a)
            if (spec.eta.eta[a] > 0.0 && avg[a] <= 0.0)
                throw std::invalid_argument("score_all: positive weight on an empty layer");
        for (const Edge& c : candidates)
            out.push_back({c.first, c.second,
                           detail::maa_bilinear(index->at(c.first, c.second), spec.eta.eta, avg)});
        return out;
    }

    if (spec.method == Method::random) {
        for (const Edge& c : candidates)
            out.push_back({c.first, c.second, random_pair_score(c.first, c.second, spec.seed)});
        return out;
    }

    Layer scratch;
    const Layer& layer = detail::resolve_layer(spec.layer, net, target, scratch);

    if (spec.method == Method::katz) {
        const KatzScores table = katz_scores(layer, spec.beta, spec.max_len, spec.katz_mode);
        for (const Edge& c : candidates)
            out.push_back({c.first, c.second, table.score(c.first, c.second)});
        return out;
    }

    double (*fn)(const Layer&, NodeId, NodeId) = nullptr;
    switch (spec.method) {
        case Method::aa: fn = aa_score; break;
        case Method::cn: fn = cn_score; break;
        case Method::jc: fn = jc_score; break;
        case Method::pa: fn = pa_score; break;
        default: throw std::logic_error("score_all: unhandled method");
    }
    for (const Edge& c : candidates) out.push_back({c.first, c.second, fn(layer, c.first, c.second)});
    return out;
}

}  // namespace multilink
