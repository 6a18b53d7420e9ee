#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "multilink/graph.hpp"
#include "multilink/rng.hpp"
#include "multilink/scorers.hpp"
#include "multilink/triads.hpp"

// Hold-out evaluation: split generation, tie-aware AUC, analytic AUC bounds
// from the zero-score fractions, and precision at n.

namespace multilink {

// A single train/test partition. `positives` are the held-out true links,
// `negatives` sampled non-links; neither is an edge of train's target layer
// and the two sets are disjoint. Both lists are kept in canonical ascending
// (u, v) order so downstream output is reproducible.
struct EvalSplit {
    MultiplexNetwork train;
    LayerId target_layer = 0;
    std::vector<Edge> positives;
    std::vector<Edge> negatives;
    std::uint64_t seed = 0;
};

namespace detail {

inline void sort_pairs(std::vector<Edge>& pairs) {
    std::sort(pairs.begin(), pairs.end(),
              [](const Edge& a, const Edge& b) { return edge_key(a.first, a.second) < edge_key(b.first, b.second); });
}

// Collects candidate non-links over `nodes`, excluding pairs for which
// `excluded` returns true. When the full pair universe is small the pairs are
// enumerated and (if over the cap) down-sampled; otherwise pairs are
// rejection-sampled directly. cap == 0 means "no cap". Result is sorted.
template <typename ExcludedFn>
std::vector<Edge> collect_negatives(std::span<const NodeId> nodes, ExcludedFn&& excluded,
                                    std::size_t cap, Rng& rng) {
    const std::size_t m = nodes.size();
    const std::size_t total = m < 2 ? 0 : m * (m - 1) / 2;
    constexpr std::size_t kEnumerateLimit = 8'000'000;

    std::vector<Edge> out;
    if (total == 0) return out;

    if (cap == 0 || total <= kEnumerateLimit) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const Edge e = make_edge(nodes[i], nodes[j]);
                if (!excluded(e)) out.push_back(e);
            }
        if (cap != 0 && out.size() > cap) {
            rng.partial_shuffle(out, cap);
            out.resize(cap);
        }
        sort_pairs(out);
        return out;
    }

    // Universe too large to enumerate: sample with rejection. The attempt
    // budget guards against a pathological exclusion set; on exhaustion we
    // fall back to full enumeration, which is always correct.
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(cap * 2);
    std::size_t attempts = 0;
    const std::size_t max_attempts = 40 * cap + 1'000'000;
    while (chosen.size() < cap && attempts < max_attempts) {
        ++attempts;
        const std::size_t i = static_cast<std::size_t>(rng.below(m));
        const std::size_t j = static_cast<std::size_t>(rng.below(m));
        if (i == j) continue;
        const Edge e = make_edge(nodes[i], nodes[j]);
        if (excluded(e)) continue;
        chosen.insert(edge_key(e.first, e.second));
    }
    if (chosen.size() < cap) {
        out.clear();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const Edge e = make_edge(nodes[i], nodes[j]);
                if (!excluded(e)) out.push_back(e);
            }
        if (out.size() > cap) {
            rng.partial_shuffle(out, cap);
            out.resize(cap);
        }
    } else {
        out.reserve(chosen.size());
        for (std::uint64_t key : chosen)
            out.push_back(make_edge(static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu)));
    }
    sort_pairs(out);
    return out;
}

}  // namespace detail

inline constexpr std::size_t kDefaultNegativeCap = 2'000'000;

// Uniformly removes ceil(fraction * E_x) edges of layer x as positives and
// rebuilds the network without them. Negatives are non-links among the nodes
// still active in the trimmed target layer, down-sampled to `neg_cap` when
// larger (neg_cap == 0 disables the cap). Deterministic per seed.
inline EvalSplit split_holdout(const MultiplexNetwork& net, LayerId x, double fraction,
                               std::uint64_t seed, std::size_t neg_cap = kDefaultNegativeCap) {
    if (x >= net.n_layers()) throw std::out_of_range("split_holdout: target layer out of range");
    if (!(fraction > 0.0) || !(fraction < 1.0))
        throw std::invalid_argument("split_holdout: fraction must be in (0, 1)");
    const Layer& target = net.layer(x);
    if (target.edge_count() < 2)
        throw std::invalid_argument("split_holdout: target layer needs at least 2 edges");

    Rng rng(seed);
    std::vector<Edge> edges = target.edges();
    const std::size_t n_remove =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(edges.size())));
    rng.partial_shuffle(edges, n_remove);

    std::vector<Edge> positives(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_remove));
    std::vector<Edge> kept(edges.begin() + static_cast<std::ptrdiff_t>(n_remove), edges.end());
    detail::sort_pairs(positives);

    EvalSplit split{net.with_layer(x, Layer(net.n_nodes(), kept)), x, std::move(positives), {}, seed};
    const Layer& train_target = split.train.layer(x);

    std::vector<NodeId> active;
    for (NodeId u = 0; u < net.n_nodes(); ++u)
        if (train_target.degree(u) > 0) active.push_back(u);

    std::unordered_set<std::uint64_t> positive_keys;
    positive_keys.reserve(split.positives.size() * 2);
    for (const Edge& e : split.positives) positive_keys.insert(edge_key(e.first, e.second));

    split.negatives = detail::collect_negatives(
        active,
        [&](const Edge& e) {
            return train_target.has_edge(e.first, e.second) ||
                   positive_keys.count(edge_key(e.first, e.second)) != 0;
        },
        neg_cap, rng);
    if (split.negatives.empty())
        throw std::runtime_error("split_holdout: no negative candidates (degenerate layer)");
    return split;
}

// Test set for "which links of the other layers does layer x miss":
// positives are pairs linked in some non-x layer but not in x; negatives are
// pairs linked in no layer at all. The network itself is left untouched.
inline EvalSplit cross_layer_testset(const MultiplexNetwork& net, LayerId x,
                                     std::size_t neg_cap = kDefaultNegativeCap,
                                     std::uint64_t seed = 0) {
    if (x >= net.n_layers()) throw std::out_of_range("cross_layer_testset: target layer out of range");
    if (net.n_layers() < 2)
        throw std::invalid_argument("cross_layer_testset: need at least 2 layers");

    const Layer& target = net.layer(x);
    const Layer all = aggregate(net);

    std::vector<Edge> positives;
    for (const Edge& e : all.edges())
        if (!target.has_edge(e.first, e.second)) positives.push_back(e);
    if (positives.empty())
        throw std::runtime_error("cross_layer_testset: no links outside the target layer");
    detail::sort_pairs(positives);

    std::vector<NodeId> nodes(net.n_nodes());
    for (NodeId u = 0; u < net.n_nodes(); ++u) nodes[u] = u;

    Rng rng(seed);
    EvalSplit split{net, x, std::move(positives), {}, seed};
    split.negatives = detail::collect_negatives(
        nodes, [&](const Edge& e) { return all.has_edge(e.first, e.second); }, neg_cap, rng);
    if (split.negatives.empty())
        throw std::runtime_error("cross_layer_testset: no negative candidates");
    return split;
}

// Tie-aware AUC: over all |pos| * |neg| ordered pairs, (wins + 0.5 * ties) /
// (|pos| * |neg|). Sorting plus binary search, but the win/tie counts are
// integers, so the result equals the quadratic definition exactly.
inline double roc_auc(std::span<const double> pos_scores, std::span<const double> neg_scores) {
    if (pos_scores.empty() || neg_scores.empty())
        throw std::invalid_argument("roc_auc: empty score list");
    std::vector<double> neg(neg_scores.begin(), neg_scores.end());
    std::sort(neg.begin(), neg.end());
    std::uint64_t wins = 0, ties = 0;
    for (double p : pos_scores) {
        const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
        const auto hi = std::upper_bound(lo, neg.end(), p);
        wins += static_cast<std::uint64_t>(lo - neg.begin());
        ties += static_cast<std::uint64_t>(hi - lo);
    }
    const double denom = static_cast<double>(pos_scores.size()) * static_cast<double>(neg_scores.size());
    return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) / denom;
}

// Worst/best achievable AUC given the fractions of positives (p1) and
// negatives (p2) that received a nonzero score: the scoreless mass can only
// be ordered by luck, which pins AUC to [auc_min, auc_min + p1*p2].
inline std::pair<double, double> auc_bounds(double p1, double p2) {
    if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0))
        throw std::invalid_argument("auc_bounds: p1, p2 must be in [0, 1]");
    const double auc_min = 0.5 * (1.0 + p1) * (1.0 - p2);
    return {auc_min, auc_min + p1 * p2};
}

namespace detail {

// Ranking order shared by precision and the CSV exports: descending score,
// ties broken by ascending canonical (u, v).
inline bool rank_before(const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    return edge_key(a.u, a.v) < edge_key(b.u, b.v);
}

}  // namespace detail

// Fraction of the top-n ranked pairs that are true positives.
inline double precision_at_n(std::vector<ScoredPair> ranked, std::span<const Edge> positives,
                             std::size_t n) {
    if (n == 0) throw std::invalid_argument("precision_at_n: n must be positive");
    if (n > ranked.size()) throw std::invalid_argument("precision_at_n: n exceeds ranked list");
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end(),
                      detail::rank_before);
    std::unordered_set<std::uint64_t> pos_keys;
    pos_keys.reserve(positives.size() * 2);
    for (const Edge& e : positives) pos_keys.insert(edge_key(e.first, e.second));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (pos_keys.count(edge_key(ranked[i].u, ranked[i].v)) != 0) ++hits;
    return static_cast<double>(hits) / static_cast<double>(n);
}

struct MetricsReport {
    double auc = 0.0;
    double auc_min = 0.0;
    double auc_max = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double precision = 0.0;
    std::size_t n = 0;            // |positives|
    unsigned repetitions = 1;
    std::uint64_t seed = 0;
};

enum class EvalMode { random_holdout, cross_layer };

inline std::string eval_mode_name(EvalMode m) {
    return m == EvalMode::random_holdout ? "random" : "crosslayer";
}

inline EvalMode parse_eval_mode(std::string_view name) {
    if (name == "random") return EvalMode::random_holdout;
    if (name == "crosslayer") return EvalMode::cross_layer;
    throw std::invalid_argument("unknown evaluation mode: " + std::string(name));
}

struct EvalProtocol {
    EvalMode mode = EvalMode::random_holdout;
    double fraction = 0.2;
    unsigned repetitions = 100;
    std::uint64_t seed = 0;
    std::size_t neg_cap = kDefaultNegativeCap;
    unsigned threads = 1;
};

inline EvalSplit make_split(const MultiplexNetwork& net, LayerId target, const EvalProtocol& protocol,
                            std::uint64_t rep_seed) {
    if (protocol.mode == EvalMode::random_holdout)
        return split_holdout(net, target, protocol.fraction, rep_seed, protocol.neg_cap);
    return cross_layer_testset(net, target, protocol.neg_cap, rep_seed);
}

// Metrics of one scorer on one split. p1 and p2 are the fractions of
// positives and negatives with a nonzero score. An MAA triad index covering
// all candidates may be passed in; when absent one is built from the split's
// training network.
inline MetricsReport split_metrics(const ScorerSpec& spec, const EvalSplit& split,
                                   const TriadIndex* index = nullptr) {
    std::optional<TriadIndex> local_index;
    if (spec.method == Method::maa && index == nullptr) {
        std::vector<Edge> all_pairs;
        all_pairs.reserve(split.positives.size() + split.negatives.size());
        all_pairs.insert(all_pairs.end(), split.positives.begin(), split.positives.end());
        all_pairs.insert(all_pairs.end(), split.negatives.begin(), split.negatives.end());
        local_index.emplace(build_triad_index(split.train, all_pairs));
        index = &*local_index;
    }

    const std::vector<ScoredPair> pos =
        score_all(spec, split.train, split.target_layer, split.positives, index);
    const std::vector<ScoredPair> neg =
        score_all(spec, split.train, split.target_layer, split.negatives, index);

    std::vector<double> pos_scores, neg_scores;
    pos_scores.reserve(pos.size());
    neg_scores.reserve(neg.size());
    std::size_t pos_nonzero = 0, neg_nonzero = 0;
    for (const ScoredPair& s : pos) {
        pos_scores.push_back(s.score);
        if (s.score != 0.0) ++pos_nonzero;
    }
    for (const ScoredPair& s : neg) {
        neg_scores.push_back(s.score);
        if (s.score != 0.0) ++neg_nonzero;
    }

    MetricsReport r;
    r.n = pos.size();
    r.seed = split.seed;
    r.p1 = static_cast<double>(pos_nonzero) / static_cast<double>(pos.size());
    r.p2 = static_cast<double>(neg_nonzero) / static_cast<double>(neg.size());
    r.auc = roc_auc(pos_scores, neg_scores);
    // Same formula as auc_bounds, but evaluated from the exact zero/nonzero
    // counts with one division each. Rounding is monotone, so the measured
    // AUC can never land outside the bounds by an ulp, which the closed form
    // on the already-rounded p1/p2 cannot promise.
    const double min_num = static_cast<double>(pos.size() + pos_nonzero) *
                           static_cast<double>(neg.size() - neg_nonzero);
    const double max_num =
        min_num + 2.0 * static_cast<double>(pos_nonzero) * static_cast<double>(neg_nonzero);
    const double denom =
        2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size());
    r.auc_min = min_num / denom;
    r.auc_max = max_num / denom;

    std::vector<ScoredPair> ranked;
    ranked.reserve(pos.size() + neg.size());
    ranked.insert(ranked.end(), pos.begin(), pos.end());
    ranked.insert(ranked.end(), neg.begin(), neg.end());
    r.precision = precision_at_n(std::move(ranked), split.positives, split.positives.size());
    return r;
}

namespace detail {

// The null-model scorer must draw fresh values each repetition; everything
// else is a deterministic function of the split.
inline ScorerSpec spec_for_repetition(const ScorerSpec& spec, std::uint64_t rep_seed) {
    ScorerSpec s = spec;
    if (s.method == Method::random) s.seed = mix64(spec.seed ^ mix64(rep_seed + 1));
    return s;
}

}  // namespace detail

// One MetricsReport per repetition; repetition i uses seed protocol.seed + i.
// Repetitions are independent, so they are spread across `protocol.threads`
// workers; each writes only its own slot, keeping results order-stable.
inline std::vector<MetricsReport> evaluate_per_repetition(const ScorerSpec& spec,
                                                          const MultiplexNetwork& net, LayerId target,
                                                          const EvalProtocol& protocol) {
    if (protocol.repetitions == 0)
        throw std::invalid_argument("evaluate: repetitions must be >= 1");
    std::vector<MetricsReport> reports(protocol.repetitions);

    auto run_one = [&](unsigned i) {
        const std::uint64_t rep_seed = protocol.seed + i;
        const EvalSplit split = make_split(net, target, protocol, rep_seed);
        reports[i] = split_metrics(detail::spec_for_repetition(spec, rep_seed), split);
        reports[i].seed = rep_seed;
    };

    const unsigned workers = std::max(1u, std::min(protocol.threads, protocol.repetitions));
    if (workers == 1) {
        for (unsigned i = 0; i < protocol.repetitions; ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (unsigned i = w; i < protocol.repetitions; i += workers) run_one(i);
            });
        for (std::thread& t : pool) t.join();
    }
    return reports;
}

// Plain means over repetitions. AUC containment survives averaging (the
// per-repetition inequalities are linear); the quadratic identity
// auc_max = auc_min + p1*p2 holds per repetition, not for the means.
inline MetricsReport aggregate_reports(std::span<const MetricsReport> reps, std::uint64_t seed) {
    if (reps.empty()) throw std::invalid_argument("aggregate_reports: no repetitions");
    MetricsReport out;
    for (const MetricsReport& r : reps) {
        out.auc += r.auc;
        out.auc_min += r.auc_min;
        out.auc_max += r.auc_max;
        out.p1 += r.p1;
        out.p2 += r.p2;
        out.precision += r.precision;
    }
    const double k = static_cast<double>(reps.size());
    out.auc /= k;
    out.auc_min /= k;
    out.auc_max /= k;
    out.p1 /= k;
    out.p2 /= k;
    out.precision /= k;
    out.n = reps.front().n;
    out.repetitions = static_cast<unsigned>(reps.size());
    out.seed = seed;
    return out;
}

inline MetricsReport evaluate(const ScorerSpec& spec, const MultiplexNetwork& net, LayerId target,
                              const EvalProtocol& protocol) {
    const std::vector<MetricsReport> reps = evaluate_per_repetition(spec, net, target, protocol);
    return aggregate_reports(reps, protocol.seed);
}

// ---- CSV -----------------------------------------------------------------

namespace detail {

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

inline std::string metrics_csv_header() {
    return "dataset,target_layer,method,params,auc,auc_min,auc_max,p1,p2,precision,n,repetitions,seed";
}

inline std::string metrics_csv_row(const std::string& dataset, const std::string& target_layer,
                                   const std::string& method, const std::string& params,
                                   const MetricsReport& r) {
    std::string row;
    row += detail::csv_escape(dataset);
    row += ',';
    row += detail::csv_escape(target_layer);
    row += ',';
    row += detail::csv_escape(method);
    row += ',';
    row += detail::csv_escape(params);
    row += ',';
    row += detail::write_double(r.auc);
    row += ',';
    row += detail::write_double(r.auc_min);
    row += ',';
    row += detail::write_double(r.auc_max);
    row += ',';
    row += detail::write_double(r.p1);
    row += ',';
    row += detail::write_double(r.p2);
    row += ',';
    row += detail::write_double(r.precision);
    row += ',';
    row += std::to_string(r.n);
    row += ',';
    row += std::to_string(r.repetitions);
    row += ',';
    row += std::to_string(r.seed);
    return row;
}

}  // namespace multilink
