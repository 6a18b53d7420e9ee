#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "multilink/evaluation.hpp"
#include "multilink/graph.hpp"
#include "multilink/scorers.hpp"
#include "multilink/triads.hpp"

// Grid search over the layer-weight simplex. Triad sums are computed once per
// split; every grid point is then scored with an L*(L+1)/2-term dot product
// per candidate pair, so even fine grids only rescan precomputed numbers.

namespace multilink {

struct SimplexGrid {
    std::size_t dimension = 0;
    double step = 1.0;
    std::vector<CoefficientVector> points;
};

// All nonnegative L-vectors with entries on the step lattice summing to 1,
// enumerated in lexicographically descending order, so the (1, 0, ..., 0)
// corner comes first. step must be 1/k for an integer k.
inline SimplexGrid simplex_grid(std::size_t L, double step) {
    if (L < 1) throw std::invalid_argument("simplex_grid: dimension must be >= 1");
    if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("simplex_grid: step must be in (0, 1]");
    const double inv = 1.0 / step;
    const auto k = static_cast<std::uint64_t>(std::llround(inv));
    if (k < 1 || std::abs(inv - static_cast<double>(k)) > 1e-9)
        throw std::invalid_argument("simplex_grid: 1/step must be an integer");

    // C(k + L - 1, L - 1), saturating well past any grid we are willing to hold
    double approx_count = 1.0;
    for (std::size_t i = 1; i < L; ++i)
        approx_count *= static_cast<double>(k + i) / static_cast<double>(i);
    if (approx_count > 5e7) throw std::invalid_argument("simplex_grid: grid would exceed 5e7 points");

    SimplexGrid grid;
    grid.dimension = L;
    grid.step = step;
    grid.points.reserve(static_cast<std::size_t>(approx_count) + 1);

    std::vector<std::uint64_t> comp(L, 0);
    const auto emit = [&] {
        CoefficientVector cv;
        cv.eta.resize(L);
        for (std::size_t i = 0; i < L; ++i)
            cv.eta[i] = static_cast<double>(comp[i]) / static_cast<double>(k);
        grid.points.push_back(std::move(cv));
    };
    const auto recurse = [&](auto&& self, std::size_t slot, std::uint64_t remaining) -> void {
        if (slot + 1 == L) {
            comp[slot] = remaining;
            emit();
            return;
        }
        for (std::uint64_t c = remaining + 1; c-- > 0;) {
            comp[slot] = c;
            self(self, slot + 1, remaining - c);
        }
    };
    recurse(recurse, 0, k);
    return grid;
}

enum class SweepObjective { auc, precision };

inline std::string sweep_objective_name(SweepObjective o) {
    return o == SweepObjective::auc ? "auc" : "precision";
}

inline SweepObjective parse_sweep_objective(std::string_view name) {
    if (name == "auc") return SweepObjective::auc;
    if (name == "precision") return SweepObjective::precision;
    throw std::invalid_argument("unknown sweep objective: " + std::string(name));
}

struct SweepPointMetrics {
    CoefficientVector eta;
    double auc = 0.0;
    double precision = 0.0;
};

struct SweepResult {
    std::vector<SweepPointMetrics> points;  // grid enumeration order
    std::size_t best_auc_index = 0;
    std::size_t best_precision_index = 0;
    SweepObjective objective = SweepObjective::auc;

    const SweepPointMetrics& best_by_auc() const { return points.at(best_auc_index); }
    const SweepPointMetrics& best_by_precision() const { return points.at(best_precision_index); }
    const SweepPointMetrics& best() const {
        return objective == SweepObjective::auc ? best_by_auc() : best_by_precision();
    }
};

namespace detail {

// One split, reduced to what rescoring needs. Pairs whose triad matrix is
// entirely zero score zero for every eta; they are kept only as counts plus a
// key-sorted list for the precision tie order. For the rest we store the
// c_ab coefficients of maa_bilinear, so a grid point is an inner product.
struct CompressedSplit {
    std::size_t n_terms = 0;  // L*(L+1)/2
    std::size_t n_pos = 0, n_neg = 0;
    std::size_t pos_zero = 0, neg_zero = 0;
    std::vector<double> pos_coeff, neg_coeff;          // row-major, nonzero rows only
    std::vector<std::uint64_t> pos_keys, neg_keys;     // parallel to the rows above
    std::vector<std::pair<std::uint64_t, bool>> zero_rank;  // structurally zero pairs, (key, is_positive), key-ascending
};

inline void append_coeff_row(const TriadMatrix& tm, std::span<const double> avg,
                             std::vector<double>& out, bool& all_zero) {
    const std::uint32_t L = tm.n_layers();
    all_zero = true;
    for (LayerId a = 0; a < L; ++a) {
        const double saa = tm(a, a);
        double c = 0.0;
        if (saa != 0.0) {
            c = saa / avg[a];
            all_zero = false;
        }
        out.push_back(c);
        for (LayerId b = a + 1; b < L; ++b) {
            const double s = tm(a, b) + tm(b, a);
            c = 0.0;
            if (s != 0.0) {
                c = s / std::sqrt(avg[a] * avg[b]);
                all_zero = false;
            }
            out.push_back(c);
        }
    }
}

inline CompressedSplit compress_split(const TriadIndex& index, const EvalSplit& split) {
    if (split.positives.empty() || split.negatives.empty())
        throw std::invalid_argument("sweep: split without positives or negatives");
    const auto avg = index.layer_avg_degrees();
    const std::size_t L = avg.size();
    CompressedSplit cs;
    cs.n_terms = L * (L + 1) / 2;
    cs.n_pos = split.positives.size();
    cs.n_neg = split.negatives.size();

    std::vector<std::pair<std::uint64_t, bool>> zero_pos, zero_neg;
    const auto consume = [&](std::span<const Edge> pairs, bool is_pos) {
        auto& coeff = is_pos ? cs.pos_coeff : cs.neg_coeff;
        auto& keys = is_pos ? cs.pos_keys : cs.neg_keys;
        auto& zeros = is_pos ? zero_pos : zero_neg;
        for (const Edge& e : pairs) {
            const TriadMatrix* tm = index.find(e.first, e.second);
            if (tm == nullptr)
                throw std::invalid_argument("sweep: triad index does not cover a split candidate");
            bool all_zero = false;
            const std::size_t mark = coeff.size();
            append_coeff_row(*tm, avg, coeff, all_zero);
            if (all_zero) {
                coeff.resize(mark);
                zeros.emplace_back(edge_key(e.first, e.second), is_pos);
            } else {
                keys.push_back(edge_key(e.first, e.second));
            }
        }
    };
    consume(split.positives, true);
    consume(split.negatives, false);
    cs.pos_zero = zero_pos.size();
    cs.neg_zero = zero_neg.size();

    // positives/negatives arrive key-sorted, so their zero subsets are too
    cs.zero_rank.resize(zero_pos.size() + zero_neg.size());
    std::merge(zero_pos.begin(), zero_pos.end(), zero_neg.begin(), zero_neg.end(),
               cs.zero_rank.begin(),
               [](const auto& a, const auto& b) { return a.first < b.first; });
    return cs;
}

// Scratch buffers reused across grid points.
struct SweepScratch {
    std::vector<double> q;            // per-point eta products, n_terms long
    std::vector<double> neg_scores;   // nonzero-row negative scores
    struct RankEntry {
        double score;
        std::uint64_t key;
        bool is_pos;
    };
    std::vector<RankEntry> scored;                          // candidates with score > 0
    std::vector<std::pair<std::uint64_t, bool>> tied_zero;  // nonzero rows that scored 0
};

inline double dot_row(std::span<const double> coeff, std::size_t row, std::span<const double> q) {
    const std::size_t T = q.size();
    const double* c = coeff.data() + row * T;
    double sum = 0.0;
    for (std::size_t t = 0; t < T; ++t) sum += q[t] * c[t];
    return sum;
}

// AUC and precision of one grid point on one compressed split. Win/tie
// counting and top-n selection mirror roc_auc and precision_at_n exactly
// (integer counts, same comparator), so the sweep equals per-point rescoring
// through the reference path bit for bit.
inline void score_point(const CompressedSplit& cs, std::span<const double> eta, SweepScratch& sc,
                        double& auc_out, double& precision_out) {
    const std::size_t T = cs.n_terms;
    const std::size_t L = eta.size();
    sc.q.resize(T);
    {
        std::size_t t = 0;
        for (std::size_t a = 0; a < L; ++a) {
            sc.q[t++] = eta[a] * eta[a];
            for (std::size_t b = a + 1; b < L; ++b) sc.q[t++] = eta[a] * eta[b];
        }
    }

    sc.neg_scores.clear();
    sc.scored.clear();
    sc.tied_zero.clear();

    const std::size_t neg_rows = cs.neg_keys.size();
    for (std::size_t r = 0; r < neg_rows; ++r) {
        const double s = dot_row(cs.neg_coeff, r, sc.q);
        sc.neg_scores.push_back(s);
        if (s > 0.0)
            sc.scored.push_back({s, cs.neg_keys[r], false});
        else
            sc.tied_zero.emplace_back(cs.neg_keys[r], false);
    }
    std::sort(sc.neg_scores.begin(), sc.neg_scores.end());
    const std::size_t neg_row_zeros =
        static_cast<std::size_t>(std::upper_bound(sc.neg_scores.begin(), sc.neg_scores.end(), 0.0) -
                                 sc.neg_scores.begin());

    std::uint64_t wins = 0, ties = 0;
    const std::size_t pos_rows = cs.pos_keys.size();
    for (std::size_t r = 0; r < pos_rows; ++r) {
        const double s = dot_row(cs.pos_coeff, r, sc.q);
        const auto lo = std::lower_bound(sc.neg_scores.begin(), sc.neg_scores.end(), s);
        const auto hi = std::upper_bound(lo, sc.neg_scores.end(), s);
        wins += static_cast<std::uint64_t>(lo - sc.neg_scores.begin());
        ties += static_cast<std::uint64_t>(hi - lo);
        if (s > 0.0) {
            wins += cs.neg_zero;
            sc.scored.push_back({s, cs.pos_keys[r], true});
        } else {
            ties += cs.neg_zero;
            sc.tied_zero.emplace_back(cs.pos_keys[r], true);
        }
    }
    // structurally zero positives tie with every zero-scored negative
    ties += static_cast<std::uint64_t>(cs.pos_zero) *
            static_cast<std::uint64_t>(neg_row_zeros + cs.neg_zero);

    const double denom = static_cast<double>(cs.n_pos) * static_cast<double>(cs.n_neg);
    auc_out = (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) / denom;

    // precision at n = |positives|: positive scores first (descending, key
    // ascending on ties), then zero scores in ascending key order
    const std::size_t n = cs.n_pos;
    std::size_t hits = 0;
    if (sc.scored.size() >= n) {
        const auto before = [](const SweepScratch::RankEntry& a, const SweepScratch::RankEntry& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.key < b.key;
        };
        std::nth_element(sc.scored.begin(), sc.scored.begin() + static_cast<std::ptrdiff_t>(n) - 1,
                         sc.scored.end(), before);
        for (std::size_t i = 0; i < n; ++i)
            if (sc.scored[i].is_pos) ++hits;
    } else {
        for (const auto& e : sc.scored)
            if (e.is_pos) ++hits;
        std::size_t take = n - sc.scored.size();
        std::sort(sc.tied_zero.begin(), sc.tied_zero.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t i = 0, j = 0;
        while (take > 0) {
            bool from_rows;
            if (i < sc.tied_zero.size() && j < cs.zero_rank.size())
                from_rows = sc.tied_zero[i].first < cs.zero_rank[j].first;
            else if (i < sc.tied_zero.size())
                from_rows = true;
            else
                from_rows = false;
            const bool is_pos = from_rows ? sc.tied_zero[i++].second : cs.zero_rank[j++].second;
            if (is_pos) ++hits;
            --take;
        }
    }
    precision_out = static_cast<double>(hits) / static_cast<double>(n);
}

// Adds one split's per-point AUC/precision into the running sums. Points are
// distributed over workers by stride; each sum slot is owned by exactly one
// worker, so the result does not depend on the worker count.
inline void accumulate_split(const CompressedSplit& cs, const SimplexGrid& grid,
                             std::vector<double>& auc_sums, std::vector<double>& prec_sums,
                             unsigned threads) {
    const std::size_t n_points = grid.points.size();
    const unsigned workers =
        std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_points)));
    auto run_range = [&](unsigned w) {
        SweepScratch sc;
        for (std::size_t p = w; p < n_points; p += workers) {
            double auc = 0.0, prec = 0.0;
            score_point(cs, grid.points[p].eta, sc, auc, prec);
            auc_sums[p] += auc;
            prec_sums[p] += prec;
        }
    };
    if (workers == 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
        for (std::thread& t : pool) t.join();
    }
}

inline SweepResult finish_sweep(const SimplexGrid& grid, std::vector<double>& auc_sums,
                                std::vector<double>& prec_sums, std::size_t n_splits,
                                SweepObjective objective) {
    SweepResult result;
    result.objective = objective;
    result.points.reserve(grid.points.size());
    const double k = static_cast<double>(n_splits);
    for (std::size_t p = 0; p < grid.points.size(); ++p)
        result.points.push_back({grid.points[p], auc_sums[p] / k, prec_sums[p] / k});
    for (std::size_t p = 1; p < result.points.size(); ++p) {
        if (result.points[p].auc > result.points[result.best_auc_index].auc)
            result.best_auc_index = p;
        if (result.points[p].precision > result.points[result.best_precision_index].precision)
            result.best_precision_index = p;
    }
    return result;
}

}  // namespace detail

// Sweep over pre-built splits sharing one triad index (the index must cover
// every candidate of every split; natural for cross-layer test sets, where
// the training network is the full network). Per-point values are means over
// the splits; argmax ties resolve to the earliest grid point.
inline SweepResult sweep(const TriadIndex& index, std::span<const EvalSplit> splits,
                         const SimplexGrid& grid, SweepObjective objective, unsigned threads = 1) {
    if (grid.points.empty()) throw std::invalid_argument("sweep: empty grid");
    if (splits.empty()) throw std::invalid_argument("sweep: no splits");
    if (index.layer_avg_degrees().size() != grid.dimension)
        throw std::invalid_argument("sweep: grid dimension != index layer count");
    for (const EvalSplit& s : splits)
        if (grid.dimension != s.train.n_layers())
            throw std::invalid_argument("sweep: grid dimension != layer count");
    std::vector<double> auc_sums(grid.points.size(), 0.0), prec_sums(grid.points.size(), 0.0);
    for (const EvalSplit& s : splits) {
        const detail::CompressedSplit cs = detail::compress_split(index, s);
        detail::accumulate_split(cs, grid, auc_sums, prec_sums, threads);
    }
    return detail::finish_sweep(grid, auc_sums, prec_sums, splits.size(), objective);
}

// Holdout-protocol sweep: repetition i regenerates split i (seed + i), builds
// a triad index on that split's training network, folds the split into the
// per-point means, and drops the index before the next repetition.
inline SweepResult sweep_holdout(const MultiplexNetwork& net, LayerId target, const SimplexGrid& grid,
                                 SweepObjective objective, const EvalProtocol& protocol) {
    if (grid.points.empty()) throw std::invalid_argument("sweep: empty grid");
    if (grid.dimension != net.n_layers())
        throw std::invalid_argument("sweep: grid dimension != layer count");
    if (protocol.repetitions == 0) throw std::invalid_argument("sweep: repetitions must be >= 1");

    std::vector<double> auc_sums(grid.points.size(), 0.0), prec_sums(grid.points.size(), 0.0);
    for (unsigned i = 0; i < protocol.repetitions; ++i) {
        const EvalSplit split = make_split(net, target, protocol, protocol.seed + i);
        std::vector<Edge> all_pairs;
        all_pairs.reserve(split.positives.size() + split.negatives.size());
        all_pairs.insert(all_pairs.end(), split.positives.begin(), split.positives.end());
        all_pairs.insert(all_pairs.end(), split.negatives.begin(), split.negatives.end());
        const TriadIndex index = build_triad_index(split.train, all_pairs);
        const detail::CompressedSplit cs = detail::compress_split(index, split);
        detail::accumulate_split(cs, grid, auc_sums, prec_sums, protocol.threads);
    }
    return detail::finish_sweep(grid, auc_sums, prec_sums, protocol.repetitions, objective);
}

enum class GridCoordinates { raw, barycentric };

// One CSV row per grid point. Barycentric mode (3 layers only) appends the
// 2-D triangle embedding with vertices (0,0), (1,0), (0.5, sqrt(3)/2) for
// eta_0, eta_1, eta_2 respectively.
inline void export_grid(const SweepResult& result, GridCoordinates coordinates, std::ostream& os) {
    const std::size_t L = result.points.empty() ? 0 : result.points.front().eta.eta.size();
    if (coordinates == GridCoordinates::barycentric && !result.points.empty() && L != 3)
        throw std::invalid_argument("export_grid: barycentric coordinates need exactly 3 layers");

    for (std::size_t i = 0; i < (result.points.empty() ? 3 : L); ++i) os << "eta_" << i << ',';
    if (coordinates == GridCoordinates::barycentric) os << "x,y,";
    os << "auc,precision\n";

    for (const SweepPointMetrics& pt : result.points) {
        for (double e : pt.eta.eta) os << detail::write_double(e) << ',';
        if (coordinates == GridCoordinates::barycentric) {
            const double x = pt.eta.eta[1] + 0.5 * pt.eta.eta[2];
            const double y = pt.eta.eta[2] * (std::sqrt(3.0) / 2.0);
            os << detail::write_double(x) << ',' << detail::write_double(y) << ',';
        }
        os << detail::write_double(pt.auc) << ',' << detail::write_double(pt.precision) << '\n';
    }
}

}  // namespace multilink
