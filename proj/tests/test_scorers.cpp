#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "multilink/scorers.hpp"
#include "multilink/triads.hpp"

#include "support/test_support.hpp"

using namespace multilink;
namespace ts = testsupport;

namespace {

Layer path3() { return Layer(3, std::vector<Edge>{{0, 1}, {1, 2}}); }

}  // namespace

TEST_CASE("coefficient vectors") {
    CHECK(CoefficientVector::one_hot(3, 1).eta == std::vector<double>{0.0, 1.0, 0.0});
    CHECK(CoefficientVector::uniform(4).eta == std::vector<double>(4, 0.25));
    CHECK(CoefficientVector{{0.2, 0.3, 0.5}}.on_simplex());
    CHECK(CoefficientVector{{0.2, 0.3, 0.5 + 5e-10}}.on_simplex());  // inside tolerance
    CHECK_FALSE(CoefficientVector{{0.2, 0.3, 0.6}}.on_simplex());
    CHECK_FALSE(CoefficientVector{{-0.1, 0.6, 0.5}}.on_simplex());
    CHECK_FALSE(CoefficientVector{{}}.on_simplex());
}

TEST_CASE("adamic-adar examples") {
    SECTION("path u-w-v: single common neighbor of degree 2") {
        CHECK(aa_score(path3(), 0, 2) == Catch::Approx(1.0 / std::log(2.0)).epsilon(1e-12));
    }
    SECTION("no common neighbors") {
        const Layer layer(4, std::vector<Edge>{{0, 1}, {2, 3}});
        CHECK(aa_score(layer, 0, 3) == 0.0);
    }
    SECTION("common neighbors with degrees 2 and 3") {
        const Layer layer(6, std::vector<Edge>{{0, 2}, {2, 1}, {0, 3}, {3, 1}, {3, 4}});
        const double expect = 1.0 / std::log(2.0) + 1.0 / std::log(3.0);
        CHECK(aa_score(layer, 0, 1) == Catch::Approx(expect).epsilon(1e-12));
    }
    SECTION("u == v rejected") { CHECK_THROWS_AS(aa_score(path3(), 1, 1), std::invalid_argument); }
}

TEST_CASE("neighborhood baselines") {
    SECTION("path u-w-v") {
        const Layer layer = path3();
        CHECK(cn_score(layer, 0, 2) == 1.0);
        CHECK(jc_score(layer, 0, 2) == 1.0);
        CHECK(pa_score(layer, 0, 2) == 1.0);
    }
    SECTION("two isolated nodes: the 0/0 Jaccard is 0") {
        const Layer layer(4, std::vector<Edge>{{0, 1}});
        CHECK(cn_score(layer, 2, 3) == 0.0);
        CHECK(jc_score(layer, 2, 3) == 0.0);
        CHECK(pa_score(layer, 2, 3) == 0.0);
    }
    SECTION("adjacent pair in K4: neighbor sets taken verbatim") {
        std::vector<Edge> edges;
        for (NodeId u = 0; u < 4; ++u)
            for (NodeId v = u + 1; v < 4; ++v) edges.push_back({u, v});
        const Layer k4(4, edges);
        CHECK(cn_score(k4, 0, 1) == 2.0);
        CHECK(jc_score(k4, 0, 1) == 0.5);  // |{2,3}| / |{0,1,2,3}|
        CHECK(pa_score(k4, 0, 1) == 9.0);
    }
    SECTION("u == v rejected") {
        CHECK_THROWS_AS(cn_score(path3(), 0, 0), std::invalid_argument);
        CHECK_THROWS_AS(jc_score(path3(), 2, 2), std::invalid_argument);
        CHECK_THROWS_AS(pa_score(path3(), 1, 1), std::invalid_argument);
    }
    SECTION("symmetry on random graphs") {
        const MultiplexNetwork net = ts::random_multiplex(25, 1, 0.2, 4242);
        const Layer& layer = net.layer(0);
        Rng rng(7);
        for (int i = 0; i < 40; ++i) {
            const NodeId u = static_cast<NodeId>(rng.below(25));
            NodeId v = static_cast<NodeId>(rng.below(25));
            if (u == v) v = (v + 1) % 25;
            CHECK(aa_score(layer, u, v) == aa_score(layer, v, u));
            CHECK(cn_score(layer, u, v) == cn_score(layer, v, u));
            CHECK(jc_score(layer, u, v) == jc_score(layer, v, u));
            CHECK(pa_score(layer, u, v) == pa_score(layer, v, u));
        }
    }
}

TEST_CASE("spectral radius of known graphs") {
    SECTION("empty graph") { CHECK(spectral_radius(Layer(3, std::vector<Edge>{})) == 0.0); }
    SECTION("star K_{1,4}: sqrt(4) = 2") {
        const Layer star(5, std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {0, 4}});
        CHECK(spectral_radius(star) == Catch::Approx(2.0).epsilon(1e-9));
    }
    SECTION("path on 3 nodes: sqrt(2)") {
        CHECK(spectral_radius(path3()) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-9));
    }
    SECTION("complete K5: 4") {
        std::vector<Edge> edges;
        for (NodeId u = 0; u < 5; ++u)
            for (NodeId v = u + 1; v < 5; ++v) edges.push_back({u, v});
        CHECK(spectral_radius(Layer(5, edges)) == Catch::Approx(4.0).epsilon(1e-9));
    }
}

TEST_CASE("katz scores") {
    SECTION("parameter validation") {
        CHECK_THROWS_AS(katz_scores(path3(), 0.0, 5), std::invalid_argument);
        CHECK_THROWS_AS(katz_scores(path3(), -0.1, 5), std::invalid_argument);
        CHECK_THROWS_AS(katz_scores(path3(), 0.1, 1), std::invalid_argument);
    }
    SECTION("no path within max_len gives 0") {
        const Layer layer(4, std::vector<Edge>{{0, 1}, {2, 3}});
        const KatzScores table = katz_scores(layer, 0.1, 6);
        CHECK(table.score(0, 2) == 0.0);
        CHECK(table.score(1, 3) == 0.0);
    }
    SECTION("path u-w-v at beta 0.1: one length-2 walk") {
        const KatzScores table = katz_scores(path3(), 0.1, 2);
        CHECK(table.score(0, 2) == Catch::Approx(0.01).epsilon(1e-12));
    }
    SECTION("4-cycle: two length-2 walks between opposite corners") {
        const Layer cyc(4, std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {3, 0}});
        const KatzScores table = katz_scores(cyc, 0.1, 2);
        CHECK(table.score(0, 2) == Catch::Approx(0.02).epsilon(1e-12));
        CHECK(table.score(1, 3) == Catch::Approx(0.02).epsilon(1e-12));
    }
    SECTION("truncated mode matches the walk-counting oracle") {
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
            const MultiplexNetwork net = ts::random_multiplex(18, 1, 0.18, 6100 + seed);
            const Layer& layer = net.layer(0);
            const KatzScores table = katz_scores(layer, 0.07, 5);
            for (NodeId u = 0; u < 18; ++u) {
                for (NodeId v = u + 1; v < 18; ++v) {
                    const double expect = ts::oracle_katz(layer, u, v, 0.07, 5);
                    CHECK(table.score(u, v) == Catch::Approx(expect).margin(1e-12));
                }
            }
        }
    }
    SECTION("truncated converges to exact well below the spectral radius") {
        const MultiplexNetwork net = ts::random_multiplex(24, 1, 0.2, 999);
        const Layer& layer = net.layer(0);
        const double lambda = spectral_radius(layer);
        REQUIRE(lambda > 0.0);
        const double beta = 0.5 / lambda;
        const KatzScores trunc = katz_scores(layer, beta, 50, KatzMode::truncated);
        const KatzScores exact = katz_scores(layer, beta, 50, KatzMode::exact);
        for (NodeId u = 0; u < 24; ++u)
            for (NodeId v = u + 1; v < 24; ++v)
                CHECK(trunc.score(u, v) == Catch::Approx(exact.score(u, v)).margin(1e-8));
    }
    SECTION("exact mode rejects beta at or past the divergence point") {
        const Layer star(5, std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {0, 4}});
        // lambda = 2, so 1/lambda = 0.5
        CHECK_THROWS(katz_scores(star, 0.5, 5, KatzMode::exact));
        CHECK_THROWS(katz_scores(star, 0.6, 5, KatzMode::exact));
        CHECK_NOTHROW(katz_scores(star, 0.49, 5, KatzMode::exact));
    }
}

TEST_CASE("maa_score worked examples") {
    SECTION("two-layer toy matrix") {
        TriadMatrix tm(0, 1, 2);
        tm.entry(0, 1) = 1.0 / std::log(2.0);
        tm.entry(1, 0) = 1.0 / std::log(2.0);
        tm.entry(1, 1) = 1.0 / std::log(2.0);
        const std::vector<double> avg = {2.0, 2.0};
        const double got = maa_score(tm, CoefficientVector::uniform(2), avg);
        // 2 * (0.25/2) * (1/ln 2) + (0.25/2) * (1/ln 2) = 0.375 / ln 2
        CHECK(got == Catch::Approx(0.375 / std::log(2.0)).epsilon(1e-12));
    }
    SECTION("zero matrix scores 0 for every eta") {
        TriadMatrix tm(0, 1, 3);
        const std::vector<double> avg = {1.0, 2.0, 3.0};
        CHECK(maa_score(tm, CoefficientVector::uniform(3), avg) == 0.0);
        CHECK(maa_score(tm, CoefficientVector::one_hot(3, 2), avg) == 0.0);
    }
    SECTION("validation") {
        TriadMatrix tm(0, 1, 2);
        tm.entry(0, 0) = 1.0;
        const std::vector<double> avg = {2.0, 2.0};
        CHECK_THROWS_AS(maa_score(tm, CoefficientVector{{0.7, 0.7}}, avg), std::invalid_argument);
        CHECK_THROWS_AS(maa_score(tm, CoefficientVector::uniform(3), avg), std::invalid_argument);
        const std::vector<double> with_empty = {2.0, 0.0};
        CHECK_THROWS_AS(maa_score(tm, CoefficientVector::uniform(2), with_empty),
                        std::invalid_argument);
        // zero weight on the empty layer is fine
        CHECK_NOTHROW(maa_score(tm, CoefficientVector::one_hot(2, 0), with_empty));
    }
}

TEST_CASE("one-hot eta reduces to single-layer Adamic-Adar bit for bit") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const MultiplexNetwork net = ts::random_multiplex(35, 3, 0.12, 5200 + seed);
        std::vector<double> avg(net.n_layers());
        for (LayerId a = 0; a < net.n_layers(); ++a) avg[a] = avg_degree(net, a);
        Rng rng(17 + seed);
        for (int i = 0; i < 30; ++i) {
            const NodeId u = static_cast<NodeId>(rng.below(35));
            NodeId v = static_cast<NodeId>(rng.below(35));
            if (u == v) v = (v + 1) % 35;
            const TriadMatrix tm = triad_matrix(net, u, v);
            for (LayerId a = 0; a < net.n_layers(); ++a) {
                const double reduced = maa_score(tm, CoefficientVector::one_hot(3, a), avg);
                const double reference = aa_score(net.layer(a), u, v) / avg[a];
                CHECK(reduced == reference);  // exact, not approximate
            }
        }
    }
}

TEST_CASE("maa matches the direct double-sum oracle") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t layers = 2 + seed % 3;
        const MultiplexNetwork net = ts::random_multiplex(30, layers, 0.12, 5600 + seed);
        std::vector<double> avg(net.n_layers());
        bool empty_layer = false;
        for (LayerId a = 0; a < net.n_layers(); ++a) {
            avg[a] = avg_degree(net, a);
            if (avg[a] == 0.0) empty_layer = true;
        }
        if (empty_layer) continue;
        Rng rng(23 + seed);
        std::vector<CoefficientVector> etas = {CoefficientVector::uniform(layers)};
        for (int k = 0; k < 3; ++k) {
            std::vector<double> e(layers);
            double sum = 0.0;
            for (auto& x : e) sum += (x = rng.unit() + 0.01);
            for (auto& x : e) x /= sum;
            etas.push_back(CoefficientVector{e});
        }
        for (int i = 0; i < 15; ++i) {
            const NodeId u = static_cast<NodeId>(rng.below(30));
            NodeId v = static_cast<NodeId>(rng.below(30));
            if (u == v) v = (v + 1) % 30;
            const TriadMatrix tm = triad_matrix(net, u, v);
            for (const auto& eta : etas) {
                const double got = maa_score(tm, eta, avg);
                const double expect = ts::oracle_maa(net, u, v, eta.eta, avg);
                CHECK(got == Catch::Approx(expect).margin(1e-12));
            }
        }
    }
}

TEST_CASE("random pair scores are deterministic, symmetric, uniform-range") {
    std::set<double> seen;
    for (NodeId u = 0; u < 30; ++u) {
        for (NodeId v = u + 1; v < 30; ++v) {
            const double s = random_pair_score(u, v, 42);
            CHECK(s >= 0.0);
            CHECK(s < 1.0);
            CHECK(s == random_pair_score(v, u, 42));  // symmetric
            CHECK(s == random_pair_score(u, v, 42));  // stable
            seen.insert(s);
        }
    }
    CHECK(seen.size() == 30 * 29 / 2);  // no collisions in practice
    CHECK(random_pair_score(0, 1, 1) != random_pair_score(0, 1, 2));
}

TEST_CASE("method names parse both ways") {
    for (Method m : {Method::aa, Method::cn, Method::jc, Method::pa, Method::katz, Method::maa,
                     Method::random}) {
        CHECK(parse_method(method_name(m)) == m);
    }
    CHECK(parse_method("MAA") == Method::maa);
    CHECK(parse_method("Katz") == Method::katz);
    CHECK_THROWS_AS(parse_method("resource-allocation"), std::invalid_argument);
}

TEST_CASE("score_all") {
    const MultiplexNetwork net = ts::random_multiplex(30, 2, 0.15, 7100);
    std::vector<Edge> candidates;
    for (NodeId u = 0; u < 30; ++u)
        for (NodeId v = u + 1; v < 30; ++v)
            if (!net.layer(0).has_edge(u, v)) candidates.push_back(make_edge(u, v));
    REQUIRE(candidates.size() > 10);

    SECTION("single-layer scorers honor the layer selector") {
        ScorerSpec spec;
        spec.method = Method::aa;
        spec.layer = LayerSelector::target();
        const auto on_target = score_all(spec, net, 0, candidates);
        spec.layer = LayerSelector::aggregate_all();
        const auto on_aggregate = score_all(spec, net, 0, candidates);
        spec.layer = LayerSelector::named(net.layer_name(1));
        const auto on_named = score_all(spec, net, 0, candidates);

        const Layer all = aggregate(net);
        REQUIRE(on_target.size() == candidates.size());
        bool any_difference = false;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto [u, v] = candidates[i];
            CHECK(on_target[i].u == u);
            CHECK(on_target[i].v == v);
            CHECK(on_target[i].score == aa_score(net.layer(0), u, v));
            CHECK(on_aggregate[i].score == aa_score(all, u, v));
            CHECK(on_named[i].score == aa_score(net.layer(1), u, v));
            if (on_target[i].score != on_aggregate[i].score) any_difference = true;
        }
        CHECK(any_difference);
    }
    SECTION("unknown named layer is an error") {
        ScorerSpec spec;
        spec.layer = LayerSelector::named("no-such-layer");
        CHECK_THROWS_AS(score_all(spec, net, 0, candidates), std::invalid_argument);
    }
    SECTION("maa needs an index and follows it") {
        ScorerSpec spec;
        spec.method = Method::maa;
        spec.eta = CoefficientVector::uniform(2);
        CHECK_THROWS_AS(score_all(spec, net, 0, candidates), std::invalid_argument);

        const TriadIndex index = build_triad_index(net, candidates);
        const auto scored = score_all(spec, net, 0, candidates, &index);
        REQUIRE(scored.size() == candidates.size());
        std::vector<double> avg(index.layer_avg_degrees().begin(),
                                index.layer_avg_degrees().end());
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto [u, v] = candidates[i];
            const TriadMatrix* tm = index.find(u, v);
            const double expect = tm ? maa_score(*tm, spec.eta, avg) : 0.0;
            CHECK(scored[i].score == expect);
        }
    }
    SECTION("katz uses the target layer table") {
        ScorerSpec spec;
        spec.method = Method::katz;
        spec.layer = LayerSelector::target();
        spec.beta = 0.05;
        spec.max_len = 4;
        const auto scored = score_all(spec, net, 0, candidates);
        const KatzScores table = katz_scores(net.layer(0), 0.05, 4);
        for (std::size_t i = 0; i < candidates.size(); ++i)
            CHECK(scored[i].score == table.score(candidates[i].first, candidates[i].second));
    }
    SECTION("random scorer depends only on the pair and seed") {
        ScorerSpec spec;
        spec.method = Method::random;
        spec.seed = 77;
        const auto a = score_all(spec, net, 0, candidates);
        const auto b = score_all(spec, net, 1, candidates);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            CHECK(a[i].score == b[i].score);
            CHECK(a[i].score == random_pair_score(candidates[i].first, candidates[i].second, 77));
        }
    }
}

TEST_CASE("spec params strings") {
    ScorerSpec katz;
    katz.method = Method::katz;
    CHECK(katz.params() == "beta=0.005;max_len=5;mode=truncated");
    katz.katz_mode = KatzMode::exact;
    katz.beta = 0.25;
    katz.max_len = 8;
    CHECK(katz.params() == "beta=0.25;max_len=8;mode=exact");

    ScorerSpec maa;
    maa.method = Method::maa;
    maa.eta = CoefficientVector{{0.5, 0.25, 0.25}};
    CHECK(maa.params() == "eta=0.5|0.25|0.25");

    ScorerSpec aa;
    CHECK(aa.params() == "layer=aggregate");
    aa.layer = LayerSelector::target();
    CHECK(aa.params() == "layer=target");
    aa.layer = LayerSelector::named("calls");
    CHECK(aa.params() == "layer=calls");

    ScorerSpec rnd;
    rnd.method = Method::random;
    rnd.seed = 9;
    CHECK(rnd.params() == "seed=9");
}
