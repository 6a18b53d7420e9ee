#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "multilink/sweep.hpp"

#include "support/test_support.hpp"

using namespace multilink;
namespace ts = testsupport;

TEST_CASE("simplex grid enumeration") {
    SECTION("three layers at step 0.5: the six documented points in order") {
        const SimplexGrid grid = simplex_grid(3, 0.5);
        REQUIRE(grid.points.size() == 6);
        const std::vector<std::vector<double>> expect = {
            {1.0, 0.0, 0.0}, {0.5, 0.5, 0.0}, {0.5, 0.0, 0.5},
            {0.0, 1.0, 0.0}, {0.0, 0.5, 0.5}, {0.0, 0.0, 1.0}};
        for (std::size_t i = 0; i < 6; ++i) CHECK(grid.points[i].eta == expect[i]);
    }
    SECTION("the first point is always the first corner") {
        for (std::size_t L = 1; L <= 4; ++L) {
            const SimplexGrid grid = simplex_grid(L, 0.25);
            CHECK(grid.points.front().eta == CoefficientVector::one_hot(L, 0).eta);
            CHECK(grid.points.back().eta == CoefficientVector::one_hot(L, L - 1).eta);
        }
    }
    SECTION("step 1 yields exactly the corners") {
        const SimplexGrid grid = simplex_grid(4, 1.0);
        REQUIRE(grid.points.size() == 4);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(grid.points[i].eta == CoefficientVector::one_hot(4, i).eta);
    }
    SECTION("cardinality is C(k+L-1, L-1)") {
        for (std::size_t L = 1; L <= 5; ++L) {
            for (std::uint64_t k : {1, 2, 4, 5, 10, 20}) {
                const SimplexGrid grid = simplex_grid(L, 1.0 / static_cast<double>(k));
                CHECK(grid.points.size() == ts::binomial(k + L - 1, L - 1));
            }
        }
        CHECK(simplex_grid(2, 0.01).points.size() == 101);
        CHECK(simplex_grid(3, 0.01).points.size() == 5151);
    }
    SECTION("every point lies on the simplex") {
        const SimplexGrid grid = simplex_grid(4, 0.2);
        for (const CoefficientVector& cv : grid.points) CHECK(cv.on_simplex());
    }
    SECTION("validation") {
        CHECK_THROWS_AS(simplex_grid(0, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(simplex_grid(3, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(simplex_grid(3, 1.5), std::invalid_argument);
        CHECK_THROWS_AS(simplex_grid(3, 0.3), std::invalid_argument);   // 1/0.3 not integral
        CHECK_THROWS_AS(simplex_grid(5, 0.001), std::invalid_argument); // ~4e10 points
        CHECK_NOTHROW(simplex_grid(3, 0.2));
    }
}

TEST_CASE("sweep objective names") {
    CHECK(sweep_objective_name(SweepObjective::auc) == "auc");
    CHECK(sweep_objective_name(SweepObjective::precision) == "precision");
    CHECK(parse_sweep_objective("auc") == SweepObjective::auc);
    CHECK(parse_sweep_objective("precision") == SweepObjective::precision);
    CHECK_THROWS_AS(parse_sweep_objective("f1"), std::invalid_argument);
}

TEST_CASE("holdout sweep equals the direct per-point evaluation bit for bit") {
    const MultiplexNetwork net = ts::correlated_multiplex(25, 3, 0.18, 0.65, 0.04, 4321);
    const SimplexGrid grid = simplex_grid(3, 0.25);  // 15 points
    EvalProtocol protocol;
    protocol.repetitions = 3;
    protocol.seed = 77;

    const SweepResult result = sweep_holdout(net, 0, grid, SweepObjective::auc, protocol);
    REQUIRE(result.points.size() == grid.points.size());

    // reference route: fresh split -> ScorerSpec(maa, eta) -> split_metrics
    std::vector<double> auc_sums(grid.points.size(), 0.0), prec_sums(grid.points.size(), 0.0);
    for (unsigned i = 0; i < protocol.repetitions; ++i) {
        const EvalSplit split = make_split(net, 0, protocol, protocol.seed + i);
        for (std::size_t p = 0; p < grid.points.size(); ++p) {
            ScorerSpec spec;
            spec.method = Method::maa;
            spec.eta = grid.points[p];
            const MetricsReport r = split_metrics(spec, split);
            auc_sums[p] += r.auc;
            prec_sums[p] += r.precision;
        }
    }
    const double k = static_cast<double>(protocol.repetitions);
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
        CHECK(result.points[p].eta.eta == grid.points[p].eta);
        CHECK(result.points[p].auc == auc_sums[p] / k);            // exact
        CHECK(result.points[p].precision == prec_sums[p] / k);     // exact
    }

    // argmax matches a manual scan
    std::size_t best = 0;
    for (std::size_t p = 1; p < result.points.size(); ++p)
        if (result.points[p].auc > result.points[best].auc) best = p;
    CHECK(result.best_auc_index == best);
    CHECK(&result.best() == &result.best_by_auc());
}

TEST_CASE("shared-index sweep on a cross-layer test set equals the direct route") {
    const MultiplexNetwork net = ts::correlated_multiplex(30, 3, 0.15, 0.6, 0.03, 999);
    const EvalSplit split = cross_layer_testset(net, 0, 0);
    std::vector<Edge> all_pairs = split.positives;
    all_pairs.insert(all_pairs.end(), split.negatives.begin(), split.negatives.end());
    const TriadIndex index = build_triad_index(split.train, all_pairs);
    const SimplexGrid grid = simplex_grid(3, 0.2);  // 21 points

    const SweepResult result = sweep(index, {&split, 1}, grid, SweepObjective::precision);
    REQUIRE(result.points.size() == grid.points.size());
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
        ScorerSpec spec;
        spec.method = Method::maa;
        spec.eta = grid.points[p];
        const MetricsReport r = split_metrics(spec, split, &index);
        CHECK(result.points[p].auc == r.auc);
        CHECK(result.points[p].precision == r.precision);
    }
    CHECK(&result.best() == &result.best_by_precision());
}

TEST_CASE("sweep results are deterministic and thread-count independent") {
    const MultiplexNetwork net = ts::correlated_multiplex(25, 2, 0.2, 0.6, 0.05, 31415);
    const SimplexGrid grid = simplex_grid(2, 0.1);
    EvalProtocol protocol;
    protocol.repetitions = 2;
    protocol.seed = 5;

    const SweepResult a = sweep_holdout(net, 0, grid, SweepObjective::auc, protocol);
    const SweepResult b = sweep_holdout(net, 0, grid, SweepObjective::auc, protocol);
    EvalProtocol threaded = protocol;
    threaded.threads = 4;
    const SweepResult c = sweep_holdout(net, 0, grid, SweepObjective::auc, threaded);
    REQUIRE(a.points.size() == b.points.size());
    REQUIRE(a.points.size() == c.points.size());
    for (std::size_t p = 0; p < a.points.size(); ++p) {
        CHECK(a.points[p].auc == b.points[p].auc);
        CHECK(a.points[p].precision == b.points[p].precision);
        CHECK(a.points[p].auc == c.points[p].auc);
        CHECK(a.points[p].precision == c.points[p].precision);
    }
    CHECK(a.best_auc_index == c.best_auc_index);
    CHECK(a.best_precision_index == c.best_precision_index);
}

TEST_CASE("argmax ties resolve to the earliest grid point") {
    // Second layer empty: every eta with eta_0 > 0 rescales all scores by
    // eta_0^2, which never changes a ranking, so (1,0) and (0.5,0.5) tie and
    // the pure corner must win by enumeration order. Two cliques keep the
    // tied pair comfortably above the all-zero point's 0.5.
    std::vector<Edge> edges;
    for (NodeId u = 0; u < 7; ++u)
        for (NodeId v = u + 1; v < 7; ++v) edges.push_back({u, v});
    for (NodeId u = 7; u < 14; ++u)
        for (NodeId v = u + 1; v < 14; ++v) edges.push_back({u, v});
    edges.push_back({0, 7});
    const auto net = ts::make_net(14, {edges, {}});
    const SimplexGrid grid = simplex_grid(2, 0.5);  // (1,0), (0.5,0.5), (0,1)
    EvalProtocol protocol;
    protocol.repetitions = 2;
    protocol.seed = 3;
    const SweepResult result = sweep_holdout(net, 0, grid, SweepObjective::auc, protocol);
    REQUIRE(result.points.size() == 3);
    CHECK(result.points[0].auc == result.points[1].auc);
    CHECK(result.points[0].precision == result.points[1].precision);
    CHECK(result.points[0].auc > result.points[2].auc);  // eta=(0,1) scores everything 0
    CHECK(result.points[2].auc == 0.5);
    CHECK(result.best_auc_index == 0);
}

TEST_CASE("sweep argument validation") {
    const MultiplexNetwork net = ts::random_multiplex(20, 2, 0.2, 1);
    const EvalSplit split = split_holdout(net, 0, 0.2, 0);
    std::vector<Edge> all_pairs = split.positives;
    all_pairs.insert(all_pairs.end(), split.negatives.begin(), split.negatives.end());
    const TriadIndex index = build_triad_index(split.train, all_pairs);

    const SimplexGrid grid2 = simplex_grid(2, 0.5);
    const SimplexGrid grid3 = simplex_grid(3, 0.5);
    CHECK_THROWS_AS(sweep(index, {&split, 1}, grid3, SweepObjective::auc), std::invalid_argument);
    CHECK_THROWS_AS(sweep(index, {}, grid2, SweepObjective::auc), std::invalid_argument);
    SimplexGrid empty;
    empty.dimension = 2;
    CHECK_THROWS_AS(sweep(index, {&split, 1}, empty, SweepObjective::auc), std::invalid_argument);
    CHECK_THROWS_AS(sweep_holdout(net, 0, grid3, SweepObjective::auc, EvalProtocol{}),
                    std::invalid_argument);
}

TEST_CASE("grid export") {
    SECTION("raw coordinates, two layers") {
        SweepResult result;
        result.points.push_back({CoefficientVector{{1.0, 0.0}}, 0.75, 0.5});
        result.points.push_back({CoefficientVector{{0.5, 0.5}}, 0.8125, 0.25});
        std::ostringstream os;
        export_grid(result, GridCoordinates::raw, os);
        CHECK(os.str() ==
              "eta_0,eta_1,auc,precision\n"
              "1,0,0.75,0.5\n"
              "0.5,0.5,0.8125,0.25\n");
    }
    SECTION("barycentric corners and centroid") {
        SweepResult result;
        result.points.push_back({CoefficientVector{{1.0, 0.0, 0.0}}, 0.5, 0.0});
        result.points.push_back({CoefficientVector{{0.0, 1.0, 0.0}}, 0.5, 0.0});
        result.points.push_back({CoefficientVector{{0.0, 0.0, 1.0}}, 0.5, 0.0});
        const double third = 1.0 / 3.0;
        result.points.push_back({CoefficientVector{{third, third, third}}, 0.5, 0.0});
        std::ostringstream os;
        export_grid(result, GridCoordinates::barycentric, os);
        std::istringstream in(os.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == "eta_0,eta_1,eta_2,x,y,auc,precision");
        auto xy = [&]() {
            std::getline(in, line);
            std::size_t start = 0;
            std::vector<double> fields;
            while (start <= line.size()) {
                const std::size_t comma = line.find(',', start);
                const std::string tok = line.substr(start, comma - start);
                fields.push_back(std::stod(tok));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            return std::pair{fields[3], fields[4]};
        };
        const auto c0 = xy();
        CHECK(c0.first == 0.0);
        CHECK(c0.second == 0.0);
        const auto c1 = xy();
        CHECK(c1.first == 1.0);
        CHECK(c1.second == 0.0);
        const auto c2 = xy();
        CHECK(c2.first == 0.5);
        CHECK(c2.second == Catch::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
        const auto center = xy();
        CHECK(center.first == Catch::Approx(0.5).epsilon(1e-12));
        CHECK(center.second == Catch::Approx(std::sqrt(3.0) / 6.0).epsilon(1e-12));
    }
    SECTION("barycentric demands three layers") {
        SweepResult result;
        result.points.push_back({CoefficientVector{{1.0, 0.0}}, 0.5, 0.0});
        std::ostringstream os;
        CHECK_THROWS_AS(export_grid(result, GridCoordinates::barycentric, os),
                        std::invalid_argument);
    }
    SECTION("empty result still writes a header") {
        SweepResult result;
        std::ostringstream os;
        export_grid(result, GridCoordinates::raw, os);
        CHECK(os.str() == "eta_0,eta_1,eta_2,auc,precision\n");
    }
}
