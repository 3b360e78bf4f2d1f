#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "tda/errors.hpp"
#include "tda/persistence.hpp"

using tda::Date;
using tda::PersistencePair;

namespace {

tda::PointCloud cloud_from(const std::vector<std::vector<double>>& pts) {
    tda::PointCloud c;
    c.w = static_cast<int>(pts.size());
    c.d = pts.empty() ? 0 : static_cast<int>(pts[0].size());
    for (const auto& p : pts) c.coords.insert(c.coords.end(), p.begin(), p.end());
    return c;
}

tda::PointCloud random_cloud(std::mt19937_64& rng, int n, int d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    for (auto& p : pts)
        for (auto& x : p) x = u(rng);
    return cloud_from(pts);
}

// Test-side Kruskal, no shared code with the library's union-find.
std::vector<double> mst_weights(const tda::DistanceMatrix& dm) {
    struct Edge {
        double w;
        int a, b;
    };
    std::vector<Edge> edges;
    for (int i = 0; i < dm.size(); ++i)
        for (int j = i + 1; j < dm.size(); ++j) edges.push_back({dm.at(i, j), i, j});
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });
    std::vector<int> parent(dm.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<double> out;
    for (const auto& e : edges) {
        int ra = find(e.a), rb = find(e.b);
        if (ra == rb) continue;
        parent[ra] = rb;
        out.push_back(e.w);
    }
    return out;
}

std::vector<PersistencePair> finite_pairs(const std::vector<PersistencePair>& pairs) {
    std::vector<PersistencePair> out;
    for (const auto& p : pairs)
        if (!p.essential()) out.push_back(p);
    return out;
}

bool same_diagram(const tda::PersistenceDiagram& a, const tda::PersistenceDiagram& b,
                  double tol) {
    if (a.pairs.size() != b.pairs.size()) return false;
    for (size_t i = 0; i < a.pairs.size(); ++i) {
        const auto& x = a.pairs[i];
        const auto& y = b.pairs[i];
        if (x.dim != y.dim) return false;
        if (std::abs(x.birth - y.birth) > tol) return false;
        if (x.essential() != y.essential()) return false;
        if (!x.essential() && std::abs(x.death - y.death) > tol) return false;
    }
    return true;
}

// Every pair of d1 with persistence > 2*eps has a partner in d2 within eps
// in the infinity metric. One direction of an eps-bottleneck matching.
bool eps_matched(const std::vector<PersistencePair>& d1, const std::vector<PersistencePair>& d2,
                 double eps) {
    for (const auto& p : d1) {
        if (p.essential() || p.persistence() <= 2 * eps) continue;
        bool found = false;
        for (const auto& q : d2) {
            if (q.essential()) continue;
            if (std::abs(p.birth - q.birth) <= eps && std::abs(p.death - q.death) <= eps) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

const double kSqrt2 = std::sqrt(2.0);

tda::PointCloud unit_square() { return cloud_from({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

tda::PointCloud equilateral() {
    return cloud_from({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}});
}

}  // namespace

TEST_CASE("distance_matrix examples") {
    auto dm = tda::distance_matrix(cloud_from({{0, 0}, {3, 4}}));
    CHECK(dm.size() == 2);
    CHECK(dm.at(0, 1) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(dm.at(1, 0) == dm.at(0, 1));
    CHECK(dm.at(0, 0) == 0.0);

    dm = tda::distance_matrix(cloud_from({{2, 7, 1}}));
    CHECK(dm.size() == 1);
    CHECK(dm.at(0, 0) == 0.0);

    dm = tda::distance_matrix(cloud_from({{1, 1}, {1, 1}, {1, 1}}));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(dm.at(i, j) == 0.0);
}

TEST_CASE("enclosing_threshold is the largest pairwise distance") {
    auto dm = tda::distance_matrix(unit_square());
    CHECK(tda::enclosing_threshold(dm) == doctest::Approx(kSqrt2).epsilon(1e-15));
    auto single = tda::distance_matrix(cloud_from({{5, 5}}));
    CHECK(tda::enclosing_threshold(single) == 0.0);
}

TEST_CASE("build_rips on the equilateral triangle") {
    auto dm = tda::distance_matrix(equilateral());
    auto filt = tda::build_rips(dm, 2, 2.0);
    int v = 0, e = 0, t = 0;
    for (const auto& s : filt.simplices) {
        if (s.dim == 0) ++v;
        if (s.dim == 1) {
            ++e;
            CHECK(s.value == doctest::Approx(1.0).epsilon(1e-12));
        }
        if (s.dim == 2) {
            ++t;
            CHECK(s.value == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    CHECK(v == 3);
    CHECK(e == 3);
    CHECK(t == 1);

    filt = tda::build_rips(dm, 2, 0.5);
    CHECK(filt.simplices.size() == 3);
    for (const auto& s : filt.simplices) CHECK(s.dim == 0);
}

TEST_CASE("build_rips on the unit square at full threshold") {
    auto dm = tda::distance_matrix(unit_square());
    auto filt = tda::build_rips(dm, 2, kSqrt2);
    int v = 0, side = 0, diag = 0, t = 0;
    for (const auto& s : filt.simplices) {
        if (s.dim == 0) ++v;
        if (s.dim == 1) {
            if (s.value == doctest::Approx(1.0).epsilon(1e-12)) ++side;
            if (s.value == doctest::Approx(kSqrt2).epsilon(1e-12)) ++diag;
        }
        if (s.dim == 2) {
            ++t;
            CHECK(s.value == doctest::Approx(kSqrt2).epsilon(1e-12));
        }
    }
    CHECK(v == 4);
    CHECK(side == 4);
    CHECK(diag == 2);
    CHECK(t == 4);
    CHECK(tda::validate_faces(filt));
}

TEST_CASE("build_rips rejects bad parameters") {
    auto dm = tda::distance_matrix(unit_square());
    CHECK_THROWS_AS(tda::build_rips(dm, 3, 1.0), tda::ParameterError);
    CHECK_THROWS_AS(tda::build_rips(dm, 2, -1.0), tda::ParameterError);
    CHECK_THROWS_AS(tda::build_rips(dm, 2, std::numeric_limits<double>::infinity()),
                    tda::ParameterError);
}

TEST_CASE("filtration order places faces before cofaces") {
    std::mt19937_64 rng(100);
    for (int trial = 0; trial < 20; ++trial) {
        auto dm = tda::distance_matrix(random_cloud(rng, 8, 3));
        auto filt = tda::build_rips(dm, 2, tda::enclosing_threshold(dm));
        REQUIRE(tda::validate_faces(filt));
        REQUIRE(std::is_sorted(filt.simplices.begin(), filt.simplices.end(), tda::simplex_less));
    }

    // A hand-made violation: an edge before its vertex.
    tda::RipsFiltration bad;
    bad.vertex_count = 2;
    bad.simplices.push_back({{0, 1, -1}, 1, 0.5});
    bad.simplices.push_back({{0, -1, -1}, 0, 0.0});
    bad.simplices.push_back({{1, -1, -1}, 0, 0.0});
    CHECK(!tda::validate_faces(bad));
    CHECK_THROWS_AS(tda::compute_persistence(bad), tda::ParameterError);
}

TEST_CASE("collinear points 0,1,3: two merge deaths and one essential class") {
    auto dm = tda::distance_matrix(cloud_from({{0}, {1}, {3}}));
    auto filt = tda::build_rips(dm, 2, tda::enclosing_threshold(dm));
    auto diagram = tda::compute_persistence(filt);
    auto h0 = diagram.dimension(0);
    auto h1 = diagram.dimension(1);
    CHECK(h1.empty());
    REQUIRE(h0.size() == 3);
    CHECK(h0[0].birth == 0.0);
    CHECK(h0[0].death == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h0[1].birth == 0.0);
    CHECK(h0[1].death == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(h0[2].essential());
}

TEST_CASE("unit square: one loop born at 1, filled at sqrt(2)") {
    auto dm = tda::distance_matrix(unit_square());
    auto filt = tda::build_rips(dm, 2, tda::enclosing_threshold(dm));
    auto diagram = tda::compute_persistence(filt);
    auto h1 = diagram.dimension(1);
    REQUIRE(h1.size() == 1);
    CHECK(h1[0].birth == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(h1[0].death == doctest::Approx(kSqrt2).epsilon(1e-9));
    auto h0 = diagram.dimension(0);
    REQUIRE(h0.size() == 4);
    int essential = 0;
    for (const auto& p : h0) {
        if (p.essential())
            ++essential;
        else
            CHECK(p.death == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(essential == 1);
}

TEST_CASE("equilateral triangle: loop filled at birth leaves empty H1") {
    auto dm = tda::distance_matrix(equilateral());
    auto filt = tda::build_rips(dm, 2, tda::enclosing_threshold(dm));
    auto diagram = tda::compute_persistence(filt);
    CHECK(diagram.dimension(1).empty());
}

TEST_CASE("identical points collapse to a single essential class") {
    auto dm = tda::distance_matrix(cloud_from({{1, 1}, {1, 1}, {1, 1}, {1, 1}}));
    auto filt = tda::build_rips(dm, 2, 0.0);
    auto diagram = tda::compute_persistence(filt);
    REQUIRE(diagram.pairs.size() == 1);
    CHECK(diagram.pairs[0].dim == 0);
    CHECK(diagram.pairs[0].essential());
}

TEST_CASE("threshold below the enclosing value can leave an essential loop") {
    auto dm = tda::distance_matrix(unit_square());
    auto filt = tda::build_rips(dm, 2, 1.0);  // diagonals and triangles excluded
    auto diagram = tda::compute_persistence(filt);
    auto h1 = diagram.dimension(1);
    REQUIRE(h1.size() == 1);
    CHECK(h1[0].birth == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h1[0].essential());
}

TEST_CASE("empty filtration gives an empty diagram") {
    tda::RipsFiltration filt;
    CHECK(tda::compute_persistence(filt).pairs.empty());
    CHECK(tda::oracle_persistence(filt).pairs.empty());
}

TEST_CASE("oracle agrees on the square and refuses big inputs") {
    auto dm = tda::distance_matrix(unit_square());
    auto filt = tda::build_rips(dm, 2, tda::enclosing_threshold(dm));
    auto oracle = tda::oracle_persistence(filt);
    auto h1 = oracle.dimension(1);
    REQUIRE(h1.size() == 1);
    CHECK(h1[0].birth == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h1[0].death == doctest::Approx(kSqrt2).epsilon(1e-12));
    CHECK(same_diagram(tda::compute_persistence(filt), oracle, 0.0));

    std::mt19937_64 rng(4);
    auto big = tda::distance_matrix(random_cloud(rng, 11, 2));
    auto big_filt = tda::build_rips(big, 2, tda::enclosing_threshold(big));
    CHECK_THROWS_AS(tda::oracle_persistence(big_filt), tda::ParameterError);
}

TEST_CASE("reduction matches the dense oracle on 200 random clouds") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> n_dist(3, 8);
    std::uniform_int_distribution<int> d_dist(2, 4);
    for (int trial = 0; trial < 200; ++trial) {
        int n = n_dist(rng);
        int d = d_dist(rng);
        auto dm = tda::distance_matrix(random_cloud(rng, n, d));
        auto filt = tda::build_rips(dm, 2, tda::enclosing_threshold(dm));
        auto fast = tda::compute_persistence(filt);
        auto oracle = tda::oracle_persistence(filt);
        REQUIRE_MESSAGE(same_diagram(fast, oracle, 1e-12),
                        "diagram mismatch at trial " << trial << " (n=" << n << ", d=" << d << ")");
    }
}

TEST_CASE("ties: clouds with repeated distances still match the oracle") {
    // Integer grids force many equal filtration values.
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<int> coord(0, 2);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<double>> pts(6, std::vector<double>(2));
        for (auto& p : pts)
            for (auto& x : p) x = coord(rng);
        auto dm = tda::distance_matrix(cloud_from(pts));
        auto filt = tda::build_rips(dm, 2, tda::enclosing_threshold(dm));
        REQUIRE(same_diagram(tda::compute_persistence(filt), tda::oracle_persistence(filt), 0.0));
    }
}

TEST_CASE("finite H0 deaths are the MST edge weights") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> n_dist(2, 30);
    std::uniform_int_distribution<int> d_dist(2, 4);
    for (int trial = 0; trial < 100; ++trial) {
        auto cloud = random_cloud(rng, n_dist(rng), d_dist(rng));
        auto dm = tda::distance_matrix(cloud);
        auto filt = tda::build_rips(dm, 2, tda::enclosing_threshold(dm));
        auto diagram = tda::compute_persistence(filt);
        auto h0 = diagram.dimension(0);

        // n pairs total: n-1 finite plus one essential.
        REQUIRE(static_cast<int>(h0.size()) == cloud.size());
        auto finite = finite_pairs(h0);
        REQUIRE(static_cast<int>(finite.size()) == cloud.size() - 1);

        std::vector<double> deaths;
        for (const auto& p : finite) {
            REQUIRE(p.birth == 0.0);
            deaths.push_back(p.death);
        }
        std::sort(deaths.begin(), deaths.end());
        auto mst = mst_weights(dm);
        std::sort(mst.begin(), mst.end());
        REQUIRE(deaths.size() == mst.size());
        for (size_t i = 0; i < deaths.size(); ++i)
            REQUIRE(deaths[i] == doctest::Approx(mst[i]).epsilon(1e-12));
    }
}

TEST_CASE("scaling distances scales every birth and death") {
    std::mt19937_64 rng(31);
    auto cloud = random_cloud(rng, 7, 3);
    auto dm = tda::distance_matrix(cloud);
    auto base = tda::compute_persistence(tda::build_rips(dm, 2, tda::enclosing_threshold(dm)));
    for (double c : {0.125, 2.0, 9.75}) {
        tda::DistanceMatrix scaled(dm.size());
        for (int i = 0; i < dm.size(); ++i)
            for (int j = i + 1; j < dm.size(); ++j) scaled.set(i, j, c * dm.at(i, j));
        auto got = tda::compute_persistence(
            tda::build_rips(scaled, 2, tda::enclosing_threshold(scaled)));
        REQUIRE(got.pairs.size() == base.pairs.size());
        for (size_t i = 0; i < got.pairs.size(); ++i) {
            REQUIRE(got.pairs[i].dim == base.pairs[i].dim);
            REQUIRE(got.pairs[i].birth == doctest::Approx(c * base.pairs[i].birth).epsilon(1e-12));
            if (base.pairs[i].essential())
                REQUIRE(got.pairs[i].essential());
            else
                REQUIRE(got.pairs[i].death ==
                        doctest::Approx(c * base.pairs[i].death).epsilon(1e-12));
        }
    }
}

TEST_CASE("diagrams move at most 2*delta*sqrt(d) under delta perturbations") {
    std::mt19937_64 rng(55);
    const double delta = 1e-3;
    std::uniform_real_distribution<double> jitter(-delta, delta);
    std::uniform_int_distribution<int> n_dist(4, 8);
    std::uniform_int_distribution<int> d_dist(2, 3);
    for (int trial = 0; trial < 50; ++trial) {
        int n = n_dist(rng);
        int d = d_dist(rng);
        auto cloud = random_cloud(rng, n, d);
        tda::PointCloud moved = cloud;
        for (auto& x : moved.coords) x += jitter(rng);

        const double eps = 2.0 * delta * std::sqrt(static_cast<double>(d));
        auto dm_a = tda::distance_matrix(cloud);
        auto dm_b = tda::distance_matrix(moved);
        auto diag_a = tda::compute_persistence(tda::build_rips(dm_a, 2, tda::enclosing_threshold(dm_a)));
        auto diag_b = tda::compute_persistence(tda::build_rips(dm_b, 2, tda::enclosing_threshold(dm_b)));

        // H0 deaths are sorted MST weights, 1-Lipschitz under sup-norm
        // distance perturbations.
        auto a0 = finite_pairs(diag_a.dimension(0));
        auto b0 = finite_pairs(diag_b.dimension(0));
        REQUIRE(a0.size() == b0.size());
        for (size_t i = 0; i < a0.size(); ++i)
            REQUIRE(std::abs(a0[i].death - b0[i].death) <= eps + 1e-15);

        // H1 pairs clear of the diagonal must have a partner within eps.
        REQUIRE(eps_matched(diag_a.dimension(1), diag_b.dimension(1), eps));
        REQUIRE(eps_matched(diag_b.dimension(1), diag_a.dimension(1), eps));
    }
}

TEST_CASE("pair ordering and zero-persistence policy") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        auto dm = tda::distance_matrix(random_cloud(rng, 8, 2));
        auto diagram = tda::compute_persistence(
            tda::build_rips(dm, 2, tda::enclosing_threshold(dm)));
        for (const auto& p : diagram.pairs) {
            REQUIRE(p.birth >= 0.0);
            REQUIRE(p.death > p.birth);
        }
        REQUIRE(std::is_sorted(diagram.pairs.begin(), diagram.pairs.end(),
                               [](const PersistencePair& a, const PersistencePair& b) {
                                   if (a.dim != b.dim) return a.dim < b.dim;
                                   if (a.birth != b.birth) return a.birth < b.birth;
                                   return a.death < b.death;
                               }));
    }
}
