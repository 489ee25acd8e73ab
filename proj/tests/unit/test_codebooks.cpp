// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "upaq/analysis.hpp"
#include "upaq/codebooks.hpp"

using namespace upaq;

TEST_CASE("dft_codebook small cases") {
    const DftCodebook cb = dft_codebook(2, 1);
    REQUIRE(cb.size() == 2);
    const double r = 1.0 / std::sqrt(2.0);
    // q = 1: x = 1/2 -> [1, 1]; q = 2: x = 1 -> [1, -1].
    CHECK(std::abs(cb.codewords(0, 0) - r) < 1e-15);
    CHECK(std::abs(cb.codewords(1, 0) - r) < 1e-15);
    CHECK(std::abs(cb.codewords(0, 1) - r) < 1e-15);
    CHECK(std::abs(cb.codewords(1, 1) + r) < 1e-15);

    const DftCodebook zero = dft_codebook(4, 0);
    REQUIRE(zero.size() == 1);
    CHECK((zero.codewords.col(0) - oracle::dft(4, 1, 1)).norm() < 1e-14);
}

TEST_CASE("dft_codebook matches entry formula and is unit norm") {
    for (int m : {1, 4, 7}) {
        for (int b : {0, 2, 3, 5}) {
            const DftCodebook cb = dft_codebook(m, b);
            CHECK(cb.size() == (1 << b));
            for (int q = 0; q < cb.size(); ++q) {
                CHECK((cb.codewords.col(q) - oracle::dft(m, q + 1, 1 << b)).norm() < 1e-12);
                CHECK(std::abs(cb.codewords.col(q).norm() - 1.0) < 1e-12);
                CHECK(std::abs(cb.direction(q) - (2.0 * (q + 1) / (1 << b) - 1.0)) < 1e-15);
            }
        }
    }
}

TEST_CASE("mean inner product between independently drawn codewords is 1/m_a") {
    // Averaged over every ordered index pair (q_c, q_d) of the two beams' codebooks.
    for (auto [m, bc, bd] : {std::tuple{4, 3, 3}, std::tuple{2, 2, 2}, std::tuple{3, 4, 2}, std::tuple{8, 3, 5}}) {
        const DftCodebook c = dft_codebook(m, bc);
        const DftCodebook d = dft_codebook(m, bd);
        const cplx mean = (c.codewords.adjoint() * d.codewords).sum() / double(c.size() * d.size());
        CHECK(std::abs(mean - cplx(1.0 / m, 0.0)) < 1e-12);
    }
}

TEST_CASE("refinement_grid offsets") {
    const RefinementGrid g = refinement_grid(2, 1);
    REQUIRE(g.size() == 2);
    CHECK(std::abs(g.offsets[0] + 1.0 / 16) < 1e-15);
    CHECK(std::abs(g.offsets[1] - 1.0 / 16) < 1e-15);

    for (int b = 0; b <= 6; ++b) {
        for (int r = 1; r <= 6; ++r) {
            const RefinementGrid t = refinement_grid(b, r);
            REQUIRE(t.size() == (1 << r));
            const double step = std::ldexp(1.0, -(b + r));
            const double extreme = (1.0 - std::ldexp(1.0, -r)) / std::ldexp(1.0, b + 1);
            CHECK(std::abs(t.offsets.front() + extreme) < 1e-15);
            CHECK(std::abs(t.offsets.back() - extreme) < 1e-15);
            for (int k = 0; k < t.size(); ++k) {
                CHECK(std::abs(t.offsets[k] + t.offsets[t.size() - 1 - k]) < 1e-15);
                if (k) CHECK(std::abs(t.offsets[k] - t.offsets[k - 1] - step) < 1e-15);
            }
        }
    }
    CHECK(std::abs(refinement_grid(5, 5).offsets.back() - (1.0 - 1.0 / 32) / 64) < 1e-15);
    CHECK_THROWS_AS(refinement_grid(2, -1), Error);
}

TEST_CASE("shift vector moves a codeword coordinate") {
    for (double x : {0.25, 0.5, 0.875}) {
        for (double theta : {-0.03, 0.01, 0.2}) {
            const CVector shifted = shift_vector(6, theta).cwiseProduct(dft_codeword(6, x));
            CHECK((shifted - dft_codeword(6, x + theta)).norm() < 1e-12);
        }
    }
}

TEST_CASE("Hadamard shift identity for half-wavelength path vectors") {
    const UpaGeometry g{3, 4, 0.5, 0.5};
    const double m = std::sqrt(double(g.antennas()));
    for (auto [a, b, c, d] : {std::tuple{0.1, -0.3, 0.25, 0.4}, std::tuple{-0.9, 0.7, 0.05, -0.6}}) {
        const CVector lhs = m * path_2d(g, a, c).cwiseProduct(path_2d(g, b, d));
        CHECK((lhs - path_2d(g, a + b, c + d)).norm() < 1e-12);
    }
}

TEST_CASE("same_direction compares coordinates across resolutions") {
    CHECK(same_direction({3, 1, 5}, {3, 1, 5}));
    CHECK(same_direction({2, 1, 3}, {3, 3, 7}));  // 2/4 == 4/8, 4/4 == 8/8
    CHECK_FALSE(same_direction({2, 1, 3}, {3, 2, 7}));
    CHECK_FALSE(same_direction({3, 1, 5}, {3, 1, 4}));
}

TEST_CASE("beam_vector and kronecker_correlations agree with explicit products") {
    const UpaGeometry g{3, 4, 0.5, 0.5};
    const oracle::CVec h = oracle::CVec::Random(12);
    const DftCodebook v = dft_codebook(3, 2);
    const DftCodebook hz = dft_codebook(4, 3);
    const CMatrix corr = kronecker_correlations(g, h, v.codewords, hz.codewords);
    REQUIRE(corr.rows() == 4);
    REQUIRE(corr.cols() == 8);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 8; ++j) {
            const oracle::CVec c = oracle::kron(oracle::dft(3, i + 1, 4), oracle::dft(4, j + 1, 8));
            CHECK(std::abs(corr(i, j) - h.dot(c)) < 1e-12);
        }
    }
    const CVector b = beam_vector(g, {3, 2, 5});
    CHECK((b - oracle::kron(oracle::dft(3, 3, 8), oracle::dft(4, 6, 8))).norm() < 1e-12);
    CHECK_THROWS_AS(kronecker_correlations(g, h, hz.codewords, v.codewords), Error);
}

TEST_CASE("analytic_covariance single beam reduces to the order-statistic form") {
    for (int p : {1, 3, 5}) {
        const UpaGeometry g{4, 8, 0.5, 0.5};
        const CMatrix r = analytic_covariance(g, 1, {4}, p);
        const double m = 32.0;
        double expect = p;
        for (int q = 1; q <= p; ++q) expect += (m * gamma_sq(4, 4) * gamma_sq(8, 4) - 1.0) / q;
        CHECK(std::abs(r(0, 0).real() - expect / m) < 1e-12);
    }
    const CMatrix r = analytic_covariance({4, 4, 0.5, 0.5}, 3, {4, 3, 2}, 4);
    CHECK((r - r.adjoint()).norm() < 1e-14);
    for (int i = 0; i < 3; ++i) CHECK(r(i, i).real() > 0.0);
    CHECK_THROWS_AS(analytic_covariance({4, 4, 0.5, 0.5}, 2, {4}, 3), Error);
}

TEST_CASE("analytic_covariance matches the Monte Carlo effective covariance") {
    const CMatrix r = analytic_covariance({4, 4, 0.5, 0.5}, 2, {4, 3}, 3);
    const oracle::CMat mc = oracle::mc_covariance(4, 4, {4, 3}, 3, 40000, 77);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(r(i, j) - mc(i, j)) < 0.03);
}

TEST_CASE("combiner codebook small cases") {
    const CombinerCodebook one = combiner_codebook(CMatrix::Identity(1, 1), 1, 0);
    REQUIRE(one.size() == 1);
    CHECK(std::abs(one.codewords(0, 0) - 1.0) < 1e-12);

    const CombinerCodebook two = combiner_codebook(CMatrix::Identity(2, 2), 2, 1, 4);
    REQUIRE(two.size() == 2);
    CHECK(std::abs(two.codewords.col(0).dot(two.codewords.col(1))) < 1e-12);
    CHECK(std::abs(two.min_chordal_distance - 1.0) < 1e-12);
    CHECK(two.seed_phases[1] == std::vector<int>{0, 2});

    const CombinerCodebook four = combiner_codebook(CMatrix::Identity(2, 2), 2, 2, 8);
    double max_coherence = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            max_coherence = std::max(max_coherence, std::abs(four.seeds.col(a).dot(four.seeds.col(b))));
    CHECK(std::abs(max_coherence - std::cos(oracle::kPi / 4)) < 1e-12);
}

TEST_CASE("combiner codewords are unit norm with equal-gain seeds on the grid") {
    const CMatrix r = analytic_covariance({8, 8, 0.5, 0.5}, 3, {5, 4, 3}, 4);
    const CombinerCodebook cb = combiner_codebook(r, 3, 3);
    CHECK(cb.phase_levels == default_phase_levels(8));
    CHECK(cb.phase_levels == 16);
    std::set<std::vector<int>> distinct;
    for (int u = 0; u < cb.size(); ++u) {
        CHECK(std::abs(cb.codewords.col(u).norm() - 1.0) < 1e-12);
        CHECK(cb.seed_phases[u][0] == 0);
        distinct.insert(cb.seed_phases[u]);
        for (int n = 0; n < 3; ++n) {
            CHECK(std::abs(std::abs(cb.seeds(n, u)) - 1.0 / std::sqrt(3.0)) < 1e-12);
            const cplx expect = std::polar(1.0 / std::sqrt(3.0), 2.0 * oracle::kPi * cb.seed_phases[u][n] / 16);
            CHECK(std::abs(cb.seeds(n, u) - expect) < 1e-12);
        }
        const CVector colored = hermitian_sqrt(r) * cb.seeds.col(u);
        CHECK((cb.codewords.col(u) - colored / colored.norm()).norm() < 1e-12);
    }
    CHECK(distinct.size() == 8);
}

TEST_CASE("exhaustive and greedy packing agree for small two-beam cases") {
    for (int levels : {4, 8}) {
        for (int bits : {0, 1, 2}) {
            if ((1 << bits) > levels) continue;
            const auto ex = combiner_codebook(CMatrix::Identity(2, 2), 2, bits, levels, PackingMethod::exhaustive);
            const auto gr = combiner_codebook(CMatrix::Identity(2, 2), 2, bits, levels, PackingMethod::greedy);
            CHECK(std::abs(ex.min_chordal_distance - gr.min_chordal_distance) < 1e-12);
        }
    }
}

TEST_CASE("packing is unchanged by a global phase on the covariance root") {
    const CMatrix r = analytic_covariance({4, 4, 0.5, 0.5}, 2, {4, 3}, 3);
    const CombinerCodebook a = combiner_codebook(r, 2, 2);
    // A unitary diagonal rotation R -> D R D^H rotates R^{1/2} the same way.
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = std::polar(1.0, 0.7);
    d(1, 1) = std::polar(1.0, 0.7);
    const CombinerCodebook b = combiner_codebook(d * r * d.adjoint(), 2, 2);
    CHECK(a.seed_phases == b.seed_phases);
    CHECK(std::abs(a.min_chordal_distance - b.min_chordal_distance) < 1e-12);
    for (int x = 0; x < a.size(); ++x)
        for (int y = 0; y < a.size(); ++y)
            CHECK(std::abs(chordal_distance(a.codewords.col(x), a.codewords.col(y)) -
                           chordal_distance(b.codewords.col(x), b.codewords.col(y))) < 1e-7);
}

TEST_CASE("combiner codebook errors") {
    CMatrix bad(2, 2);
    bad << 1.0, 0.5, 0.0, 1.0;
    try {
        combiner_codebook(bad, 2, 1);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numerical_domain);
    }
    CMatrix indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(hermitian_sqrt(indefinite), Error);
    try {
        combiner_codebook(CMatrix::Identity(2, 2), 2, 3, 4);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::infeasible_packing);
    }
}

TEST_CASE("hermitian_sqrt squares back") {
    const CMatrix r = analytic_covariance({4, 4, 0.5, 0.5}, 3, {4, 3, 3}, 5);
    const CMatrix s = hermitian_sqrt(r);
    CHECK((s * s - r).norm() < 1e-10);
    CHECK((s - s.adjoint()).norm() < 1e-12);
}

TEST_CASE("codebook text round trip") {
    const DftCodebook cb = dft_codebook(4, 3);
    std::stringstream ss;
    write_codebook(ss, cb.codewords, "dft m=4 b=3");
    const std::string text = ss.str();
    CHECK(text.rfind("# dft m=4 b=3", 0) == 0);
    const CMatrix back = read_codebook(ss);
    REQUIRE(back.rows() == 4);
    REQUIRE(back.cols() == 8);
    CHECK(back == cb.codewords);

    std::stringstream bad("1,0 0,1\n1,0\n");
    CHECK_THROWS_AS(read_codebook(bad), Error);
    std::stringstream junk("1,x\n");
    CHECK_THROWS_AS(read_codebook(junk), Error);
}
