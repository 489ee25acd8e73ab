// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "upaq/analysis.hpp"
#include "upaq/narrowband.hpp"

using namespace upaq;

namespace {

CVector random_channel(const UpaGeometry& g, int p, std::uint64_t seed) { return narrowband_channel(g, sample_paths(p, seed)); }

CVector random_unit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    CVector z(n);
    for (int i = 0; i < n; ++i) z[i] = cplx(d(rng), d(rng));
    return z / z.norm();
}

}  // namespace

TEST_CASE("rayleigh_weight small cases") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    const CVector h = random_channel(g, 3, 1);
    CMatrix c1(16, 1);
    c1.col(0) = beam_vector(g, {3, 2, 5});
    const CVector z = rayleigh_weight(c1, h);
    CHECK(std::abs(std::abs(z[0]) - 1.0) < 1e-12);
    CHECK(rayleigh_gain(c1, h) == doctest::Approx(std::norm(h.dot(c1.col(0)))).epsilon(1e-12));

    // Orthonormal columns: matched filter.
    CMatrix ortho(16, 2);
    ortho.col(0) = beam_vector(g, {2, 0, 0});
    ortho.col(1) = beam_vector(g, {2, 1, 2});
    REQUIRE(std::abs(ortho.col(0).dot(ortho.col(1))) < 1e-12);
    const CVector mf = ortho.adjoint() * h;
    const CVector w = rayleigh_weight(ortho, h);
    CHECK(std::abs(std::abs(w.dot(mf / mf.norm())) - 1.0) < 1e-12);
}

TEST_CASE("rayleigh_weight beats a dense grid and random weights") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    std::mt19937_64 rng(9);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const CVector h = random_channel(g, 4, 50 + s);
        CMatrix c(16, 2);
        c.col(0) = beam_vector(g, {3, 1, 6});
        c.col(1) = beam_vector(g, {4, 9, 3});
        const double best = beamforming_gain(h, combine_beams(c, rayleigh_weight(c, h)));
        CHECK(best == doctest::Approx(rayleigh_gain(c, h)).epsilon(1e-10));
        CHECK(best == doctest::Approx(oracle::rayleigh_value(c, h)).epsilon(1e-10));
        double grid = 0.0;
        for (int a = 0; a <= 400; ++a) {
            for (int p = 0; p < 400; ++p) {
                const double t = oracle::kPi / 2 * a / 400;
                CVector z(2);
                z << std::cos(t), std::polar(std::sin(t), 2 * oracle::kPi * p / 400);
                grid = std::max(grid, beamforming_gain(h, combine_beams(c, z)));
            }
        }
        CHECK(grid <= best * (1 + 1e-12));
        CHECK(grid >= best * (1 - 1e-4));
        for (int t = 0; t < 2000; ++t) CHECK(beamforming_gain(h, combine_beams(c, random_unit(2, rng))) <= best * (1 + 1e-12));
    }
}

TEST_CASE("rayleigh_weight rejects rank-deficient beam sets") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    CMatrix c(16, 2);
    c.col(0) = beam_vector(g, {2, 1, 1});
    c.col(1) = c.col(0);
    try {
        rayleigh_weight(c, random_channel(g, 2, 3));
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate_beamset);
    }
}

TEST_CASE("beam_quantize matches the brute-force selection") {
    for (auto [mv, mh] : {std::pair{2, 3}, std::pair{4, 4}}) {
        const UpaGeometry g{mv, mh, 0.5, 0.5};
        for (std::uint64_t s = 0; s < 6; ++s) {
            const CVector h = random_channel(g, 3, 200 + s);
            const std::vector<int> bits{3, 2, 2};
            const QuantizedBeamSet q = beam_quantize(h, g, 3, bits);
            const auto ref = oracle::brute_algorithm1(h, mv, mh, bits);
            for (int n = 0; n < 3; ++n) {
                CHECK(q.indices[n].v == ref[n].first);
                CHECK(q.indices[n].h == ref[n].second);
                CHECK(std::abs(q.beams.col(n).norm() - 1.0) < 1e-12);
            }
            CHECK(std::abs(q.weight.norm() - 1.0) < 1e-12);
            CHECK(std::abs(q.beamformer().norm() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("beam_quantize recovers an on-grid direction") {
    const UpaGeometry g{4, 8, 0.5, 0.5};
    const CVector h = cplx(0.3, -1.1) * beam_vector(g, {4, 11, 6});
    const QuantizedBeamSet q = beam_quantize(h, g, 1, {4});
    CHECK(q.indices[0] == BeamIndex{4, 11, 6});
    CHECK(normalized_gain(h, q.beamformer()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Algorithm-1 gain is non-decreasing in the number of beams") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    for (std::uint64_t s = 0; s < 50; ++s) {
        const CVector h = random_channel(g, 4, 900 + s);
        double previous = 0.0;
        for (int n = 1; n <= 3; ++n) {
            const QuantizedBeamSet q = beam_quantize(h, g, n, std::vector<int>(n, 3));
            const double v = rayleigh_gain(q.beams, h);
            CHECK(v >= previous - 1e-12);
            previous = v;
        }
    }
}

TEST_CASE("beam_quantize errors") {
    const UpaGeometry g{2, 2, 0.5, 0.5};
    const CVector h = random_channel(g, 2, 1);
    try {
        beam_quantize(h, g, 3, {0, 0, 0});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::exhausted_codebook);
    }
    CHECK_THROWS_AS(beam_quantize(h, g, 2, {3}), Error);
}

TEST_CASE("coarse_search") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    const CVector h = beam_vector(g, {4, 3, 12});
    SearchStats stats;
    CHECK(coarse_search(h, g, 4, &stats) == BeamIndex{4, 3, 12});
    CHECK(stats.evaluations == 256);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const CVector r = random_channel(g, 3, 30 + s);
        const BeamIndex a = coarse_search(r, g, 3);
        const auto ref = oracle::brute_coarse(r, 4, 4, 3);
        CHECK(a.v == ref.first);
        CHECK(a.h == ref.second);
        CHECK(coarse_search(cplx(-2.5, 0.7) * r, g, 3) == a);
    }
    // Ties go to the lowest index: the all-zero channel.
    CHECK(coarse_search(CVector::Zero(16), g, 2) == BeamIndex{2, 0, 0});
}

TEST_CASE("refine_single") {
    const UpaGeometry g{8, 8, 0.5, 0.5};
    const RefinementGrid grid = refinement_grid(3, 3);
    // A steering vector half a coarse cell above codeword (2, 5).
    const double xv = 3.0 / 8 + 1.0 / 32;
    const double xh = 6.0 / 8 + 1.0 / 32;
    const CVector h = oracle::kron(oracle::steering(8, 0.5, 2 * xv - 1), oracle::steering(8, 0.5, 2 * xh - 1));
    const BeamIndex coarse{3, 2, 5};
    SearchStats stats;
    const Codeword f = refine_single(h, g, coarse, grid, &stats);
    CHECK(stats.evaluations == 64);
    CHECK(grid.offsets[f.indices.theta_v] > 0.0);
    CHECK(grid.offsets[f.indices.theta_h] > 0.0);
    CHECK(f.payload.size() == 12);
    CHECK(std::abs(f.vector.norm() - 1.0) < 1e-12);
    // Brute-force optimum over the offset grid.
    double best = 0.0;
    for (double tv : grid.offsets)
        for (double th : grid.offsets)
            best = std::max(best, std::norm(h.dot(oracle::kron(oracle::dft(8, 3, 8).cwiseProduct(shift_vector(8, tv)),
                                                               oracle::dft(8, 6, 8).cwiseProduct(shift_vector(8, th))))));
    CHECK(beamforming_gain(h, f.vector) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("refinement improves the mean gain of off-grid steering vectors") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    const RefinementGrid grid = refinement_grid(4, 4);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    double coarse_sum = 0.0, refined_sum = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const CVector h = path_2d(g, u(rng), u(rng));
        const BeamIndex c = coarse_search(h, g, 4);
        coarse_sum += normalized_gain(h, beam_vector(g, c));
        refined_sum += normalized_gain(h, refine_single(h, g, c, grid).vector);
    }
    CHECK(refined_sum > coarse_sum);
}

TEST_CASE("second_beam") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    const CombinerCodebook z = combiner_codebook(CMatrix::Identity(2, 2), 2, 2);
    // h = c1 exactly: the two-beam family cannot beat the single beam.
    const BeamIndex c1{4, 5, 9};
    const CVector h = beam_vector(g, c1);
    SearchStats stats;
    const Codeword f2 = second_beam(h, g, c1, 3, z, &stats);
    CHECK(stats.evaluations == (1 << 6) * 4);
    CHECK(beamforming_gain(h, f2.vector) <= 1.0 + 1e-12);
    CHECK_FALSE(same_direction(f2.indices.second, c1));
    CHECK(f2.payload.size() == 2 * 4 + 2 * 3 + 2);

    // Equal-gain sum of two on-grid beams: combining beats one beam.
    const BeamIndex a{3, 1, 2};
    const BeamIndex b{3, 6, 4};
    const CVector two = beam_vector(g, a) + beam_vector(g, b);
    const BeamIndex coarse = coarse_search(two, g, 3);
    const Codeword pair = second_beam(two, g, coarse, 3, z);
    CHECK(normalized_gain(two, pair.vector) > normalized_gain(two, beam_vector(g, coarse)) + 0.1);

    // The fast metric agrees with explicit vectors for every candidate chosen.
    for (std::uint64_t s = 0; s < 10; ++s) {
        const CVector r = random_channel(g, 3, 70 + s);
        const BeamIndex c = coarse_search(r, g, 4);
        const Codeword f = second_beam(r, g, c, 3, z);
        double brute = 0.0;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                if (same_direction({3, i, j}, c)) continue;
                CMatrix pairm(16, 2);
                pairm.col(0) = beam_vector(g, c);
                pairm.col(1) = beam_vector(g, {3, i, j});
                for (int u = 0; u < 4; ++u) brute = std::max(brute, beamforming_gain(r, combine_beams(pairm, z.codewords.col(u))));
            }
        CHECK(beamforming_gain(r, f.vector) == doctest::Approx(brute).epsilon(1e-10));
    }
}

TEST_CASE("select_final") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    const CVector h = random_channel(g, 3, 4);
    Codeword f;
    f.vector = beam_vector(g, {2, 1, 1});
    f.payload = {1, 0};
    const Codeword same = select_final(h, f, f);
    CHECK(same.payload.front() == 0);
    CHECK(same.payload.size() == 3);

    const ProposedQuantizer q(g, {4, 4, 3, 2});
    for (std::uint64_t s = 0; s < 20; ++s) {
        const CVector r = random_channel(g, 4, 500 + s);
        ProposedQuantizer::Trace trace;
        const Codeword c = q.quantize(r, &trace);
        const double expect = std::max(beamforming_gain(r, trace.single.vector), beamforming_gain(r, trace.two_beam.vector));
        CHECK(beamforming_gain(r, c.vector) == expect);
        CHECK(static_cast<int>(c.payload.size()) == q.config().payload_bits());
        CHECK(trace.stats.evaluations == complexity_budget(Scheme::proposed, {4, 3, 2}).vector_evaluations);
    }
}

TEST_CASE("payload round trip is bit exact") {
    for (const ProposedConfig cfg : {ProposedConfig{5, 5, 4, 2}, ProposedConfig{4, 4, 3, 2}, ProposedConfig{3, 2, 1, 2}}) {
        const UpaGeometry g{4, 6, 0.5, 0.5};
        const ProposedQuantizer q(g, cfg);
        int families[2] = {0, 0};
        for (std::uint64_t s = 0; s < 200; ++s) {
            const CVector h = random_channel(g, 1 + int(s % 5), 1000 + s);
            const Codeword c = q.quantize(h);
            const FeedbackIndices back = decode_payload(c.payload, cfg);
            CHECK(back == c.indices);
            CHECK(encode_payload(back, cfg) == c.payload);
            CHECK((reconstruct_codeword(back, g, cfg, q.combiners()) - c.vector).norm() < 1e-12);
            CHECK(normalized_gain(h, c.vector) <= 1.0 + 1e-12);
            ++families[c.family() == Family::two_beam];
        }
        CHECK(families[0] > 0);
        CHECK(families[1] > 0);
    }
    const ProposedConfig cfg{4, 4, 3, 2};
    const Bits short_payload(5, 0);
    CHECK_THROWS_AS(decode_payload(short_payload, cfg), Error);
    Bits long_payload(cfg.payload_bits() + 1, 0);
    CHECK_THROWS_AS(decode_payload(long_payload, cfg), Error);
    CHECK_THROWS_AS((ProposedConfig{4, 4, 3, 1}.validate()), Error);
}

TEST_CASE("selection is invariant to complex scaling of h") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    const ProposedQuantizer q(g, {4, 4, 3, 2});
    for (std::uint64_t s = 0; s < 20; ++s) {
        const CVector h = random_channel(g, 3, 40 + s);
        CHECK(q.quantize(h).payload == q.quantize(cplx(0.01, -3.0) * h).payload);
    }
}

TEST_CASE("KP baseline") {
    const UpaGeometry g{4, 8, 0.5, 0.5};
    // h = u (x) conj(v) with u, v on the 3-bit grids.
    const CVector u = dft_codebook(4, 3).codewords.col(5);
    const CVector v = dft_codebook(8, 3).codewords.col(2);
    const CVector h = oracle::kron(u, v.conjugate()) * cplx(0.0, 2.0);
    SearchStats stats;
    const Codeword f = kp_baseline(h, g, 6, &stats);
    CHECK(normalized_gain(h, f.vector) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.indices.first == BeamIndex{3, 5, 2});
    CHECK(stats.evaluations == complexity_budget(Scheme::kp, {3}).vector_evaluations);
    CHECK(f.payload.size() == 6);
    CHECK_THROWS_AS(kp_baseline(h, g, 7), Error);
}

TEST_CASE("KP and the single-beam family agree on one-path channels") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    double kp = 0.0, f1 = 0.0;
    const RefinementGrid grid = refinement_grid(4, 2);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const CVector h = random_channel(g, 1, 7000 + s);
        kp += normalized_gain(h, kp_baseline(h, g, 12).vector);
        f1 += normalized_gain(h, refine_single(h, g, coarse_search(h, g, 4), grid).vector);
    }
    CHECK(std::abs(kp - f1) / 1000 < 0.02);
}

TEST_CASE("enhanced KP baseline") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    SearchStats stats;
    const CVector h = random_channel(g, 3, 17);
    const Codeword f = enhanced_kp_baseline(h, g, 5, 4, &stats);
    CHECK(std::abs(f.vector.norm() - 1.0) < 1e-12);
    CHECK(f.payload.size() == 18);
    CHECK(stats.evaluations == 2 * (32 + 16));

    // Rank-1 channels: the second term only costs gain, by at most 3 dB on average.
    double ekp = 0.0, kp = 0.0;
    for (std::uint64_t s = 0; s < 5000; ++s) {
        const CVector r = random_channel(g, 1, 8000 + s);
        ekp += normalized_gain(r, enhanced_kp_baseline(r, g, 5, 5).vector);
        kp += normalized_gain(r, kp_baseline(r, g, 10).vector);
    }
    CHECK(ekp >= 0.5 * kp);
}

TEST_CASE("MIMO precoder") {
    const UpaGeometry g{4, 4, 0.5, 0.5};
    // One receive antenna: identical to beam_quantize + rayleigh_weight.
    for (std::uint64_t s = 0; s < 10; ++s) {
        const CVector h = random_channel(g, 3, 600 + s);
        const MimoPrecoder m = mimo_quantize(h, g, 2, {4, 3}, 1);
        const QuantizedBeamSet q = beam_quantize(h, g, 2, {4, 3});
        CHECK(m.beams.indices == q.indices);
        CHECK(std::abs(std::abs(m.precoder.col(0).dot(q.beamformer())) - 1.0) < 1e-9);
    }
    // Two receive antennas: each layer's gain is its generalized eigenvalue.
    CMatrix h(16, 2);
    h.col(0) = narrowband_channel(g, sample_paths(3, 21));
    h.col(1) = narrowband_channel(g, sample_paths(3, 22));
    const MimoPrecoder two = mimo_quantize(h, g, 3, {4, 3, 3}, 2);
    CHECK(two.precoder.cols() == 2);
    for (int t = 0; t < 2; ++t) {
        CHECK(std::abs(two.precoder.col(t).norm() - 1.0) < 1e-12);
        CHECK((h.adjoint() * two.precoder.col(t)).squaredNorm() == doctest::Approx(two.layer_gains[t]).epsilon(1e-9));
    }
    CHECK(two.layer_gains[0] >= two.layer_gains[1]);
    // The first layer is the best unit combination of the selected beams.
    for (int t = 0; t < 500; ++t) {
        std::mt19937_64 rng(t);
        const CVector f = combine_beams(two.beams.beams, random_unit(3, rng));
        CHECK((h.adjoint() * f).squaredNorm() <= two.layer_gains[0] * (1 + 1e-9));
    }

    try {
        mimo_quantize(h, g, 1, {3}, 2);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::insufficient_beams);
    }
}
