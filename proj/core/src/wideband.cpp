// SPDX-License-Identifier: Apache-2.0
#include "upaq/wideband.hpp"

#include <ostream>

#include "upaq/analysis.hpp"

namespace upaq {

namespace {

void count(SearchStats* stats, long long n) {
    if (stats) stats->evaluations += n;
}

void push_bits(Bits& out, long long value, int width) {
    for (int b = width - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((value >> b) & 1));
}

int read_bits(std::span<const std::uint8_t> bits, std::size_t& pos, int width) {
    if (pos + static_cast<std::size_t>(width) > bits.size()) {
        throw Error(ErrorKind::invalid_input, "payload is shorter than the configured layout", "payload");
    }
    int value = 0;
    for (int b = 0; b < width; ++b) {
        if (bits[pos] > 1) throw Error(ErrorKind::invalid_input, "payload entries must be 0 or 1", "payload");
        value = (value << 1) | bits[pos++];
    }
    return value;
}

CVector kron(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

double coordinate(const BeamIndex& beam, bool vertical) {
    return static_cast<double>((vertical ? beam.v : beam.h) + 1) / static_cast<double>(1 << beam.bits);
}

CMatrix shifted(int m_a, double base, const RefinementGrid& grid) {
    CMatrix out(m_a, grid.size());
    for (int k = 0; k < grid.size(); ++k) out.col(k) = dft_codeword(m_a, base + grid.offsets[k]);
    return out;
}

// Per-column correlation tables h_w^H (a_i (x) b_j).
std::vector<CMatrix> block_correlations(const UpaGeometry& geom, const CMatrix& block, const CMatrix& vertical,
                                        const CMatrix& horizontal) {
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(block.cols()));
    for (Eigen::Index w = 0; w < block.cols(); ++w)
        out.push_back(kronecker_correlations(geom, block.col(w), vertical, horizontal));
    return out;
}

// Block gain of (z0 c1 + z1 c) / |z0 c1 + z1 c| from |a|^2 sums, |b|^2 sums
// and the cross term sum a conj(b).
double pair_metric(double aa, double bb, cplx ab, cplx z0, cplx z1, cplx rho) {
    const double num = std::norm(z0) * aa + std::norm(z1) * bb + 2.0 * std::real(z0 * std::conj(z1) * ab);
    const double den = std::norm(z0) + std::norm(z1) + 2.0 * std::real(std::conj(z0) * z1 * rho);
    return den > 1e-15 ? num / den : 0.0;
}

CVector pair_vector(const CVector& c1, const CVector& c2, const CombinerCodebook& combiners, int u) {
    CMatrix pair(c1.size(), 2);
    pair.col(0) = c1;
    pair.col(1) = c2;
    return combine_beams(pair, combiners.codewords.col(u));
}

}  // namespace

void WidebandConfig::validate() const {
    if (b_w1 < 1) throw Error(ErrorKind::configuration, "wideband first-beam bits must be >= 1", "b_w1");
    if (b_w2 < 1) throw Error(ErrorKind::configuration, "wideband second-beam bits must be >= 1", "b_w2");
    if (b_n1 < 0) throw Error(ErrorKind::configuration, "narrowband refinement bits must be >= 0", "b_n1");
    if (b_n2 < 0) throw Error(ErrorKind::configuration, "narrowband round-2 bits must be >= 0", "b_n2");
    if (b_c < 0) throw Error(ErrorKind::configuration, "combiner bits must be >= 0", "b_c");
    if (2 * b_n1 != 2 * b_n2 + b_c) {
        throw Error(ErrorKind::configuration, "round-2 split requires 2*b_n1 == 2*b_n2 + b_c", "b_n1");
    }
}

long long WidebandFeedback::total_bits() const noexcept {
    long long bits = 0;
    for (const auto& l1 : level1) bits += static_cast<long long>(l1.payload.size());
    for (const auto& rb : rbs) bits += static_cast<long long>(rb.codeword.payload.size());
    return bits;
}

RbPartition partition_rbs(const WidebandGrid& grid) {
    grid.validate();
    RbPartition out;
    for (int l = 0; l < grid.l_blocks; ++l) {
        out.wideband.push_back(wideband_block(grid, l));
        std::vector<ToneRange> row;
        for (int r = 0; r < grid.r_blocks; ++r) row.push_back(narrowband_block(grid, l, r));
        out.narrowband.push_back(std::move(row));
    }
    return out;
}

LevelOneBeams level1_beams(const CMatrix& block, const UpaGeometry& geom, int b_w1, int b_w2,
                           const CombinerCodebook& combiners, SearchStats* stats) {
    geom.validate();
    if (block.rows() != geom.antennas() || block.cols() < 1) {
        throw Error(ErrorKind::invalid_dimension, "channel block does not match array");
    }
    if (combiners.n_beams != 2) throw Error(ErrorKind::invalid_input, "level-1 search needs a two-beam combiner codebook");
    const DftCodebook v1 = dft_codebook(geom.m_v, b_w1);
    const DftCodebook h1 = dft_codebook(geom.m_h, b_w1);
    const std::vector<CMatrix> corr1 = block_correlations(geom, block, v1.codewords, h1.codewords);
    count(stats, static_cast<long long>(v1.size()) * h1.size());

    Eigen::MatrixXd energy = Eigen::MatrixXd::Zero(v1.size(), h1.size());
    for (const CMatrix& c : corr1) energy += c.cwiseAbs2();
    LevelOneBeams out;
    out.first = {b_w1, 0, 0};
    double best = -1.0;
    for (int i = 0; i < energy.rows(); ++i) {
        for (int j = 0; j < energy.cols(); ++j) {
            if (energy(i, j) > best) {
                best = energy(i, j);
                out.first = {b_w1, i, j};
            }
        }
    }

    const CVector c1v = v1.codewords.col(out.first.v);
    const CVector c1h = h1.codewords.col(out.first.h);
    Eigen::VectorXcd a(block.cols());
    for (Eigen::Index w = 0; w < block.cols(); ++w) a[w] = corr1[static_cast<std::size_t>(w)](out.first.v, out.first.h);
    const double aa = a.squaredNorm();

    const DftCodebook v2 = dft_codebook(geom.m_v, b_w2);
    const DftCodebook h2 = dft_codebook(geom.m_h, b_w2);
    const std::vector<CMatrix> corr2 = block_correlations(geom, block, v2.codewords, h2.codewords);
    const Eigen::RowVectorXcd overlap_v = c1v.adjoint() * v2.codewords;
    const Eigen::RowVectorXcd overlap_h = c1h.adjoint() * h2.codewords;
    count(stats, static_cast<long long>(v2.size()) * h2.size() * combiners.size());

    best = -1.0;
    out.second = {b_w2, 0, 0};
    for (int i = 0; i < v2.size(); ++i) {
        for (int j = 0; j < h2.size(); ++j) {
            const BeamIndex cand{b_w2, i, j};
            if (same_direction(cand, out.first)) continue;
            double bb = 0.0;
            cplx ab = 0.0;
            for (std::size_t w = 0; w < corr2.size(); ++w) {
                const cplx b = corr2[w](i, j);
                bb += std::norm(b);
                ab += a[static_cast<Eigen::Index>(w)] * std::conj(b);
            }
            const cplx rho = overlap_v[i] * overlap_h[j];
            for (int u = 0; u < combiners.size(); ++u) {
                const double value =
                    pair_metric(aa, bb, ab, combiners.codewords(0, u), combiners.codewords(1, u), rho);
                if (value > best) {
                    best = value;
                    out.second = cand;
                }
            }
        }
    }
    if (best < 0.0) throw Error(ErrorKind::exhausted_codebook, "no second wideband beam available", "b_w2");
    push_bits(out.payload, out.first.v, b_w1);
    push_bits(out.payload, out.first.h, b_w1);
    push_bits(out.payload, out.second.v, b_w2);
    push_bits(out.payload, out.second.h, b_w2);
    return out;
}

Codeword level2_quantize(const CMatrix& block, const UpaGeometry& geom, const LevelOneBeams& beams,
                         const WidebandConfig& config, const CombinerCodebook& combiners, SearchStats* stats) {
    geom.validate();
    config.validate();
    if (block.rows() != geom.antennas() || block.cols() < 1) {
        throw Error(ErrorKind::invalid_dimension, "channel block does not match array");
    }
    if (combiners.size() != (1 << config.b_c) || combiners.n_beams != 2) {
        throw Error(ErrorKind::invalid_input, "combiner codebook does not match b_c", "b_c");
    }
    const double base_v = coordinate(beams.first, true);
    const double base_h = coordinate(beams.first, false);

    // Round 1: c_1 refined on the b_n1 grid.
    const RefinementGrid g1 = refinement_grid(config.b_w1, config.b_n1);
    const CMatrix r1v = shifted(geom.m_v, base_v, g1);
    const CMatrix r1h = shifted(geom.m_h, base_h, g1);
    Eigen::MatrixXd energy = Eigen::MatrixXd::Zero(g1.size(), g1.size());
    for (const CMatrix& c : block_correlations(geom, block, r1v, r1h)) energy += c.cwiseAbs2();
    count(stats, static_cast<long long>(energy.size()));
    int t1v = 0;
    int t1h = 0;
    double best1 = -1.0;
    for (int i = 0; i < energy.rows(); ++i) {
        for (int j = 0; j < energy.cols(); ++j) {
            if (energy(i, j) > best1) {
                best1 = energy(i, j);
                t1v = i;
                t1h = j;
            }
        }
    }
    Codeword f1;
    f1.vector = kron(r1v.col(t1v), r1h.col(t1h));
    f1.indices.family = Family::single_beam;
    f1.indices.first = beams.first;
    f1.indices.second = beams.second;
    f1.indices.theta_v = t1v;
    f1.indices.theta_h = t1h;

    // Round 2: c_1 refined on the b_n2 grid and combined with c_2.
    const RefinementGrid g2 = refinement_grid(config.b_w1, config.b_n2);
    const CMatrix r2v = shifted(geom.m_v, base_v, g2);
    const CMatrix r2h = shifted(geom.m_h, base_h, g2);
    const std::vector<CMatrix> corr = block_correlations(geom, block, r2v, r2h);
    const CVector c2 = beam_vector(geom, beams.second);
    const int q2 = 1 << beams.second.bits;
    const CVector c2v = dft_codeword(geom.m_v, static_cast<double>(beams.second.v + 1) / q2);
    const CVector c2h = dft_codeword(geom.m_h, static_cast<double>(beams.second.h + 1) / q2);
    const Eigen::VectorXcd b = block.adjoint() * c2;
    const double bb = b.squaredNorm();
    const Eigen::RowVectorXcd overlap_v = c2v.adjoint() * r2v;  // conj of (c1')^H c2 per domain
    const Eigen::RowVectorXcd overlap_h = c2h.adjoint() * r2h;
    count(stats, static_cast<long long>(g2.size()) * g2.size() * combiners.size());

    double best2 = -1.0;
    int t2v = 0;
    int t2h = 0;
    int best_u = 0;
    for (int i = 0; i < g2.size(); ++i) {
        for (int j = 0; j < g2.size(); ++j) {
            double aa = 0.0;
            cplx ab = 0.0;
            for (std::size_t w = 0; w < corr.size(); ++w) {
                const cplx a = corr[w](i, j);
                aa += std::norm(a);
                ab += a * std::conj(b[static_cast<Eigen::Index>(w)]);
            }
            const cplx rho = std::conj(overlap_v[i] * overlap_h[j]);
            for (int u = 0; u < combiners.size(); ++u) {
                const double value =
                    pair_metric(aa, bb, ab, combiners.codewords(0, u), combiners.codewords(1, u), rho);
                if (value > best2) {
                    best2 = value;
                    t2v = i;
                    t2h = j;
                    best_u = u;
                }
            }
        }
    }
    Codeword f2;
    f2.vector = pair_vector(kron(r2v.col(t2v), r2h.col(t2h)), c2, combiners, best_u);
    f2.indices.family = Family::two_beam;
    f2.indices.first = beams.first;
    f2.indices.second = beams.second;
    f2.indices.theta_v = t2v;
    f2.indices.theta_h = t2h;
    f2.indices.combiner = best_u;

    // Round 3.
    const bool second = block_gain(block, f2.vector) > block_gain(block, f1.vector);
    Codeword out = second ? std::move(f2) : std::move(f1);
    push_bits(out.payload, second ? 1 : 0, 1);
    if (second) {
        push_bits(out.payload, t2v, config.b_n2);
        push_bits(out.payload, t2h, config.b_n2);
        push_bits(out.payload, best_u, config.b_c);
    } else {
        push_bits(out.payload, t1v, config.b_n1);
        push_bits(out.payload, t1h, config.b_n1);
    }
    return out;
}

CVector reconstruct_wideband(const LevelOneBeams& beams, std::span<const std::uint8_t> payload,
                             const UpaGeometry& geom, const WidebandConfig& config, const CombinerCodebook& combiners) {
    config.validate();
    std::size_t pos = 0;
    const int selector = read_bits(payload, pos, 1);
    const int bits = selector == 0 ? config.b_n1 : config.b_n2;
    const RefinementGrid grid = refinement_grid(config.b_w1, bits);
    const int tv = read_bits(payload, pos, bits);
    const int th = read_bits(payload, pos, bits);
    const CVector c1 = kron(dft_codeword(geom.m_v, coordinate(beams.first, true) + grid.offsets[tv]),
                            dft_codeword(geom.m_h, coordinate(beams.first, false) + grid.offsets[th]));
    CVector out = c1;
    if (selector == 1) {
        const int u = read_bits(payload, pos, config.b_c);
        out = pair_vector(c1, beam_vector(geom, beams.second), combiners, u);
    }
    if (pos != payload.size()) throw Error(ErrorKind::invalid_input, "payload is longer than the configured layout", "payload");
    return out;
}

WidebandQuantizer::WidebandQuantizer(const UpaGeometry& geom, const WidebandGrid& grid, const WidebandConfig& config,
                                     int design_paths, int phase_levels)
    : geom_(geom), grid_(grid), config_(config) {
    geom_.validate();
    config_.validate();
    partition_ = partition_rbs(grid_);
    const CMatrix r = analytic_covariance(geom_, 2, {config_.b_w1, config_.b_w2}, design_paths);
    combiners_ = combiner_codebook(r, 2, config_.b_c, phase_levels);
}

WidebandFeedback WidebandQuantizer::quantize(const CMatrix& channel) const {
    if (channel.rows() != geom_.antennas() || channel.cols() != grid_.tones) {
        throw Error(ErrorKind::invalid_dimension, "channel matrix does not match array and tone grid");
    }
    WidebandFeedback out;
    for (int l = 0; l < grid_.l_blocks; ++l) {
        const ToneRange wb = partition_.wideband[static_cast<std::size_t>(l)];
        out.level1.push_back(level1_beams(channel.middleCols(wb.begin, wb.count), geom_, config_.b_w1, config_.b_w2,
                                          combiners_, &out.stats));
        for (int r = 0; r < grid_.r_blocks; ++r) {
            const ToneRange nb = partition_.narrowband[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)];
            out.rbs.push_back({l, r,
                               level2_quantize(channel.middleCols(nb.begin, nb.count), geom_, out.level1.back(),
                                               config_, combiners_, &out.stats)});
        }
    }
    return out;
}

CMatrix WidebandQuantizer::precoders(const WidebandFeedback& feedback) const {
    CMatrix out(geom_.antennas(), grid_.tones);
    for (const RbFeedback& rb : feedback.rbs) {
        const ToneRange nb = partition_.narrowband[static_cast<std::size_t>(rb.l)][static_cast<std::size_t>(rb.r)];
        for (int w = nb.begin; w < nb.begin + nb.count; ++w) out.col(w) = rb.codeword.vector;
    }
    return out;
}

double mean_tone_gain(const CMatrix& channel, const CMatrix& precoders) {
    if (channel.rows() != precoders.rows() || channel.cols() != precoders.cols() || channel.cols() == 0) {
        throw Error(ErrorKind::invalid_dimension, "precoders do not match channel");
    }
    double sum = 0.0;
    for (Eigen::Index w = 0; w < channel.cols(); ++w) sum += normalized_gain(channel.col(w), precoders.col(w));
    return sum / static_cast<double>(channel.cols());
}

void write_feedback(std::ostream& out, const WidebandFeedback& feedback) {
    const auto bits = [&](const Bits& payload) {
        for (std::uint8_t b : payload) out << static_cast<char>('0' + b);
    };
    for (std::size_t l = 0; l < feedback.level1.size(); ++l) {
        out << l << ",-,";
        bits(feedback.level1[l].payload);
        out << '\n';
        for (const RbFeedback& rb : feedback.rbs) {
            if (rb.l != static_cast<int>(l)) continue;
            out << rb.l << ',' << rb.r << ',';
            bits(rb.codeword.payload);
            out << '\n';
        }
    }
}

}  // namespace upaq
