// SPDX-License-Identifier: Apache-2.0
#include "upaq/narrowband.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "upaq/analysis.hpp"

namespace upaq {

namespace {

CVector kron(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

double coordinate(int index, int bits) { return static_cast<double>(index + 1) / static_cast<double>(1 << bits); }

void count(SearchStats* stats, long long n) {
    if (stats) stats->evaluations += n;
}

void push_bits(Bits& out, long long value, int width) {
    for (int b = width - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((value >> b) & 1));
}

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> bits) : bits_(bits) {}

    int take(int width) {
        if (pos_ + static_cast<std::size_t>(width) > bits_.size()) {
            throw Error(ErrorKind::invalid_input, "payload is shorter than the configured layout", "payload");
        }
        int value = 0;
        for (int b = 0; b < width; ++b) {
            const std::uint8_t bit = bits_[pos_++];
            if (bit > 1) throw Error(ErrorKind::invalid_input, "payload entries must be 0 or 1", "payload");
            value = (value << 1) | bit;
        }
        return value;
    }
    bool done() const noexcept { return pos_ == bits_.size(); }

private:
    std::span<const std::uint8_t> bits_;
    std::size_t pos_ = 0;
};

// Refined per-domain codewords: the coarse codeword coordinate shifted by each
// grid offset.
CMatrix refined_codewords(int m_a, double base, const RefinementGrid& grid) {
    CMatrix out(m_a, grid.size());
    for (int k = 0; k < grid.size(); ++k) out.col(k) = dft_codeword(m_a, base + grid.offsets[k]);
    return out;
}

CVector refined_beam(const UpaGeometry& geom, const BeamIndex& coarse, const RefinementGrid& grid, int tv, int th) {
    return kron(dft_codeword(geom.m_v, coordinate(coarse.v, coarse.bits) + grid.offsets[tv]),
                dft_codeword(geom.m_h, coordinate(coarse.h, coarse.bits) + grid.offsets[th]));
}

// Shared Algorithm-1 loop. For a single receive antenna the principal
// eigenvalue is the projection energy |P_C h|^2; for several it is the largest
// eigenvalue of Q^H H H^H Q with Q an orthonormal basis of span(C).
QuantizedBeamSet select_beams(const CMatrix& channel, const UpaGeometry& geom, int n_beams,
                              const std::vector<int>& bits_per_beam, SearchStats* stats) {
    geom.validate();
    if (n_beams < 1) throw Error(ErrorKind::invalid_input, "need at least one beam", "n_beams");
    if (static_cast<int>(bits_per_beam.size()) != n_beams) {
        throw Error(ErrorKind::invalid_input, "bits list length must equal the beam count", "bits_per_beam");
    }
    if (channel.rows() != geom.antennas()) throw Error(ErrorKind::invalid_dimension, "channel length does not match array");
    const Eigen::Index rx = channel.cols();
    const int m = geom.antennas();

    QuantizedBeamSet out;
    out.beams.resize(m, 0);
    CMatrix basis(m, 0);

    for (int n = 0; n < n_beams; ++n) {
        const int bits = bits_per_beam[n];
        const DftCodebook cb_v = dft_codebook(geom.m_v, bits);
        const DftCodebook cb_h = dft_codebook(geom.m_h, bits);
        std::vector<CMatrix> channel_corr;
        for (Eigen::Index r = 0; r < rx; ++r)
            channel_corr.push_back(kronecker_correlations(geom, channel.col(r), cb_v.codewords, cb_h.codewords));
        std::vector<CMatrix> basis_corr;
        for (Eigen::Index k = 0; k < basis.cols(); ++k)
            basis_corr.push_back(kronecker_correlations(geom, basis.col(k), cb_v.codewords, cb_h.codewords));
        const CMatrix projected = basis.adjoint() * channel;  // k x V
        const Eigen::Index k_count = basis.cols();
        count(stats, static_cast<long long>(cb_v.size()) * cb_h.size());

        double best = -1.0;
        BeamIndex pick;
        Eigen::RowVectorXcd b(rx);
        CMatrix small(k_count + 1, k_count + 1);
        if (rx > 1 && k_count > 0) small.topLeftCorner(k_count, k_count) = projected * projected.adjoint();
        for (int i = 0; i < cb_v.size(); ++i) {
            for (int j = 0; j < cb_h.size(); ++j) {
                const BeamIndex cand{bits, i, j};
                bool duplicate = false;
                for (const BeamIndex& chosen : out.indices) duplicate = duplicate || same_direction(chosen, cand);
                if (duplicate) continue;
                double residual = 1.0;
                for (Eigen::Index k = 0; k < k_count; ++k) residual -= std::norm(basis_corr[k](i, j));
                if (residual < 1e-10) continue;
                const double inv = 1.0 / std::sqrt(residual);
                for (Eigen::Index r = 0; r < rx; ++r) {
                    cplx hu = channel_corr[r](i, j);
                    for (Eigen::Index k = 0; k < k_count; ++k) hu -= std::conj(projected(k, r)) * basis_corr[k](i, j);
                    b[r] = std::conj(hu) * inv;
                }
                double value;
                if (rx == 1) {
                    value = std::norm(b[0]);  // projection energy of the basis is common to all candidates
                } else if (k_count == 0) {
                    value = b.squaredNorm();
                } else {
                    small.topRightCorner(k_count, 1) = projected * b.adjoint();
                    small.bottomLeftCorner(1, k_count) = small.topRightCorner(k_count, 1).adjoint();
                    small(k_count, k_count) = b.squaredNorm();
                    value = Eigen::SelfAdjointEigenSolver<CMatrix>(small, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
                }
                if (value > best) {
                    best = value;
                    pick = cand;
                }
            }
        }
        if (best < 0.0) throw Error(ErrorKind::exhausted_codebook, "every candidate beam is already selected", "bits_per_beam");

        const CVector c = kron(cb_v.codewords.col(pick.v), cb_h.codewords.col(pick.h));
        CVector u = c - basis * (basis.adjoint() * c);
        u /= u.norm();
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = u;
        out.beams.conservativeResize(Eigen::NoChange, out.beams.cols() + 1);
        out.beams.col(out.beams.cols() - 1) = c;
        out.indices.push_back(pick);
    }
    return out;
}

}  // namespace

double beamforming_gain(const CVector& h, const CVector& f) { return std::norm(h.dot(f)); }

double normalized_gain(const CVector& h, const CVector& f) {
    const double power = h.squaredNorm();
    return power > 0.0 ? beamforming_gain(h, f) / power : 0.0;
}

double block_gain(const CMatrix& channel, const CVector& f) { return (channel.adjoint() * f).squaredNorm(); }

CVector combine_beams(const CMatrix& beams, const CVector& weight) {
    CVector f = beams * weight;
    const double norm = f.norm();
    if (!(norm > 0.0)) throw Error(ErrorKind::degenerate_beamset, "combined beamformer vanishes");
    return f / norm;
}

namespace {

void check_conditioning(const CMatrix& gram) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
        throw Error(ErrorKind::degenerate_beamset, "beam set is rank deficient (condition number above 1e12)");
    }
}

}  // namespace

CVector rayleigh_weight(const CMatrix& beams, const CVector& h) {
    if (beams.cols() < 1 || beams.rows() != h.size()) throw Error(ErrorKind::invalid_dimension, "beam set does not match channel");
    const CMatrix gram = beams.adjoint() * beams;
    check_conditioning(gram);
    const CVector effective = beams.adjoint() * h;
    // The pencil (C^H h h^H C, C^H C) has rank one; its principal generalized
    // eigenvector is (C^H C)^-1 C^H h.
    CVector z = gram.ldlt().solve(effective);
    const double norm = z.norm();
    if (!(norm > 0.0)) {
        z = CVector::Zero(beams.cols());
        z[0] = 1.0;
        return z;
    }
    return z / norm;
}

double rayleigh_gain(const CMatrix& beams, const CVector& h) {
    const CMatrix gram = beams.adjoint() * beams;
    check_conditioning(gram);
    const CVector effective = beams.adjoint() * h;
    return std::real(effective.dot(gram.ldlt().solve(effective)));
}

QuantizedBeamSet beam_quantize(const CVector& h, const UpaGeometry& geom, int n_beams,
                               const std::vector<int>& bits_per_beam, SearchStats* stats) {
    QuantizedBeamSet out = select_beams(h, geom, n_beams, bits_per_beam, stats);
    out.weight = rayleigh_weight(out.beams, h);
    return out;
}

int select_combiner(const CMatrix& beams, const CVector& h, const CombinerCodebook& combiners) {
    if (combiners.n_beams != beams.cols()) throw Error(ErrorKind::invalid_dimension, "combiner size does not match beam count");
    const CVector effective = beams.adjoint() * h;
    const CMatrix gram = beams.adjoint() * beams;
    int best = 0;
    double best_value = -1.0;
    for (int u = 0; u < combiners.size(); ++u) {
        const CVector z = combiners.codewords.col(u);
        const double value = std::norm(effective.dot(z)) / std::real(z.dot(gram * z));
        if (value > best_value) {
            best_value = value;
            best = u;
        }
    }
    return best;
}

void ProposedConfig::validate() const {
    if (b1 < 1) throw Error(ErrorKind::configuration, "coarse bits must be >= 1", "b1");
    if (b_refine < 0) throw Error(ErrorKind::configuration, "refinement bits must be >= 0", "b_refine");
    if (b2 < 1) throw Error(ErrorKind::configuration, "second-beam bits must be >= 1", "b2");
    if (b_c < 0) throw Error(ErrorKind::configuration, "combiner bits must be >= 0", "b_c");
    if (2 * b_refine != 2 * b2 + b_c) {
        throw Error(ErrorKind::configuration, "round-2 split requires 2*b_refine == 2*b2 + b_c", "b_refine");
    }
}

BeamIndex coarse_search(const CVector& h, const UpaGeometry& geom, int b1, SearchStats* stats) {
    geom.validate();
    if (b1 < 1) throw Error(ErrorKind::invalid_input, "coarse bits must be >= 1", "b1");
    const DftCodebook cb_v = dft_codebook(geom.m_v, b1);
    const DftCodebook cb_h = dft_codebook(geom.m_h, b1);
    const CMatrix corr = kronecker_correlations(geom, h, cb_v.codewords, cb_h.codewords);
    count(stats, static_cast<long long>(corr.size()));
    BeamIndex best{b1, 0, 0};
    double best_value = -1.0;
    for (int i = 0; i < corr.rows(); ++i) {
        for (int j = 0; j < corr.cols(); ++j) {
            const double value = std::norm(corr(i, j));
            if (value > best_value) {
                best_value = value;
                best = {b1, i, j};
            }
        }
    }
    return best;
}

Codeword refine_single(const CVector& h, const UpaGeometry& geom, const BeamIndex& coarse, const RefinementGrid& grid,
                       SearchStats* stats) {
    geom.validate();
    const CMatrix rv = refined_codewords(geom.m_v, coordinate(coarse.v, coarse.bits), grid);
    const CMatrix rh = refined_codewords(geom.m_h, coordinate(coarse.h, coarse.bits), grid);
    const CMatrix corr = kronecker_correlations(geom, h, rv, rh);
    count(stats, static_cast<long long>(corr.size()));
    int best_v = 0;
    int best_h = 0;
    double best_value = -1.0;
    for (int i = 0; i < corr.rows(); ++i) {
        for (int j = 0; j < corr.cols(); ++j) {
            const double value = std::norm(corr(i, j));
            if (value > best_value) {
                best_value = value;
                best_v = i;
                best_h = j;
            }
        }
    }
    Codeword out;
    out.vector = kron(rv.col(best_v), rh.col(best_h));
    out.indices.family = Family::single_beam;
    out.indices.first = coarse;
    out.indices.theta_v = best_v;
    out.indices.theta_h = best_h;
    push_bits(out.payload, coarse.v, coarse.bits);
    push_bits(out.payload, coarse.h, coarse.bits);
    push_bits(out.payload, best_v, grid.b_refine);
    push_bits(out.payload, best_h, grid.b_refine);
    return out;
}

Codeword second_beam(const CVector& h, const UpaGeometry& geom, const BeamIndex& coarse, int b2,
                     const CombinerCodebook& combiners, SearchStats* stats) {
    geom.validate();
    if (combiners.n_beams != 2) throw Error(ErrorKind::invalid_input, "second-beam search needs a two-beam combiner codebook");
    const CVector c1v = dft_codeword(geom.m_v, coordinate(coarse.v, coarse.bits));
    const CVector c1h = dft_codeword(geom.m_h, coordinate(coarse.h, coarse.bits));
    const CVector c1 = kron(c1v, c1h);
    const cplx a = h.dot(c1);  // h^H c1

    const DftCodebook cb_v = dft_codebook(geom.m_v, b2);
    const DftCodebook cb_h = dft_codebook(geom.m_h, b2);
    const CMatrix corr = kronecker_correlations(geom, h, cb_v.codewords, cb_h.codewords);
    const Eigen::RowVectorXcd overlap_v = c1v.adjoint() * cb_v.codewords;
    const Eigen::RowVectorXcd overlap_h = c1h.adjoint() * cb_h.codewords;
    count(stats, static_cast<long long>(corr.size()) * combiners.size());

    double best_value = -1.0;
    BeamIndex best_beam{b2, 0, 0};
    int best_u = 0;
    for (int i = 0; i < cb_v.size(); ++i) {
        for (int j = 0; j < cb_h.size(); ++j) {
            const BeamIndex cand{b2, i, j};
            if (same_direction(cand, coarse)) continue;
            const cplx b = corr(i, j);
            const cplx rho = overlap_v[i] * overlap_h[j];  // c1^H c
            for (int u = 0; u < combiners.size(); ++u) {
                const cplx z0 = combiners.codewords(0, u);
                const cplx z1 = combiners.codewords(1, u);
                const double num = std::norm(a * z0 + b * z1);
                const double den = std::norm(z0) + std::norm(z1) + 2.0 * std::real(std::conj(z0) * z1 * rho);
                const double value = den > 1e-15 ? num / den : 0.0;
                if (value > best_value) {
                    best_value = value;
                    best_beam = cand;
                    best_u = u;
                }
            }
        }
    }
    if (best_value < 0.0) throw Error(ErrorKind::exhausted_codebook, "no second beam candidate available", "b2");

    CMatrix pair(geom.antennas(), 2);
    pair.col(0) = c1;
    pair.col(1) = kron(cb_v.codewords.col(best_beam.v), cb_h.codewords.col(best_beam.h));
    Codeword out;
    out.vector = combine_beams(pair, combiners.codewords.col(best_u));
    out.indices.family = Family::two_beam;
    out.indices.first = coarse;
    out.indices.second = best_beam;
    out.indices.combiner = best_u;
    push_bits(out.payload, coarse.v, coarse.bits);
    push_bits(out.payload, coarse.h, coarse.bits);
    push_bits(out.payload, best_beam.v, b2);
    push_bits(out.payload, best_beam.h, b2);
    push_bits(out.payload, best_u, combiners.bits);
    return out;
}

Codeword select_final(const CVector& h, const Codeword& f1, const Codeword& f2) {
    const bool second = beamforming_gain(h, f2.vector) > beamforming_gain(h, f1.vector);
    Codeword out = second ? f2 : f1;
    out.payload.insert(out.payload.begin(), static_cast<std::uint8_t>(second ? 1 : 0));
    return out;
}

Bits encode_payload(const FeedbackIndices& indices, const ProposedConfig& config) {
    config.validate();
    Bits out;
    switch (indices.family) {
        case Family::single_beam:
            push_bits(out, 0, 1);
            push_bits(out, indices.first.v, config.b1);
            push_bits(out, indices.first.h, config.b1);
            push_bits(out, indices.theta_v, config.b_refine);
            push_bits(out, indices.theta_h, config.b_refine);
            break;
        case Family::two_beam:
            push_bits(out, 1, 1);
            push_bits(out, indices.first.v, config.b1);
            push_bits(out, indices.first.h, config.b1);
            push_bits(out, indices.second.v, config.b2);
            push_bits(out, indices.second.h, config.b2);
            push_bits(out, indices.combiner, config.b_c);
            break;
        default:
            throw Error(ErrorKind::invalid_input, "only proposed-quantizer families have a payload layout", "family");
    }
    return out;
}

FeedbackIndices decode_payload(std::span<const std::uint8_t> payload, const ProposedConfig& config) {
    config.validate();
    BitReader reader(payload);
    FeedbackIndices out;
    const int selector = reader.take(1);
    out.first.bits = config.b1;
    out.first.v = reader.take(config.b1);
    out.first.h = reader.take(config.b1);
    if (selector == 0) {
        out.family = Family::single_beam;
        out.theta_v = reader.take(config.b_refine);
        out.theta_h = reader.take(config.b_refine);
    } else {
        out.family = Family::two_beam;
        out.second.bits = config.b2;
        out.second.v = reader.take(config.b2);
        out.second.h = reader.take(config.b2);
        out.combiner = reader.take(config.b_c);
    }
    if (!reader.done()) throw Error(ErrorKind::invalid_input, "payload is longer than the configured layout", "payload");
    return out;
}

CVector reconstruct_codeword(const FeedbackIndices& indices, const UpaGeometry& geom, const ProposedConfig& config,
                             const CombinerCodebook& combiners) {
    config.validate();
    if (indices.family == Family::single_beam) {
        return refined_beam(geom, indices.first, refinement_grid(config.b1, config.b_refine), indices.theta_v,
                            indices.theta_h);
    }
    if (indices.family != Family::two_beam) {
        throw Error(ErrorKind::invalid_input, "only proposed-quantizer families can be reconstructed", "family");
    }
    CMatrix pair(geom.antennas(), 2);
    pair.col(0) = beam_vector(geom, indices.first);
    pair.col(1) = beam_vector(geom, indices.second);
    return combine_beams(pair, combiners.codewords.col(indices.combiner));
}

ProposedQuantizer::ProposedQuantizer(const UpaGeometry& geom, const ProposedConfig& config, int design_paths,
                                     int phase_levels)
    : geom_(geom), config_(config) {
    geom_.validate();
    config_.validate();
    grid_ = refinement_grid(config_.b1, config_.b_refine);
    const CMatrix r = analytic_covariance(geom_, 2, {config_.b1, config_.b2}, design_paths);
    combiners_ = combiner_codebook(r, 2, config_.b_c, phase_levels);
}

Codeword ProposedQuantizer::quantize(const CVector& h, Trace* trace) const {
    SearchStats stats;
    const BeamIndex coarse = coarse_search(h, geom_, config_.b1, &stats);
    Codeword single = refine_single(h, geom_, coarse, grid_, &stats);
    Codeword pair = second_beam(h, geom_, coarse, config_.b2, combiners_, &stats);
    Codeword final = select_final(h, single, pair);
    if (trace) {
        trace->single = std::move(single);
        trace->two_beam = std::move(pair);
        trace->stats = stats;
    }
    return final;
}

namespace {

int best_codeword(const CVector& target, const DftCodebook& cb) {
    int best = 0;
    double best_value = -1.0;
    for (int q = 0; q < cb.size(); ++q) {
        const double value = std::norm(target.dot(cb.codewords.col(q)));
        if (value > best_value) {
            best_value = value;
            best = q;
        }
    }
    return best;
}

}  // namespace

Codeword kp_baseline(const CVector& h, const UpaGeometry& geom, int b_total, SearchStats* stats) {
    geom.validate();
    if (b_total < 2 || b_total % 2 != 0) throw Error(ErrorKind::invalid_input, "KP budget must be a positive even number", "b_total");
    const int bits = b_total / 2;
    Eigen::JacobiSVD<CMatrix> svd(reshape_channel(geom, h), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const DftCodebook cb_v = dft_codebook(geom.m_v, bits);
    const DftCodebook cb_h = dft_codebook(geom.m_h, bits);
    const int qv = best_codeword(svd.matrixU().col(0), cb_v);
    const int qh = best_codeword(svd.matrixV().col(0), cb_h);
    count(stats, 2LL * (1LL << bits));

    Codeword out;
    out.vector = kron(cb_v.codewords.col(qv), cb_h.codewords.col(qh).conjugate());
    out.indices.family = Family::kronecker;
    out.indices.first = {bits, qv, qh};
    push_bits(out.payload, qv, bits);
    push_bits(out.payload, qh, bits);
    return out;
}

Codeword enhanced_kp_baseline(const CVector& h, const UpaGeometry& geom, int b1, int b2, SearchStats* stats) {
    geom.validate();
    if (b1 < 1 || b2 < 1) throw Error(ErrorKind::invalid_input, "enhanced KP needs at least one bit per beam", b1 < 1 ? "b1" : "b2");
    Eigen::JacobiSVD<CMatrix> svd(reshape_channel(geom, h), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const DftCodebook v1 = dft_codebook(geom.m_v, b1);
    const DftCodebook h1 = dft_codebook(geom.m_h, b1);
    const int qv1 = best_codeword(svd.matrixU().col(0), v1);
    const int qh1 = best_codeword(svd.matrixV().col(0), h1);
    const CVector first = kron(v1.codewords.col(qv1), h1.codewords.col(qh1).conjugate());
    count(stats, 2LL * (1LL << b1));

    Codeword out;
    out.indices.family = Family::enhanced_kronecker;
    out.indices.first = {b1, qv1, qh1};
    out.vector = first;
    push_bits(out.payload, qv1, b1);
    push_bits(out.payload, qh1, b1);
    if (std::min(geom.m_v, geom.m_h) >= 2) {
        const DftCodebook v2 = dft_codebook(geom.m_v, b2);
        const DftCodebook h2 = dft_codebook(geom.m_h, b2);
        const int qv2 = best_codeword(svd.matrixU().col(1), v2);
        const int qh2 = best_codeword(svd.matrixV().col(1), h2);
        count(stats, 2LL * (1LL << b2));
        const CVector sum = first + kron(v2.codewords.col(qv2), h2.codewords.col(qh2).conjugate());
        if (sum.norm() > 1e-9) out.vector = sum / sum.norm();
        out.indices.second = {b2, qv2, qh2};
        push_bits(out.payload, qv2, b2);
        push_bits(out.payload, qh2, b2);
    }
    return out;
}

MimoPrecoder mimo_quantize(const CMatrix& channel, const UpaGeometry& geom, int n_beams,
                           const std::vector<int>& bits_per_beam, int rank) {
    if (rank < 1) throw Error(ErrorKind::invalid_input, "transmission rank must be >= 1", "rank");
    if (rank > n_beams) throw Error(ErrorKind::insufficient_beams, "rank exceeds the number of beams", "rank");
    if (rank > channel.cols()) throw Error(ErrorKind::invalid_input, "rank exceeds the number of receive antennas", "rank");

    MimoPrecoder out;
    out.beams = select_beams(channel, geom, n_beams, bits_per_beam, nullptr);
    const CMatrix& c = out.beams.beams;
    const CMatrix gram = c.adjoint() * c;
    check_conditioning(gram);
    const CMatrix effective = c.adjoint() * channel;
    const CMatrix numerator = effective * effective.adjoint();
    Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> pencil(numerator, gram);
    const Eigen::Index n = c.cols();

    out.precoder.resize(c.rows(), rank);
    out.layer_gains.resize(rank);
    for (int t = 0; t < rank; ++t) {
        const Eigen::Index col = n - 1 - t;  // eigenvalues come back ascending
        CVector z = pencil.eigenvectors().col(col);
        z /= z.norm();
        if (t == 0) out.beams.weight = z;
        out.precoder.col(t) = combine_beams(c, z);
        out.layer_gains[t] = pencil.eigenvalues()[col];
    }
    return out;
}

}  // namespace upaq
