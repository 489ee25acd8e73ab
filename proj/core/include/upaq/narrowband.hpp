// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "upaq/channel.hpp"
#include "upaq/codebooks.hpp"
#include "upaq/types.hpp"

namespace upaq {

using Bits = std::vector<std::uint8_t>;

/// Number of candidate vectors a search touched.
struct SearchStats {
    long long evaluations = 0;
};

/// |h^H f|^2.
double beamforming_gain(const CVector& h, const CVector& f);

/// |h^H f|^2 / |h|^2, in [0, 1] for unit f.
double normalized_gain(const CVector& h, const CVector& f);

/// |H^H f|^2 summed over the columns of H.
double block_gain(const CMatrix& channel, const CVector& f);

/// Unit-norm z maximizing |h^H C z|^2 / |Cz|^2. Throws degenerate_beamset when
/// C^H C has condition number above 1e12.
CVector rayleigh_weight(const CMatrix& beams, const CVector& h);

/// The maximum of |h^H C z|^2 / |Cz|^2, i.e. h^H C (C^H C)^-1 C^H h.
double rayleigh_gain(const CMatrix& beams, const CVector& h);

/// Cz / |Cz|.
CVector combine_beams(const CMatrix& beams, const CVector& weight);

/// Beams C selected by Algorithm 1 and their unquantized weight.
struct QuantizedBeamSet {
    CMatrix beams;                  // M x N, column n = c_n^v (x) c_n^h
    std::vector<BeamIndex> indices;  // one per column
    CVector weight;                 // unit-norm z-bar

    int n_beams() const noexcept { return static_cast<int>(beams.cols()); }
    CVector beamformer() const { return combine_beams(beams, weight); }
};

/// Sequential 2D DFT beam selection. Beam n is drawn from bits_per_beam[n]-bit
/// codebooks and maximizes the principal eigenvalue of
/// (C^H C)^-1 C^H h h^H C; directions already selected are excluded.
QuantizedBeamSet beam_quantize(const CVector& h, const UpaGeometry& geom, int n_beams,
                               const std::vector<int>& bits_per_beam, SearchStats* stats = nullptr);

/// Index of the combiner codeword maximizing |h^H C z|^2 / |Cz|^2.
int select_combiner(const CMatrix& beams, const CVector& h, const CombinerCodebook& combiners);

enum class Family : std::uint8_t { single_beam, two_beam, kronecker, enhanced_kronecker };

/// Everything needed to rebuild a codeword at the transmitter.
struct FeedbackIndices {
    Family family = Family::single_beam;
    BeamIndex first;   // coarse beam c_1 (or the KP domain pair)
    int theta_v = 0;   // refinement offsets, single-beam family
    int theta_h = 0;
    BeamIndex second;  // second beam, two-beam and enhanced KP families
    int combiner = 0;  // combiner index, two-beam family

    friend bool operator==(const FeedbackIndices&, const FeedbackIndices&) = default;
};

struct Codeword {
    CVector vector;
    FeedbackIndices indices;
    Bits payload;  // most-significant bit first

    Family family() const noexcept { return indices.family; }
};

/// Bit split of the three-round narrowband quantizer: coarse B_1 bits per
/// domain, then either B̌_1 refinement bits per domain or a B_2-bit second
/// beam plus a B_c-bit combiner, with 2 B̌_1 = 2 B_2 + B_c.
struct ProposedConfig {
    int b1 = 5;
    int b_refine = 5;
    int b2 = 4;
    int b_c = 2;

    void validate() const;
    /// 2 (B_1 + B_2) + B_c + 1, selector bit included.
    int payload_bits() const noexcept { return 2 * (b1 + b2) + b_c + 1; }
};

/// Round 1: best 2D DFT beam over the 2^{2 b1} joint candidates; ties go to
/// the lowest (v, h) index.
BeamIndex coarse_search(const CVector& h, const UpaGeometry& geom, int b1, SearchStats* stats = nullptr);

/// Round 2, single-beam family: c_1 shifted by the best offset pair from the
/// refinement grid.
Codeword refine_single(const CVector& h, const UpaGeometry& geom, const BeamIndex& coarse, const RefinementGrid& grid,
                       SearchStats* stats = nullptr);

/// Round 2, two-beam family: joint search over a b2-bit second beam and the
/// combiner codebook.
Codeword second_beam(const CVector& h, const UpaGeometry& geom, const BeamIndex& coarse, int b2,
                     const CombinerCodebook& combiners, SearchStats* stats = nullptr);

/// Round 3: the candidate with the larger |h^H f|^2 (ties keep f1) with the
/// family selector bit prepended to its payload.
Codeword select_final(const CVector& h, const Codeword& f1, const Codeword& f2);

/// Payload layout: [selector][v B_1][h B_1] then either [theta_v B̌_1][theta_h B̌_1]
/// (selector 0) or [v2 B_2][h2 B_2][z B_c] (selector 1).
Bits encode_payload(const FeedbackIndices& indices, const ProposedConfig& config);
FeedbackIndices decode_payload(std::span<const std::uint8_t> payload, const ProposedConfig& config);

/// Rebuilds the transmit codeword from fed-back indices.
CVector reconstruct_codeword(const FeedbackIndices& indices, const UpaGeometry& geom, const ProposedConfig& config,
                             const CombinerCodebook& combiners);

/// Three-round narrowband quantizer with codebooks built once per geometry.
class ProposedQuantizer {
public:
    /// The combiner codebook is designed for the analytic covariance of two
    /// beams against design_paths paths.
    ProposedQuantizer(const UpaGeometry& geom, const ProposedConfig& config, int design_paths = 4,
                      int phase_levels = 0);

    struct Trace {
        Codeword single;
        Codeword two_beam;
        SearchStats stats;
    };

    Codeword quantize(const CVector& h, Trace* trace = nullptr) const;

    const UpaGeometry& geometry() const noexcept { return geom_; }
    const ProposedConfig& config() const noexcept { return config_; }
    const CombinerCodebook& combiners() const noexcept { return combiners_; }
    const RefinementGrid& grid() const noexcept { return grid_; }

private:
    UpaGeometry geom_;
    ProposedConfig config_;
    RefinementGrid grid_;
    CombinerCodebook combiners_;
};

/// SVD-based KP codeword c^v (x) (c^h)* from b_total/2-bit codebooks per domain.
Codeword kp_baseline(const CVector& h, const UpaGeometry& geom, int b_total, SearchStats* stats = nullptr);

/// Unweighted sum of the first two SVD Kronecker reconstructions, quantized
/// with b1 and b2 bits per domain, normalized to unit norm.
Codeword enhanced_kp_baseline(const CVector& h, const UpaGeometry& geom, int b1, int b2, SearchStats* stats = nullptr);

struct MimoPrecoder {
    QuantizedBeamSet beams;
    CMatrix precoder;  // M x T, unit-norm columns
    RVector layer_gains;  // generalized eigenvalues, descending
};

/// Algorithm 1 driven by H H^H, then the T dominant generalized
/// eigenvectors of (C^H H H^H C, C^H C) as layer weights.
MimoPrecoder mimo_quantize(const CMatrix& channel, const UpaGeometry& geom, int n_beams,
                           const std::vector<int>& bits_per_beam, int rank);

}  // namespace upaq
