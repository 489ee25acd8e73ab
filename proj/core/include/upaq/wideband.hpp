// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "upaq/channel.hpp"
#include "upaq/codebooks.hpp"
#include "upaq/narrowband.hpp"
#include "upaq/types.hpp"

namespace upaq {

/// Bit budgets of the two-level quantizer. Per wideband RB: 2 (b_w1 + b_w2)
/// bits for the shared beams. Per narrowband RB: 2 b_n1 + 1 bits, where
/// round 2 spends 2 b_n2 + b_c = 2 b_n1.
struct WidebandConfig {
    int b_w1 = 5;
    int b_w2 = 5;
    int b_n1 = 3;
    int b_n2 = 2;
    int b_c = 2;

    void validate() const;
    int wideband_bits() const noexcept { return 2 * (b_w1 + b_w2); }
    int narrowband_bits() const noexcept { return 2 * b_n1 + 1; }
};

struct RbPartition {
    std::vector<ToneRange> wideband;                 // L ranges
    std::vector<std::vector<ToneRange>> narrowband;  // L x R ranges
};

/// Throws configuration unless L divides W and R divides W/L.
RbPartition partition_rbs(const WidebandGrid& grid);

/// Beams shared by every narrowband RB of one wideband RB.
struct LevelOneBeams {
    BeamIndex first;   // b_w1-bit codebooks
    BeamIndex second;  // b_w2-bit codebooks
    Bits payload;      // [v1][h1][v2][h2]
};

/// c_1 maximizes |H^H c|^2 over the b_w1-bit product codebook; c_2 and a
/// combiner from `combiners` jointly maximize |H^H f|^2 for f = (z_0 c_1 +
/// z_1 c) / |z_0 c_1 + z_1 c|.
LevelOneBeams level1_beams(const CMatrix& block, const UpaGeometry& geom, int b_w1, int b_w2,
                           const CombinerCodebook& combiners, SearchStats* stats = nullptr);

/// Three rounds on one narrowband RB: c_1 refined with b_n1 bits per domain;
/// c_1 refined with b_n2 bits and combined with c_2; then the larger block
/// gain, selector bit first. Payload is [sel][theta_v][theta_h] or
/// [sel][theta_v][theta_h][z].
Codeword level2_quantize(const CMatrix& block, const UpaGeometry& geom, const LevelOneBeams& beams,
                         const WidebandConfig& config, const CombinerCodebook& combiners,
                         SearchStats* stats = nullptr);

/// Transmit codeword for a narrowband RB from its level-1 beams and payload.
CVector reconstruct_wideband(const LevelOneBeams& beams, std::span<const std::uint8_t> payload,
                             const UpaGeometry& geom, const WidebandConfig& config, const CombinerCodebook& combiners);

struct RbFeedback {
    int l = 0;
    int r = 0;
    Codeword codeword;
};

struct WidebandFeedback {
    std::vector<LevelOneBeams> level1;  // one per wideband RB
    std::vector<RbFeedback> rbs;        // row-major in (l, r)
    SearchStats stats;

    long long total_bits() const noexcept;
};

class WidebandQuantizer {
public:
    WidebandQuantizer(const UpaGeometry& geom, const WidebandGrid& grid, const WidebandConfig& config,
                      int design_paths = 4, int phase_levels = 0);

    WidebandFeedback quantize(const CMatrix& channel) const;

    /// M x W matrix whose column w is the codeword of the RB holding tone w.
    CMatrix precoders(const WidebandFeedback& feedback) const;

    const RbPartition& partition() const noexcept { return partition_; }
    const CombinerCodebook& combiners() const noexcept { return combiners_; }
    const WidebandConfig& config() const noexcept { return config_; }

private:
    UpaGeometry geom_;
    WidebandGrid grid_;
    WidebandConfig config_;
    RbPartition partition_;
    CombinerCodebook combiners_;
};

/// Mean over tones of |h_w^H f_w|^2 / |h_w|^2.
double mean_tone_gain(const CMatrix& channel, const CMatrix& precoders);

/// One record per line: "l,-,bits" for level-1 payloads and "l,r,bits" for
/// narrowband RBs, bits as a 0/1 string.
void write_feedback(std::ostream& out, const WidebandFeedback& feedback);

}  // namespace upaq
