// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "upaq/channel.hpp"
#include "upaq/types.hpp"

namespace upaq {

/// Bit split r_N = [B_1, ..., B_N, B_c] for Algorithm-1 style quantizers.
struct FeedbackAllocation {
    std::vector<int> bits_per_beam;
    int b_c = 0;

    int n_beams() const noexcept { return static_cast<int>(bits_per_beam.size()); }
    /// B_T = B_c + sum 2 B_n.
    int total() const noexcept;
    void validate() const;
};

/// Expected |d^H c|^2 between a uniformly drawn half-wavelength array
/// response and its best codeword in a b-bit DFT codebook.
double gamma_sq(int m_a, int b);

/// E[|alpha_n|^2] for the n-th strongest of P unit-power Rayleigh gains:
/// sum_{q=n}^{P} 1/q.
double order_stat_gain(int p_count, int n);

/// Approximate lower bound on E[max_z |h^H C z|^2 / |Cz|^2] for Algorithm-1
/// beams (unnormalized: the channel carries power P).
double gbq_lower(const UpaGeometry& geom, int p_count, const std::vector<int>& bits_per_beam);

/// Two-beam combining efficiency with U uniformly spaced combiners:
/// (1 + (U/pi) sin(pi/U)) / 2.
double gbc_closed(int u_count);

/// Combining efficiency for N beams when each of the N-1 relative phases is
/// quantized to K = U^(1/(N-1)) uniform levels and the nearest combiner is
/// chosen: (N + 2(N-1)s + (N-1)(N-2)s^2) / N^2 with s = sin(pi/K)/(pi/K).
/// Equals gbc_closed for N = 2 and 1 for N = 1.
double gbc_phase_grid(int n_beams, int u_count);

struct ExpectedGain {
    double g_bq = 0.0;
    double g_bc = 1.0;
    double total = 0.0;
    bool combiner_approximate = false;  // N >= 3 uses gbc_phase_grid
};

ExpectedGain expected_gain(const UpaGeometry& geom, int p_count, const FeedbackAllocation& alloc);

struct AllocationChoice {
    FeedbackAllocation alloc;
    double objective = 0.0;  // mean expected gain over the P set
};

/// Every feasible split of b_total over N in {1,2,3} with B_n >= 1 and
/// B_c = 0 for N = 1, ranked by mean expected gain over p_set.
std::vector<AllocationChoice> enumerate_allocations(const UpaGeometry& geom, int b_total, const std::vector<int>& p_set);

/// Best allocation; ties prefer smaller N, then the lexicographically
/// smaller [B_1..B_N, B_c].
AllocationChoice allocate_feedback(const UpaGeometry& geom, int b_total, const std::vector<int>& p_set);

enum class Scheme { proposed, enhanced_kp, kp };

struct Budget {
    long long feedback_bits = 0;
    long long vector_evaluations = 0;
};

/// Feedback overhead and search cost per quantized tone.
/// proposed: bits = {B_1, B_2, B_c}; enhanced_kp: {B_1, B_2}; kp: {B_1}.
Budget complexity_budget(Scheme scheme, const std::vector<int>& bits);

/// 2 (B_W1 + B_W2) L + (2 B_N1 + 1) R L.
long long wideband_overhead(const WidebandGrid& grid, int b_w1, int b_w2, int b_n1);

struct CorrelationProfile {
    std::vector<double> gamma_h;   // indexed by tone lag
    std::vector<double> gamma_c1;  // indexed by tone lag
};

/// Tone-pair correlations of one wideband realization, averaged over all
/// pairs at each lag 0..max_lag: the normalized channel correlation and the
/// overlap of the per-tone dominant 2D DFT beams (b-bit codebooks).
CorrelationProfile cross_tone_correlation(const CMatrix& channel, const UpaGeometry& geom, int b, int max_lag = -1);

/// Half-wavelength spacing is assumed by every closed form above; returns a
/// warning string for other geometries, empty otherwise.
std::string spacing_warning(const UpaGeometry& geom);

}  // namespace upaq
