// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "upaq/channel.hpp"
#include "upaq/types.hpp"

namespace upaq {

/// Oversampled DFT codebook with Q = 2^bits columns. Column i holds the
/// codeword at normalized coordinate x = (i+1)/Q, whose entries are
/// (1/sqrt(m_a)) exp(j pi m (2x - 1)).
struct DftCodebook {
    int m_a = 1;
    int bits = 0;
    CMatrix codewords;

    int size() const noexcept { return static_cast<int>(codewords.cols()); }
    double coordinate(int index) const noexcept;
    /// Direction cosine steered by codeword `index` at half-wavelength spacing.
    double direction(int index) const noexcept { return 2.0 * coordinate(index) - 1.0; }
};

DftCodebook dft_codebook(int m_a, int bits);

/// DFT-style codeword at an arbitrary normalized coordinate x.
CVector dft_codeword(int m_a, double coordinate);

/// Symmetric grid of 2^b_refine offsets with step 2^-(b_base + b_refine),
/// used to shift the coordinate of a b_base-bit DFT codeword inside its cell.
struct RefinementGrid {
    int b_base = 0;
    int b_refine = 0;
    std::vector<double> offsets;

    int size() const noexcept { return static_cast<int>(offsets.size()); }
};

RefinementGrid refinement_grid(int b_base, int b_refine);

/// Unit-modulus phase ramp exp(j 2 pi m theta). Its Hadamard product with a
/// DFT codeword at coordinate x is the DFT codeword at x + theta.
CVector shift_vector(int m_a, double theta);

/// Index pair into the vertical and horizontal `bits`-bit DFT codebooks.
struct BeamIndex {
    int bits = 0;
    int v = 0;
    int h = 0;

    friend bool operator==(const BeamIndex&, const BeamIndex&) = default;
};

/// True when both beams steer to the same 2D coordinate, even if they come
/// from codebooks of different resolution.
bool same_direction(const BeamIndex& a, const BeamIndex& b) noexcept;

/// c^v (x) c^h for the given index pair.
CVector beam_vector(const UpaGeometry& geom, const BeamIndex& beam);

/// Table of h^H (c^v_i (x) c^h_j) over all codeword pairs; rows index the
/// vertical codebook, columns the horizontal one.
CMatrix kronecker_correlations(const UpaGeometry& geom, const CVector& h, const CMatrix& vertical,
                               const CMatrix& horizontal);

/// Expected effective-channel covariance E[C^H h h^H C] for N beams selected
/// from bits_per_beam-bit DFT codebooks against the n-th strongest of
/// p_count paths. Assumes half-wavelength spacing.
CMatrix analytic_covariance(const UpaGeometry& geom, int n_beams, const std::vector<int>& bits_per_beam, int p_count);

enum class PackingMethod { automatic, exhaustive, greedy };

struct CombinerCodebook {
    int n_beams = 1;
    int bits = 0;
    int phase_levels = 1;
    /// Phase indices (0..I-1) of each equal-gain seed; entry 0 is always 0.
    std::vector<std::vector<int>> seed_phases;
    CMatrix seeds;      // N x U equal-gain vectors e_u
    CMatrix codewords;  // N x U, z_u = R^{1/2} e_u / |R^{1/2} e_u|
    double min_chordal_distance = 0.0;

    int size() const noexcept { return static_cast<int>(codewords.cols()); }
};

/// I = max(8, 2U).
int default_phase_levels(int u_count) noexcept;

/// Packs U = 2^bits equal-gain seeds on the I-point phase grid to maximize
/// the minimum pairwise chordal distance, then colors them with R^{1/2}.
/// phase_levels <= 0 selects default_phase_levels.
CombinerCodebook combiner_codebook(const CMatrix& covariance, int n_beams, int bits, int phase_levels = 0,
                                   PackingMethod method = PackingMethod::automatic);

/// Hermitian square root with eigenvalues floored at 1e-12. Throws
/// numerical_domain for non-Hermitian or indefinite input.
CMatrix hermitian_sqrt(const CMatrix& m);

double chordal_distance(const CVector& a, const CVector& b);

/// Plain-text codebook format: '#' comment lines, then one codeword per line
/// as space-separated "re,im" pairs.
void write_codebook(std::ostream& out, const CMatrix& codewords, const std::string& comment = {});
CMatrix read_codebook(std::istream& in);

}  // namespace upaq
