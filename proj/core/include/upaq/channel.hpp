// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "upaq/types.hpp"

namespace upaq {

/// Uniform planar array: m_v rows by m_h columns. Spacings are expressed in
/// carrier wavelengths (0.5 is half-wavelength spacing).
struct UpaGeometry {
    int m_v = 1;
    int m_h = 1;
    double d_v = 0.5;
    double d_h = 0.5;

    int antennas() const noexcept { return m_v * m_h; }
    bool half_wavelength() const noexcept { return d_v == 0.5 && d_h == 0.5; }
    void validate() const;
};

/// One radio path. Directions are the direction cosines psi in [-1, 1].
struct Path {
    double psi_v = 0.0;
    double psi_h = 0.0;
    cplx gain{1.0, 0.0};
    double delay = 0.0;  // seconds
};

struct PathSet {
    std::vector<Path> paths;

    std::size_t size() const noexcept { return paths.size(); }
    bool empty() const noexcept { return paths.empty(); }

    /// Sorts by |gain| descending (stable, so equal powers keep draw order).
    void sort_by_power();
};

/// Excess-delay distribution. Delays are drawn U(0, max_delay).
struct DelayProfile {
    double max_delay = 1e-6;
};

/// Multi-carrier layout: W tones split into L wideband RBs, each split into R
/// narrowband RBs.
struct WidebandGrid {
    int tones = 1;
    double spacing = 15e3;
    double carrier = 2e9;
    int l_blocks = 1;
    int r_blocks = 1;

    void validate() const;

    /// lambda_c / lambda[w] for the zero-based tone index w. The center tone
    /// (W+1)/2 in one-based numbering has ratio 1.
    double wavelength_ratio(int w) const noexcept;

    /// Tone offset from the band center, in subcarriers.
    double centered_offset(int w) const noexcept;

    int tones_per_wideband() const noexcept { return tones / l_blocks; }
    int tones_per_narrowband() const noexcept { return tones / (l_blocks * r_blocks); }
};

bool direction_in_range(double psi) noexcept;

/// (1/sqrt(m_a)) exp(j 2 pi d m psi), m = 0..m_a-1. Directions outside
/// [-1, 1] are accepted; check them with direction_in_range().
CVector array_response(int m_a, double d_over_lambda, double psi);

/// Kronecker product of the vertical and horizontal array responses.
CVector path_2d(const UpaGeometry& geom, double psi_v, double psi_h);

/// Same as path_2d with spacings scaled by lambda_c / lambda[w].
CVector path_2d(const UpaGeometry& geom, double psi_v, double psi_h, double wavelength_ratio);

/// Draws p_count paths: directions U(-1,1), gains CN(0,1), delays from the
/// profile. Deterministic for a given seed.
PathSet sample_paths(int p_count, std::uint64_t seed, const DelayProfile& profile = {});

CVector narrowband_channel(const UpaGeometry& geom, const PathSet& paths);

/// M x W channel matrix; column w uses the per-tone wavelength and the delay
/// phase exp(-j 2 pi Delta (w - center) t_p).
CMatrix wideband_channel(const UpaGeometry& geom, const PathSet& paths, const WidebandGrid& grid);

/// Half-open column range [begin, begin + count).
struct ToneRange {
    int begin = 0;
    int count = 0;
};

/// Columns of wideband RB l (zero-based).
ToneRange wideband_block(const WidebandGrid& grid, int l);

/// Columns of narrowband RB r inside wideband RB l (both zero-based).
ToneRange narrowband_block(const WidebandGrid& grid, int l, int r);

/// Reshapes h into the m_v x m_h matrix whose (i, j) entry is h[i m_h + j].
CMatrix reshape_channel(const UpaGeometry& geom, const CVector& h);

}  // namespace upaq
