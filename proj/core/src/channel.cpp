// SPDX-License-Identifier: Apache-2.0
#include "upaq/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace upaq {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_dimension: return "invalid_dimension";
        case ErrorKind::invalid_input: return "invalid_input";
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::numerical_domain: return "numerical_domain";
        case ErrorKind::infeasible_packing: return "infeasible_packing";
        case ErrorKind::degenerate_beamset: return "degenerate_beamset";
        case ErrorKind::exhausted_codebook: return "exhausted_codebook";
        case ErrorKind::insufficient_beams: return "insufficient_beams";
        case ErrorKind::out_of_range: return "out_of_range";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

void UpaGeometry::validate() const {
    if (m_v < 1 || m_h < 1) {
        throw Error(ErrorKind::invalid_dimension, "array dimensions must be >= 1", m_v < 1 ? "m_v" : "m_h");
    }
    if (!(d_v > 0.0) || !(d_h > 0.0)) {
        throw Error(ErrorKind::invalid_input, "antenna spacing must be positive", !(d_v > 0.0) ? "d_v" : "d_h");
    }
}

void PathSet::sort_by_power() {
    std::stable_sort(paths.begin(), paths.end(),
                     [](const Path& a, const Path& b) { return std::norm(a.gain) > std::norm(b.gain); });
}

void WidebandGrid::validate() const {
    if (tones < 1) throw Error(ErrorKind::configuration, "tone count must be >= 1", "tones");
    if (!(spacing > 0.0)) throw Error(ErrorKind::configuration, "subcarrier spacing must be positive", "spacing");
    if (!(carrier > 0.0)) throw Error(ErrorKind::configuration, "carrier frequency must be positive", "carrier");
    if (l_blocks < 1 || tones % l_blocks != 0) {
        throw Error(ErrorKind::configuration, "wideband RB count must divide the tone count", "l_blocks");
    }
    if (r_blocks < 1 || (tones / l_blocks) % r_blocks != 0) {
        throw Error(ErrorKind::configuration, "narrowband RB count must divide the wideband RB size", "r_blocks");
    }
    // lambda[w] > 0 at both band edges.
    if (!(wavelength_ratio(0) > 0.0) || !(wavelength_ratio(tones - 1) > 0.0)) {
        throw Error(ErrorKind::configuration, "band edge wavelength is not positive", "spacing");
    }
}

double WidebandGrid::centered_offset(int w) const noexcept {
    // One-based tone w+1 minus the one-based center (W+1)/2.
    return static_cast<double>(w + 1) - 0.5 * static_cast<double>(tones + 1);
}

double WidebandGrid::wavelength_ratio(int w) const noexcept {
    return 1.0 + spacing / carrier * centered_offset(w);
}

bool direction_in_range(double psi) noexcept { return psi >= -1.0 && psi <= 1.0; }

CVector array_response(int m_a, double d_over_lambda, double psi) {
    if (m_a < 1) throw Error(ErrorKind::invalid_dimension, "array response needs at least one antenna", "m_a");
    CVector out(m_a);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_a));
    const double step = 2.0 * pi * d_over_lambda * psi;
    for (int m = 0; m < m_a; ++m) out[m] = std::polar(scale, step * m);
    return out;
}

namespace {

CVector kron(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

}  // namespace

CVector path_2d(const UpaGeometry& geom, double psi_v, double psi_h) { return path_2d(geom, psi_v, psi_h, 1.0); }

CVector path_2d(const UpaGeometry& geom, double psi_v, double psi_h, double wavelength_ratio) {
    geom.validate();
    return kron(array_response(geom.m_v, geom.d_v * wavelength_ratio, psi_v),
                array_response(geom.m_h, geom.d_h * wavelength_ratio, psi_h));
}

PathSet sample_paths(int p_count, std::uint64_t seed, const DelayProfile& profile) {
    if (p_count < 1) throw Error(ErrorKind::invalid_input, "path count must be >= 1", "paths");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> direction(-1.0, 1.0);
    std::normal_distribution<double> component(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> delay(0.0, profile.max_delay);

    PathSet set;
    set.paths.reserve(static_cast<std::size_t>(p_count));
    for (int p = 0; p < p_count; ++p) {
        Path path;
        path.psi_v = direction(gen);
        path.psi_h = direction(gen);
        const double re = component(gen);
        const double im = component(gen);
        path.gain = cplx(re, im);
        path.delay = profile.max_delay > 0.0 ? delay(gen) : 0.0;
        set.paths.push_back(path);
    }
    return set;
}

CVector narrowband_channel(const UpaGeometry& geom, const PathSet& paths) {
    if (paths.empty()) throw Error(ErrorKind::invalid_input, "path set is empty", "paths");
    geom.validate();
    CVector h = CVector::Zero(geom.antennas());
    for (const Path& p : paths.paths) h += p.gain * path_2d(geom, p.psi_v, p.psi_h);
    return h;
}

CMatrix wideband_channel(const UpaGeometry& geom, const PathSet& paths, const WidebandGrid& grid) {
    if (paths.empty()) throw Error(ErrorKind::invalid_input, "path set is empty", "paths");
    geom.validate();
    grid.validate();
    CMatrix out = CMatrix::Zero(geom.antennas(), grid.tones);
    for (int w = 0; w < grid.tones; ++w) {
        const double ratio = grid.wavelength_ratio(w);
        const double offset = grid.centered_offset(w);
        for (const Path& p : paths.paths) {
            const cplx rotation = std::polar(1.0, -2.0 * pi * grid.spacing * offset * p.delay);
            out.col(w) += rotation * p.gain * path_2d(geom, p.psi_v, p.psi_h, ratio);
        }
    }
    return out;
}

ToneRange wideband_block(const WidebandGrid& grid, int l) {
    grid.validate();
    if (l < 0 || l >= grid.l_blocks) throw Error(ErrorKind::out_of_range, "wideband RB index out of range", "l");
    const int width = grid.tones_per_wideband();
    return {l * width, width};
}

ToneRange narrowband_block(const WidebandGrid& grid, int l, int r) {
    const ToneRange wide = wideband_block(grid, l);
    if (r < 0 || r >= grid.r_blocks) throw Error(ErrorKind::out_of_range, "narrowband RB index out of range", "r");
    const int width = grid.tones_per_narrowband();
    return {wide.begin + r * width, width};
}

CMatrix reshape_channel(const UpaGeometry& geom, const CVector& h) {
    if (h.size() != geom.antennas()) throw Error(ErrorKind::invalid_dimension, "channel length does not match array");
    CMatrix out(geom.m_v, geom.m_h);
    for (int i = 0; i < geom.m_v; ++i)
        for (int j = 0; j < geom.m_h; ++j) out(i, j) = h[i * geom.m_h + j];
    return out;
}

}  // namespace upaq
