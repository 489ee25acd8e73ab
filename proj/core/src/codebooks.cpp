// SPDX-License-Identifier: Apache-2.0
#include "upaq/codebooks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "upaq/analysis.hpp"

namespace upaq {

double DftCodebook::coordinate(int index) const noexcept {
    return static_cast<double>(index + 1) / static_cast<double>(size());
}

CVector dft_codeword(int m_a, double coordinate) { return array_response(m_a, 0.5, 2.0 * coordinate - 1.0); }

DftCodebook dft_codebook(int m_a, int bits) {
    if (m_a < 1) throw Error(ErrorKind::invalid_dimension, "DFT codebook needs at least one antenna", "m_a");
    if (bits < 0 || bits > 24) throw Error(ErrorKind::invalid_input, "DFT codebook bits out of range", "bits");
    DftCodebook cb;
    cb.m_a = m_a;
    cb.bits = bits;
    const int q_count = 1 << bits;
    cb.codewords.resize(m_a, q_count);
    for (int q = 0; q < q_count; ++q) {
        cb.codewords.col(q) = dft_codeword(m_a, static_cast<double>(q + 1) / q_count);
    }
    return cb;
}

RefinementGrid refinement_grid(int b_base, int b_refine) {
    if (b_base < 0) throw Error(ErrorKind::invalid_input, "base bits must be >= 0", "b_base");
    if (b_refine < 0 || b_refine > 24) throw Error(ErrorKind::invalid_input, "refinement bits out of range", "b_refine");
    RefinementGrid grid;
    grid.b_base = b_base;
    grid.b_refine = b_refine;
    const int count = 1 << b_refine;
    const double extreme = (1.0 - std::ldexp(1.0, -b_refine)) / std::ldexp(1.0, b_base + 1);
    const double step = std::ldexp(1.0, -(b_base + b_refine));
    grid.offsets.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) grid.offsets.push_back(-extreme + step * k);
    return grid;
}

CVector shift_vector(int m_a, double theta) {
    if (m_a < 1) throw Error(ErrorKind::invalid_dimension, "shift vector needs at least one antenna", "m_a");
    CVector out(m_a);
    for (int m = 0; m < m_a; ++m) out[m] = std::polar(1.0, 2.0 * pi * theta * m);
    return out;
}

bool same_direction(const BeamIndex& a, const BeamIndex& b) noexcept {
    // (v+1)/2^bits compared exactly by cross-multiplying.
    const auto scaled = [](int index, int other_bits) { return static_cast<long long>(index + 1) << other_bits; };
    return scaled(a.v, b.bits) == scaled(b.v, a.bits) && scaled(a.h, b.bits) == scaled(b.h, a.bits);
}

CVector beam_vector(const UpaGeometry& geom, const BeamIndex& beam) {
    const int q_count = 1 << beam.bits;
    const CVector cv = dft_codeword(geom.m_v, static_cast<double>(beam.v + 1) / q_count);
    const CVector ch = dft_codeword(geom.m_h, static_cast<double>(beam.h + 1) / q_count);
    CVector out(geom.antennas());
    for (int i = 0; i < geom.m_v; ++i) out.segment(i * geom.m_h, geom.m_h) = cv[i] * ch;
    return out;
}

CMatrix kronecker_correlations(const UpaGeometry& geom, const CVector& h, const CMatrix& vertical,
                               const CMatrix& horizontal) {
    if (vertical.rows() != geom.m_v || horizontal.rows() != geom.m_h) {
        throw Error(ErrorKind::invalid_dimension, "codebook length does not match array");
    }
    // h^H (a (x) b) = a^T conj(Hr) b with Hr the m_v x m_h reshape of h.
    const CMatrix hr_conj = reshape_channel(geom, h).conjugate();
    return vertical.transpose() * (hr_conj * horizontal);
}

CMatrix analytic_covariance(const UpaGeometry& geom, int n_beams, const std::vector<int>& bits_per_beam, int p_count) {
    geom.validate();
    if (n_beams < 1) throw Error(ErrorKind::invalid_input, "need at least one beam", "n_beams");
    if (static_cast<int>(bits_per_beam.size()) != n_beams) {
        throw Error(ErrorKind::invalid_input, "bits list length must equal the beam count", "bits_per_beam");
    }
    if (p_count < 1) throw Error(ErrorKind::invalid_input, "path count must be >= 1", "paths");

    // Per-domain expectation of (c_c)^H d_p d_p^H c_d for the four cases of
    // path/beam coincidence.
    const auto domain_term = [&](int m_a, int p, int c, int d) {
        const double ma = m_a;
        if (c == d) return p == c ? gamma_sq(m_a, bits_per_beam[c]) : 1.0 / ma;
        if (p == c) return std::sqrt(gamma_sq(m_a, bits_per_beam[c])) / ma;
        if (p == d) return std::sqrt(gamma_sq(m_a, bits_per_beam[d])) / ma;
        return 1.0 / (ma * ma);
    };

    CMatrix r = CMatrix::Zero(n_beams, n_beams);
    for (int c = 0; c < n_beams; ++c) {
        for (int d = 0; d < n_beams; ++d) {
            double entry = 0.0;
            for (int p = 0; p < p_count; ++p) {
                entry += order_stat_gain(p_count, p + 1) * domain_term(geom.m_v, p, c, d) *
                         domain_term(geom.m_h, p, c, d);
            }
            r(c, d) = entry;
        }
    }
    return r;
}

int default_phase_levels(int u_count) noexcept { return std::max(8, 2 * u_count); }

CMatrix hermitian_sqrt(const CMatrix& m) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::invalid_dimension, "matrix square root needs a square matrix");
    const double scale = 1.0 + m.norm();
    if ((m - m.adjoint()).norm() > 1e-9 * scale) {
        throw Error(ErrorKind::numerical_domain, "covariance is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (m + m.adjoint()));
    RVector values = eig.eigenvalues();
    const double largest = std::max(1.0, values.cwiseAbs().maxCoeff());
    if (values.minCoeff() < -1e-9 * largest) {
        throw Error(ErrorKind::numerical_domain, "covariance is not positive semi-definite");
    }
    values = values.cwiseMax(1e-12).cwiseSqrt();
    return eig.eigenvectors() * values.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
}

double chordal_distance(const CVector& a, const CVector& b) {
    const double coherence = std::norm(a.dot(b));
    return std::sqrt(std::max(0.0, 1.0 - coherence));
}

namespace {

struct Packing {
    std::vector<int> classes;  // chosen class indices, class 0 first
    double max_coherence = 1.0;
};

// Lexicographic depth-first search; a branch is cut once its coherence can no
// longer beat the incumbent, so the first optimum found is the
// lexicographically smallest one.
void pack_exhaustive(const Eigen::MatrixXd& coherence, int u_count, std::vector<int>& current, double current_max,
                     Packing& best) {
    const int k = static_cast<int>(coherence.rows());
    if (static_cast<int>(current.size()) == u_count) {
        if (current_max < best.max_coherence - 1e-12) {
            best.classes = current;
            best.max_coherence = current_max;
        }
        return;
    }
    const int remaining = u_count - static_cast<int>(current.size());
    for (int next = current.back() + 1; next <= k - remaining; ++next) {
        double worst = current_max;
        for (int chosen : current) worst = std::max(worst, coherence(chosen, next));
        if (worst >= best.max_coherence - 1e-12) continue;
        current.push_back(next);
        pack_exhaustive(coherence, u_count, current, worst, best);
        current.pop_back();
    }
}

Packing pack_greedy(const Eigen::MatrixXd& coherence, int u_count) {
    const int k = static_cast<int>(coherence.rows());
    Packing out;
    out.classes.push_back(0);
    std::vector<double> nearest(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) nearest[i] = coherence(0, i);
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    used[0] = true;
    out.max_coherence = 0.0;
    while (static_cast<int>(out.classes.size()) < u_count) {
        int pick = -1;
        for (int i = 0; i < k; ++i) {
            if (used[i]) continue;
            if (pick < 0 || nearest[i] < nearest[pick] - 1e-12) pick = i;
        }
        used[pick] = true;
        out.max_coherence = std::max(out.max_coherence, nearest[pick]);
        out.classes.push_back(pick);
        for (int i = 0; i < k; ++i) nearest[i] = std::max(nearest[i], coherence(pick, i));
    }
    if (u_count == 1) out.max_coherence = 0.0;
    return out;
}

double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

CombinerCodebook combiner_codebook(const CMatrix& covariance, int n_beams, int bits, int phase_levels,
                                   PackingMethod method) {
    if (n_beams < 1) throw Error(ErrorKind::invalid_input, "need at least one beam", "n_beams");
    if (covariance.rows() != n_beams || covariance.cols() != n_beams) {
        throw Error(ErrorKind::invalid_dimension, "covariance must be N x N", "covariance");
    }
    if (bits < 0 || bits > 16) throw Error(ErrorKind::invalid_input, "combiner bits out of range", "b_c");
    const int u_count = 1 << bits;
    const int levels = phase_levels > 0 ? phase_levels : default_phase_levels(u_count);

    // Equal-gain classes modulo global phase: the first entry has phase 0.
    double class_count_d = std::pow(static_cast<double>(levels), n_beams - 1);
    if (static_cast<double>(u_count) > class_count_d) {
        throw Error(ErrorKind::infeasible_packing, "more combiners requested than distinct equal-gain classes", "b_c");
    }
    if (class_count_d > 1e5) {
        throw Error(ErrorKind::invalid_input, "equal-gain search space too large", "phase_levels");
    }
    const CMatrix root = hermitian_sqrt(covariance);

    const int class_count = static_cast<int>(class_count_d);
    std::vector<std::vector<int>> phases(static_cast<std::size_t>(class_count));
    CMatrix candidates(n_beams, class_count);
    const double amplitude = 1.0 / std::sqrt(static_cast<double>(n_beams));
    for (int c = 0; c < class_count; ++c) {
        std::vector<int> tuple(static_cast<std::size_t>(n_beams), 0);
        int rest = c;
        for (int n = n_beams - 1; n >= 1; --n) {
            tuple[n] = rest % levels;
            rest /= levels;
        }
        for (int n = 0; n < n_beams; ++n) candidates(n, c) = std::polar(amplitude, 2.0 * pi * tuple[n] / levels);
        phases[c] = std::move(tuple);
    }
    Eigen::MatrixXd coherence(class_count, class_count);
    for (int a = 0; a < class_count; ++a)
        for (int b = 0; b < class_count; ++b) coherence(a, b) = std::norm(candidates.col(a).dot(candidates.col(b)));

    Packing packing;
    if (u_count == 1) {
        packing.classes = {0};
        packing.max_coherence = 0.0;
    } else {
        const bool small = log_binomial(class_count - 1, u_count - 1) <= std::log(5e6);
        const bool exhaustive =
            method == PackingMethod::exhaustive || (method == PackingMethod::automatic && small);
        if (exhaustive) {
            std::vector<int> current{0};
            packing.max_coherence = std::numeric_limits<double>::infinity();
            pack_exhaustive(coherence, u_count, current, 0.0, packing);
        } else {
            packing = pack_greedy(coherence, u_count);
        }
    }

    CombinerCodebook cb;
    cb.n_beams = n_beams;
    cb.bits = bits;
    cb.phase_levels = levels;
    cb.seeds.resize(n_beams, u_count);
    cb.codewords.resize(n_beams, u_count);
    for (int u = 0; u < u_count; ++u) {
        const int c = packing.classes[static_cast<std::size_t>(u)];
        cb.seed_phases.push_back(phases[c]);
        cb.seeds.col(u) = candidates.col(c);
        const CVector colored = root * candidates.col(c);
        cb.codewords.col(u) = colored / colored.norm();
    }
    cb.min_chordal_distance = u_count == 1 ? 1.0 : std::sqrt(std::max(0.0, 1.0 - packing.max_coherence));
    return cb;
}

void write_codebook(std::ostream& out, const CMatrix& codewords, const std::string& comment) {
    if (!comment.empty()) out << "# " << comment << '\n';
    char buf[64];
    for (Eigen::Index c = 0; c < codewords.cols(); ++c) {
        for (Eigen::Index r = 0; r < codewords.rows(); ++r) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", codewords(r, c).real(), codewords(r, c).imag());
            if (r > 0) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

CMatrix read_codebook(std::istream& in) {
    std::vector<std::vector<cplx>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string pair;
        std::vector<cplx> entries;
        while (fields >> pair) {
            const auto comma = pair.find(',');
            if (comma == std::string::npos) throw Error(ErrorKind::io, "malformed codeword entry: " + pair);
            try {
                entries.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
            } catch (const std::exception&) {
                throw Error(ErrorKind::io, "malformed codeword entry: " + pair);
            }
        }
        if (!rows.empty() && entries.size() != rows.front().size()) {
            throw Error(ErrorKind::io, "codewords have inconsistent lengths");
        }
        rows.push_back(std::move(entries));
    }
    if (rows.empty()) return CMatrix(0, 0);
    CMatrix out(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c)
        for (std::size_t r = 0; r < rows[c].size(); ++r) out(r, c) = rows[c][r];
    return out;
}

}  // namespace upaq
