// SPDX-License-Identifier: Apache-2.0
#include "upaq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "upaq/codebooks.hpp"
#include "upaq/narrowband.hpp"

namespace upaq {

int FeedbackAllocation::total() const noexcept {
    return b_c + 2 * std::accumulate(bits_per_beam.begin(), bits_per_beam.end(), 0);
}

void FeedbackAllocation::validate() const {
    if (bits_per_beam.empty()) throw Error(ErrorKind::invalid_input, "allocation needs at least one beam", "bits_per_beam");
    for (int b : bits_per_beam) {
        if (b < 0) throw Error(ErrorKind::invalid_input, "beam bits must be nonnegative", "bits_per_beam");
    }
    if (b_c < 0) throw Error(ErrorKind::invalid_input, "combiner bits must be nonnegative", "b_c");
}

double gamma_sq(int m_a, int b) {
    if (m_a < 1) throw Error(ErrorKind::invalid_input, "array size must be >= 1", "m_a");
    if (b < 0) throw Error(ErrorKind::invalid_input, "codebook bits must be >= 0", "b");
    const double cell = std::ldexp(1.0, -b);
    double sum = m_a;
    for (int q = 1; q < m_a; ++q) {
        const double x = pi * q * cell;
        sum += 2.0 * (m_a - q) * std::sin(x) / x;
    }
    return sum / (static_cast<double>(m_a) * m_a);
}

double order_stat_gain(int p_count, int n) {
    if (p_count < 1 || n < 1 || n > p_count) throw Error(ErrorKind::out_of_range, "order statistic index outside [1, P]", "n");
    double sum = 0.0;
    for (int q = p_count; q >= n; --q) sum += 1.0 / q;
    return sum;
}

double gbq_lower(const UpaGeometry& geom, int p_count, const std::vector<int>& bits_per_beam) {
    geom.validate();
    const int n_beams = static_cast<int>(bits_per_beam.size());
    if (p_count < 1) throw Error(ErrorKind::invalid_input, "path count must be >= 1", "p_count");
    if (n_beams < 1) throw Error(ErrorKind::invalid_input, "need at least one beam", "bits_per_beam");
    const double m = geom.antennas();
    double sum = n_beams;
    for (int n = 1; n <= n_beams; ++n) {
        const int b = bits_per_beam[n - 1];
        const double coherent = m * gamma_sq(geom.m_v, b) * gamma_sq(geom.m_h, b) - 1.0;
        for (int q = n; q <= p_count; ++q) sum += coherent / (static_cast<double>(q) * p_count);
    }
    return p_count / (m + n_beams - 1) * sum;
}

double gbc_closed(int u_count) {
    if (u_count < 1) throw Error(ErrorKind::invalid_input, "combiner count must be >= 1", "u_count");
    const double u = u_count;
    return 0.5 * (1.0 + u / pi * std::sin(pi / u));
}

double gbc_phase_grid(int n_beams, int u_count) {
    if (n_beams < 1) throw Error(ErrorKind::invalid_input, "need at least one beam", "n_beams");
    if (u_count < 1) throw Error(ErrorKind::invalid_input, "combiner count must be >= 1", "u_count");
    if (n_beams == 1) return 1.0;
    if (n_beams == 2) return gbc_closed(u_count);
    const double levels = std::pow(static_cast<double>(u_count), 1.0 / (n_beams - 1));
    const double x = pi / levels;
    const double s = std::sin(x) / x;
    const double n = n_beams;
    return (n + 2.0 * (n - 1.0) * s + (n - 1.0) * (n - 2.0) * s * s) / (n * n);
}

ExpectedGain expected_gain(const UpaGeometry& geom, int p_count, const FeedbackAllocation& alloc) {
    alloc.validate();
    ExpectedGain out;
    out.g_bq = gbq_lower(geom, p_count, alloc.bits_per_beam);
    if (alloc.n_beams() >= 2) {
        if (alloc.b_c > 30) throw Error(ErrorKind::invalid_input, "combiner bits too large", "b_c");
        out.g_bc = gbc_phase_grid(alloc.n_beams(), 1 << alloc.b_c);
        out.combiner_approximate = alloc.n_beams() >= 3;
    }
    out.total = out.g_bq * out.g_bc;
    return out;
}

namespace {

double mean_gain(const UpaGeometry& geom, const FeedbackAllocation& alloc, const std::vector<int>& p_set) {
    double sum = 0.0;
    for (int p : p_set) sum += expected_gain(geom, p, alloc).total;
    return sum / static_cast<double>(p_set.size());
}

// Every split of `remaining` bits over `slots` beams with at least one bit
// each, in lexicographic order.
void beam_splits(int slots, int remaining, std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (slots == 0) {
        if (remaining == 0) out.push_back(current);
        return;
    }
    for (int b = 1; b <= remaining - (slots - 1); ++b) {
        current.push_back(b);
        beam_splits(slots - 1, remaining - b, current, out);
        current.pop_back();
    }
}

}  // namespace

std::vector<AllocationChoice> enumerate_allocations(const UpaGeometry& geom, int b_total, const std::vector<int>& p_set) {
    geom.validate();
    if (b_total < 2) throw Error(ErrorKind::invalid_input, "feedback budget must be >= 2 bits", "b_total");
    if (p_set.empty()) throw Error(ErrorKind::invalid_input, "path-count set is empty", "p_set");
    std::vector<AllocationChoice> out;
    for (int n = 1; n <= 3; ++n) {
        // Lexicographic order over [B_1..B_N, B_c]: B_c is implied by the beam
        // bits, so iterating beam splits in order is enough.
        for (int beam_total = n; 2 * beam_total <= b_total; ++beam_total) {
            const int b_c = b_total - 2 * beam_total;
            if (n == 1 && b_c != 0) continue;
            std::vector<std::vector<int>> splits;
            std::vector<int> current;
            beam_splits(n, beam_total, current, splits);
            for (auto& split : splits) {
                AllocationChoice choice;
                choice.alloc.bits_per_beam = std::move(split);
                choice.alloc.b_c = b_c;
                choice.objective = mean_gain(geom, choice.alloc, p_set);
                out.push_back(std::move(choice));
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const AllocationChoice& a, const AllocationChoice& b) {
        if (a.alloc.n_beams() != b.alloc.n_beams()) return a.alloc.n_beams() < b.alloc.n_beams();
        std::vector<int> ra = a.alloc.bits_per_beam;
        std::vector<int> rb = b.alloc.bits_per_beam;
        ra.push_back(a.alloc.b_c);
        rb.push_back(b.alloc.b_c);
        return ra < rb;
    });
    return out;
}

AllocationChoice allocate_feedback(const UpaGeometry& geom, int b_total, const std::vector<int>& p_set) {
    const std::vector<AllocationChoice> all = enumerate_allocations(geom, b_total, p_set);
    if (all.empty()) throw Error(ErrorKind::configuration, "no feasible allocation for this budget", "b_total");
    const AllocationChoice* best = &all.front();
    for (const AllocationChoice& c : all) {
        if (c.objective > best->objective * (1.0 + 1e-12)) best = &c;
    }
    return *best;
}

Budget complexity_budget(Scheme scheme, const std::vector<int>& bits) {
    auto need = [&](std::size_t n) {
        if (bits.size() != n) throw Error(ErrorKind::invalid_input, "wrong number of bit parameters for scheme", "bits");
        for (int b : bits) {
            if (b < 0 || b > 28) throw Error(ErrorKind::invalid_input, "bit parameter outside [0, 28]", "bits");
        }
    };
    switch (scheme) {
        case Scheme::proposed: {
            need(3);
            const long long b1 = bits[0], b2 = bits[1], bc = bits[2];
            return {2 * (b1 + b2) + bc + 1, (1LL << (2 * b1)) + (1LL << (2 * b2 + bc + 1))};
        }
        case Scheme::enhanced_kp: {
            need(2);
            const long long b1 = bits[0], b2 = bits[1];
            return {2 * (b1 + b2 + 1), 2 * ((1LL << (b1 + b2)) + (1LL << b1) + (1LL << b2))};
        }
        case Scheme::kp: {
            need(1);
            const long long b1 = bits[0];
            return {2 * b1, 1LL << (b1 + 1)};
        }
    }
    throw Error(ErrorKind::invalid_input, "unknown scheme", "scheme");
}

long long wideband_overhead(const WidebandGrid& grid, int b_w1, int b_w2, int b_n1) {
    grid.validate();
    const long long l = grid.l_blocks;
    const long long r = grid.r_blocks;
    return 2LL * (b_w1 + b_w2) * l + (2LL * b_n1 + 1) * r * l;
}

CorrelationProfile cross_tone_correlation(const CMatrix& channel, const UpaGeometry& geom, int b, int max_lag) {
    geom.validate();
    if (channel.rows() != geom.antennas()) throw Error(ErrorKind::invalid_dimension, "channel rows do not match array");
    const int tones = static_cast<int>(channel.cols());
    if (tones < 2) throw Error(ErrorKind::invalid_input, "need at least two tones", "channel");
    if (max_lag < 0 || max_lag >= tones) max_lag = tones - 1;

    CMatrix unit(channel.rows(), tones);
    CMatrix beams(channel.rows(), tones);
    for (int w = 0; w < tones; ++w) {
        const double norm = channel.col(w).norm();
        unit.col(w) = norm > 0.0 ? CVector(channel.col(w) / norm) : CVector(channel.col(w));
        beams.col(w) = beam_vector(geom, coarse_search(channel.col(w), geom, b));
    }
    CorrelationProfile out;
    out.gamma_h.assign(max_lag + 1, 0.0);
    out.gamma_c1.assign(max_lag + 1, 0.0);
    for (int lag = 0; lag <= max_lag; ++lag) {
        double sum_h = 0.0;
        double sum_c = 0.0;
        const int pairs = tones - lag;
        for (int w = 0; w < pairs; ++w) {
            sum_h += std::norm(unit.col(w).dot(unit.col(w + lag)));
            sum_c += std::norm(beams.col(w).dot(beams.col(w + lag)));
        }
        out.gamma_h[lag] = sum_h / pairs;
        out.gamma_c1[lag] = sum_c / pairs;
    }
    return out;
}

std::string spacing_warning(const UpaGeometry& geom) {
    if (geom.half_wavelength()) return {};
    return "closed-form gains assume half-wavelength spacing; this array has d_v=" + std::to_string(geom.d_v) +
           " d_h=" + std::to_string(geom.d_h);
}

}  // namespace upaq
