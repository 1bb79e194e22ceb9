#pragma once

#include <cmath>
#include <utility>

#include "common.hpp"
#include "params.hpp"

namespace hqs {

struct PulsePair {
    double intensity_a = 0.0, intensity_b = 0.0; // mean photon number at source
    double phase_a = 0.0, phase_b = 0.0;         // rad
    double eta_a = 1.0, eta_b = 1.0;             // arm transmittances
};

enum class WindowTag { reference, quantum, early_bin, late_bin };

struct ClickOutcome {
    bool d0_click = false;
    bool d1_click = false;
    WindowTag window_kind = WindowTag::quantum;

    bool exactly_one() const { return d0_click != d1_click; }
    bool coincidence() const { return d0_click && d1_click; }
};

struct DetectorMeans {
    double n0 = 0.0, n1 = 0.0;
};

// Interference of two weak pulses on the midpoint beam splitter. The sum
// n0 + n1 is phase-independent.
inline DetectorMeans mean_photons_at_detectors(const PulsePair& pair) {
    double a = pair.intensity_a * pair.eta_a;
    double b = pair.intensity_b * pair.eta_b;
    double cross = std::sqrt(a * b) * std::cos(pair.phase_a - pair.phase_b);
    return {0.5 * (a + b) + cross, 0.5 * (a + b) - cross};
}

// Threshold detector with dark counts.
inline double click_probability(double n, const SystemParams& sys) {
    return 1.0 - (1.0 - sys.dark_count_rate) * std::exp(-n);
}

inline std::pair<double, double> click_probabilities(double n0, double n1,
                                                     const SystemParams& sys) {
    return {click_probability(n0, sys), click_probability(n1, sys)};
}

inline ClickOutcome sample_click(double p0, double p1, rng_t& rng,
                                 WindowTag tag = WindowTag::quantum) {
    ClickOutcome out;
    out.d0_click = bernoulli(rng, p0);
    out.d1_click = bernoulli(rng, p1);
    out.window_kind = tag;
    return out;
}

// Misalignment as a probabilistic outcome flip (adds pi to the difference).
inline double misalignment_flip(double phase_diff, double e_misalign, rng_t& rng) {
    if (bernoulli(rng, e_misalign)) return wrap_pi(phase_diff + pi);
    return phase_diff;
}

// --- closed-form expectations used by the analytic tally mode ---

// P(exactly one detector clicks) for effective intensities a, b at a fixed
// phase difference delta.
inline double prob_exactly_one_at(double a, double b, double delta, double p_d) {
    double q = 1.0 - p_d;
    double cross = std::sqrt(a * b) * std::cos(delta);
    double s = a + b;
    double e0 = std::exp(-(0.5 * s + cross));
    double e1 = std::exp(-(0.5 * s - cross));
    return q * (e0 + e1) - 2.0 * q * q * std::exp(-s);
}

// Same, with only detector D0 (the constructive port at delta = 0) silent
// counterpart split out: P(only D0 clicks).
inline double prob_only_d0_at(double a, double b, double delta, double p_d) {
    double q = 1.0 - p_d;
    double cross = std::sqrt(a * b) * std::cos(delta);
    double s = a + b;
    double e1 = std::exp(-(0.5 * s - cross));
    return q * e1 - q * q * std::exp(-s);
}

inline double prob_only_d1_at(double a, double b, double delta, double p_d) {
    double q = 1.0 - p_d;
    double cross = std::sqrt(a * b) * std::cos(delta);
    double s = a + b;
    double e0 = std::exp(-(0.5 * s + cross));
    return q * e0 - q * q * std::exp(-s);
}

// P(exactly one detector clicks) averaged over a uniform phase difference.
// The circular average of exp(-cross) is the modified Bessel function I0.
inline double prob_exactly_one_phase_avg(double a, double b, double p_d) {
    double q = 1.0 - p_d;
    double s = a + b;
    double i0 = std::cyl_bessel_i(0.0, std::sqrt(a * b));
    return 2.0 * q * std::exp(-0.5 * s) * i0 - 2.0 * q * q * std::exp(-s);
}

// P(at least one click). Phase-independent because n0 + n1 is conserved.
inline double prob_at_least_one(double a, double b, double p_d) {
    double q = 1.0 - p_d;
    return 1.0 - q * q * std::exp(-(a + b));
}

// Exact two-time-bin click pattern for a Bell-state herald: D0 and D1 fire in
// opposite bins and the remaining two detector-bin slots stay silent.
// Arguments are the mean photon numbers in (D0 early, D1 early, D0 late,
// D1 late).
inline double psi_minus_pattern_prob(double n0e, double n1e, double n0l, double n1l,
                                     const SystemParams& sys) {
    auto p = [&](double n) { return click_probability(n, sys); };
    auto s = [&](double n) { return 1.0 - click_probability(n, sys); };
    return p(n0e) * p(n1l) * s(n1e) * s(n0l) +
           p(n1e) * p(n0l) * s(n0e) * s(n1l);
}

} // namespace hqs
