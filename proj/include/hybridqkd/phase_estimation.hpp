#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "common.hpp"
#include "drift.hpp"

namespace hqs {

// Four counts of one two-phase scan: (N0, N1) at detector D0 and (M0, M1)
// at D1, first/second acquisition. Doubles so filtered counts fit too.
struct CountMatrix {
    double N0 = 0.0, N1 = 0.0, M0 = 0.0, M1 = 0.0;

    std::array<double, 4> as_vector() const { return {N0, N1, M0, M1}; }
    static CountMatrix from_vector(const std::array<double, 4>& v) {
        return {v[0], v[1], v[2], v[3]};
    }
};

struct ScanResult {
    double zero_phase_voltage = 0.0; // V-bar
    double v_arccos = 0.0;           // V'
    double v_arcsin = 0.0;           // V''
    int phase_slice = 0;             // 1..I
    double phase_estimate = 0.0;     // V-bar in phase units, (-pi, pi]
};

inline int slice_of_phase(double phase, int I) {
    long k = std::lround(double(I) * wrap_pi(phase) / two_pi);
    k %= I;
    if (k <= 0) k += I;
    return int(k);
}

// Noiseless expected counts of a scan at phase offset `phi` between the
// applied voltage and the zero-phase voltage. `imbalance` is a relative
// gain mismatch between the detectors.
inline CountMatrix scan_forward_counts(double phi, double total_per_acq,
                                       double imbalance = 0.0) {
    double gp = 1.0 + imbalance, gm = 1.0 - imbalance;
    CountMatrix m;
    m.N0 = total_per_acq * 0.5 * (1.0 + std::cos(phi)) * gp;
    m.M0 = total_per_acq * 0.5 * (1.0 - std::cos(phi)) * gm;
    m.N1 = total_per_acq * 0.5 * (1.0 - std::sin(phi)) * gp;
    m.M1 = total_per_acq * 0.5 * (1.0 + std::sin(phi)) * gm;
    return m;
}

// Inverts the scan counts to the zero-phase voltage. The two half-period
// estimates V' and V'' agree exactly on noiseless input; V'' is brought to
// the voltage period containing V' before averaging.
inline std::optional<ScanResult> two_phase_scan(const CountMatrix& m, double v_i,
                                                double v_half, int I = 16) {
    double d0 = m.N0 + m.M0;
    double d1 = m.N1 + m.M1;
    if (!(d0 > 0.0) || !(d1 > 0.0)) return std::nullopt;
    double c = std::clamp(2.0 * m.N0 / d0 - 1.0, -1.0, 1.0);
    double s = std::clamp(1.0 - 2.0 * m.N1 / d1, -1.0, 1.0);
    double v_c = v_half / pi * std::acos(c);
    double v_s = v_half / pi * std::asin(s);
    ScanResult r;
    r.v_arccos = s > 0.0 ? v_i - v_c : v_i + v_c;
    r.v_arcsin = c > 0.0 ? v_i - v_s : v_i + v_s - v_half;
    r.v_arcsin += 2.0 * v_half * std::round((r.v_arccos - r.v_arcsin) / (2.0 * v_half));
    r.zero_phase_voltage = 0.5 * (r.v_arccos + r.v_arcsin);
    r.phase_estimate = wrap_pi(r.zero_phase_voltage * pi / v_half);
    r.phase_slice = slice_of_phase(r.phase_estimate, I);
    return r;
}

// ---- LMS filter ----

struct LmsFilterState {
    std::array<double, 10> weights{};
    double step_size = 7.5e-3;
    int reference_slice = 1;
    double divergence_bound = 1e3;
    long resets = 0;

    LmsFilterState() { weights[0] = 1.0; }

    bool is_identity() const {
        if (weights[0] != 1.0) return false;
        for (int i = 1; i < 10; ++i)
            if (weights[i] != 0.0) return false;
        return true;
    }
};

// Zero-padded convolution of the weight vector with the 4-element count
// sequence, truncated to the 4 aligned output positions.
inline std::array<double, 4> lms_convolve(const std::array<double, 4>& x,
                                          const LmsFilterState& st) {
    std::array<double, 4> y{};
    for (int k = 0; k < 4; ++k) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j) acc += st.weights[size_t(k - j)] * x[size_t(j)];
        y[size_t(k)] = acc;
    }
    return y;
}

inline CountMatrix lms_filter(const CountMatrix& m, const LmsFilterState& st) {
    return CountMatrix::from_vector(lms_convolve(m.as_vector(), st));
}

namespace detail {

// Smooth phase-difference target: slices s map to phases 2*pi*s/I, so
// cos^2(pi*|s_r - s_q|/I) becomes cos^2(wrap(theta_r - theta_q)/2).
inline std::optional<double> filtered_phase(const CountMatrix& x,
                                            const LmsFilterState& st, double v_i,
                                            double v_half, int I) {
    auto r = two_phase_scan(lms_filter(x, st), v_i, v_half, I);
    if (!r) return std::nullopt;
    return r->phase_estimate;
}

inline std::optional<double> d_hat_smooth(const CountMatrix& x_r,
                                          const CountMatrix& x_q,
                                          const LmsFilterState& st, double v_i,
                                          double v_half, int I) {
    auto tr = filtered_phase(x_r, st, v_i, v_half, I);
    auto tq = filtered_phase(x_q, st, v_i, v_half, I);
    if (!tr || !tq) return std::nullopt;
    double h = std::cos(0.5 * wrap_pi(*tr - *tq));
    return h * h;
}

} // namespace detail

struct LmsUpdateResult {
    double error = 0.0; // d - d_hat before the step
    bool reset = false;
    bool estimated = true;
};

// One steepest-descent step. `n` is the current sweep index and `K` the
// reference index of minimal reference/quantum count difference; the desired
// signal is d(n) = cos^2(pi*|n-K|/I). The gradient of the squared error is
// taken through the convolution and the smooth phase estimate by central
// finite differences.
inline LmsUpdateResult lms_update(LmsFilterState& st, const CountMatrix& x_r,
                                  const CountMatrix& x_q, int n, int K, double v_i,
                                  double v_half, int I) {
    LmsUpdateResult out;
    double dn_c = std::cos(pi * std::abs(double(n - K)) / double(I));
    double d = dn_c * dn_c;
    auto dh = detail::d_hat_smooth(x_r, x_q, st, v_i, v_half, I);
    if (!dh) {
        out.estimated = false;
        return out;
    }
    out.error = d - *dh;
    double scale = 0.0;
    for (double w : st.weights) scale = std::max(scale, std::abs(w));
    double h = 1e-5 * std::max(1.0, scale);
    std::array<double, 10> grad{};
    for (int i = 0; i < 10; ++i) {
        LmsFilterState up = st, dn = st;
        up.weights[size_t(i)] += h;
        dn.weights[size_t(i)] -= h;
        auto eu = detail::d_hat_smooth(x_r, x_q, up, v_i, v_half, I);
        auto ed = detail::d_hat_smooth(x_r, x_q, dn, v_i, v_half, I);
        if (!eu || !ed) continue;
        double de_up = d - *eu, de_dn = d - *ed;
        grad[size_t(i)] = (de_up * de_up - de_dn * de_dn) / (2.0 * h);
    }
    for (int i = 0; i < 10; ++i)
        st.weights[size_t(i)] -= st.step_size * grad[size_t(i)];
    for (double w : st.weights) {
        if (!(std::abs(w) <= st.divergence_bound)) {
            st = LmsFilterState{};
            st.resets += 1;
            out.reset = true;
            break;
        }
    }
    return out;
}

struct SweepEstimate {
    int slice_r = 0, slice_q = 0;
    int K = 1;
    bool ok = false;
};

inline double l1_diff(const CountMatrix& a, const CountMatrix& b) {
    return std::abs(a.N0 - b.N0) + std::abs(a.N1 - b.N1) + std::abs(a.M0 - b.M0) +
           std::abs(a.M1 - b.M1);
}

// Returns the 1-based argmin, ties toward the lower index.
inline int calibrate_arms(const std::vector<double>& counting_difference) {
    int best = 1;
    for (size_t i = 1; i < counting_difference.size(); ++i)
        if (counting_difference[i] < counting_difference[size_t(best) - 1])
            best = int(i) + 1;
    return best;
}

// One full sweep: I scan positions covering the voltage period, a count
// matrix pair (reference pulse, quantum pulse) per position. Runs the
// filter, estimates both slices at the best-aligned position, and performs
// the LMS updates.
inline SweepEstimate filter_enhanced_scan(const std::vector<CountMatrix>& raw_r,
                                          const std::vector<CountMatrix>& raw_q,
                                          LmsFilterState& st, double v_half,
                                          int I = 16, bool update = true) {
    SweepEstimate est;
    if (raw_r.size() != size_t(I) || raw_q.size() != size_t(I)) return est;
    std::vector<double> diff(size_t(I));
    for (int n = 0; n < I; ++n)
        diff[size_t(n)] = l1_diff(lms_filter(raw_r[size_t(n)], st),
                                  lms_filter(raw_q[size_t(n)], st));
    est.K = calibrate_arms(diff);
    double v_K = double(est.K - 1) * 2.0 * v_half / double(I);
    auto rr = two_phase_scan(lms_filter(raw_r[size_t(est.K - 1)], st), v_K, v_half, I);
    auto rq = two_phase_scan(lms_filter(raw_q[size_t(est.K - 1)], st), v_K, v_half, I);
    if (rr && rq) {
        est.slice_r = rr->phase_slice;
        est.slice_q = rq->phase_slice;
        est.ok = true;
    }
    if (update) {
        for (int n = 1; n <= I; ++n) {
            double v_n = double(n - 1) * 2.0 * v_half / double(I);
            lms_update(st, raw_r[size_t(n - 1)], raw_q[size_t(n - 1)], n, est.K, v_n,
                       v_half, I);
        }
    }
    return est;
}

// ---- shot-noise scan simulation and the compensation loop ----

// Simulates one scan of the residual offset `theta` with Poisson counts at
// `total_per_acq` expected counts per acquisition. Voltage is expressed in
// phase units (v_half = pi), so the returned estimate is directly a phase.
inline std::optional<double> simulate_scan(double theta, double total_per_acq,
                                           double imbalance, rng_t& rng) {
    CountMatrix mean = scan_forward_counts(-theta, total_per_acq, imbalance);
    auto draw = [&](double m) {
        return m > 0.0 ? double(std::poisson_distribution<long>(m)(rng)) : 0.0;
    };
    CountMatrix m{draw(mean.N0), draw(mean.N1), draw(mean.M0), draw(mean.M1)};
    auto r = two_phase_scan(m, 0.0, pi);
    if (!r) return std::nullopt;
    return wrap_pi(r->phase_estimate);
}

inline std::optional<double> averaged_scan(double theta, double total_per_acq,
                                           double imbalance, int rounds, rng_t& rng) {
    double cx = 0.0, cy = 0.0;
    int got = 0;
    for (int i = 0; i < rounds; ++i) {
        auto e = simulate_scan(theta, total_per_acq, imbalance, rng);
        if (!e) continue;
        cx += std::cos(*e);
        cy += std::sin(*e);
        ++got;
    }
    if (!got) return std::nullopt;
    return std::atan2(cy, cx);
}

struct ClosedLoopConfig {
    double duration_s = 60.0;
    double period_s = 10.0;       // compensation period
    int scan_rounds = 5;          // scans per compensation
    double scan_round_s = 40e-6;  // two 20 us acquisitions
    double ref_rate_hz = 2.5e6;   // reference count rate
    int monitor_rounds = 25;      // scans averaged per recorded sample
    double sample_dt_s = 1e-3;
    double sync_overhead_s = 0.1; // per compensation period
    bool compensate = true;
    double detector_imbalance = 0.01;
};

struct ClosedLoopResult {
    std::vector<double> times;     // s
    std::vector<double> residual;  // measured signed residual, rad
    double residual_std_deg = 0.0;
    double duty_cycle = 1.0;
};

inline double duty_cycle(const ClosedLoopConfig& cfg) {
    if (!cfg.compensate) return 1.0;
    return 1.0 -
           (double(cfg.scan_rounds) * cfg.scan_round_s + cfg.sync_overhead_s) /
               cfg.period_s;
}

// Arm drift tracked by periodic scans; the estimated zero-phase voltage is
// applied as a continuous correction. The fast channel drift is held by the
// phase lock, whose residual enters as per-scan Gaussian noise.
inline ClosedLoopResult run_closed_loop(const DriftConfig& drift,
                                        const ClosedLoopConfig& cfg,
                                        std::uint64_t seed = 1) {
    rng_t rng = make_rng(seed, 0x10c0);
    double counts_per_acq = cfg.ref_rate_hz * 0.5 * cfg.scan_round_s;
    double opll_std = std::sqrt(drift.opll_noise_variance);
    double theta = 0.0;      // true arm offset
    double correction = 0.0; // applied zero-phase correction
    double next_comp = 0.0;
    ClosedLoopResult res;
    res.duty_cycle = duty_cycle(cfg);
    long steps = std::lround(cfg.duration_s / cfg.sample_dt_s);
    double step_std = drift.arm_drift_rate_std * std::sqrt(cfg.sample_dt_s);
    auto scan_once = [&](int rounds) -> std::optional<double> {
        double cx = 0.0, cy = 0.0;
        int got = 0;
        for (int i = 0; i < rounds; ++i) {
            double seen = theta - correction + gaussian(rng, 0.0, opll_std);
            auto e = simulate_scan(wrap_pi(seen), counts_per_acq,
                                   cfg.detector_imbalance, rng);
            if (!e) continue;
            cx += std::cos(*e);
            cy += std::sin(*e);
            ++got;
        }
        if (!got) return std::nullopt;
        return std::atan2(cy, cx);
    };
    for (long i = 0; i < steps; ++i) {
        double t = double(i) * cfg.sample_dt_s;
        if (cfg.compensate && t >= next_comp) {
            if (auto m = scan_once(cfg.scan_rounds)) correction = correction + *m;
            next_comp += cfg.period_s;
        }
        if (auto m = scan_once(cfg.monitor_rounds)) {
            res.times.push_back(t);
            res.residual.push_back(*m);
        }
        theta += gaussian(rng, 0.0, step_std);
    }
    if (!res.residual.empty()) {
        double mean = 0.0;
        for (double r : res.residual) mean += r;
        mean /= double(res.residual.size());
        double var = 0.0;
        for (double r : res.residual) var += (r - mean) * (r - mean);
        var /= double(res.residual.size());
        res.residual_std_deg = deg(std::sqrt(var));
    }
    return res;
}

// ---- estimator accuracy studies ----

struct MaeStudy {
    double mae_filtered = 0.0;
    double mae_unfiltered = 0.0;
    double se_paired = 0.0; // standard error of the per-trial difference
    long trials = 0;
};

// Paired comparison of the plain and filter-enhanced estimators under
// Poisson shot noise at a given reference count rate.
inline MaeStudy lms_mae_study(const LmsFilterState& st, double count_rate_hz,
                              long trials, std::uint64_t seed,
                              double acquisition_s = 20e-6,
                              double imbalance = 0.01) {
    rng_t rng = make_rng(seed, 0x3a3e);
    double per_acq = count_rate_hz * acquisition_s;
    MaeStudy out;
    double sum_d = 0.0, sum_d2 = 0.0;
    for (long i = 0; i < trials; ++i) {
        double theta = uniform01(rng) * two_pi - pi;
        CountMatrix mean = scan_forward_counts(-theta, per_acq, imbalance);
        auto draw = [&](double m) {
            return m > 0.0 ? double(std::poisson_distribution<long>(m)(rng)) : 0.0;
        };
        CountMatrix m{draw(mean.N0), draw(mean.N1), draw(mean.M0), draw(mean.M1)};
        auto plain = two_phase_scan(m, 0.0, pi);
        auto filt = two_phase_scan(lms_filter(m, st), 0.0, pi);
        if (!plain || !filt) {
            continue; // all-dark scan, neither estimator applies
        }
        double eu = std::abs(wrap_pi(plain->phase_estimate - theta));
        double ef = std::abs(wrap_pi(filt->phase_estimate - theta));
        out.mae_unfiltered += eu;
        out.mae_filtered += ef;
        double d = ef - eu;
        sum_d += d;
        sum_d2 += d * d;
        out.trials += 1;
    }
    if (out.trials > 0) {
        out.mae_unfiltered /= double(out.trials);
        out.mae_filtered /= double(out.trials);
        double n = double(out.trials);
        double var = std::max(0.0, sum_d2 / n - (sum_d / n) * (sum_d / n));
        out.se_paired = std::sqrt(var / n);
    }
    return out;
}

// Filter initialization: sweeps an attenuation-simulated channel over the
// full voltage range, runs the update rule, and keeps whichever weights
// (trained or any intermediate snapshot) score the best validation MAE.
inline LmsFilterState pretrain_lms(double count_rate_hz, int rounds,
                                   std::uint64_t seed, double imbalance = 0.01,
                                   int I = 16) {
    rng_t rng = make_rng(seed, 0x93e3);
    LmsFilterState st;
    auto validate = [&](const LmsFilterState& cand) {
        return lms_mae_study(cand, count_rate_hz, 400, seed ^ 0x5a5a, 20e-6, imbalance)
            .mae_filtered;
    };
    LmsFilterState best = st;
    double best_score = validate(best);
    double per_acq = count_rate_hz * 20e-6;
    for (int round = 0; round < rounds; ++round) {
        double v0_r = uniform01(rng) * two_pi - pi;
        double v0_q = wrap_pi(v0_r + (uniform01(rng) * two_pi - pi) * 0.25);
        std::vector<CountMatrix> xs_r, xs_q;
        for (int n = 1; n <= I; ++n) {
            double v_n = double(n - 1) * two_pi / double(I);
            auto draw = [&](double m) {
                return m > 0.0 ? double(std::poisson_distribution<long>(m)(rng)) : 0.0;
            };
            CountMatrix mr = scan_forward_counts(v_n - v0_r, per_acq, imbalance);
            CountMatrix mq = scan_forward_counts(v_n - v0_q, per_acq, imbalance);
            xs_r.push_back({draw(mr.N0), draw(mr.N1), draw(mr.M0), draw(mr.M1)});
            xs_q.push_back({draw(mq.N0), draw(mq.N1), draw(mq.M0), draw(mq.M1)});
        }
        filter_enhanced_scan(xs_r, xs_q, st, pi, I, true);
        if ((round + 1) % 8 == 0) {
            double score = validate(st);
            if (score < best_score) {
                best_score = score;
                best = st;
            }
        }
    }
    return best;
}

} // namespace hqs
