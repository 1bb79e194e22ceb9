#pragma once

#include <cmath>
#include <cstdint>

#include "common.hpp"
#include "params.hpp"

namespace hqs {

// Differential channel phase plus slow interferometer arm drift.
struct InterferometerState {
    double phi_0 = 0.0;
    double phi_short = 0.0;
    double phi_long = 0.0;
    double phi_channel = 0.0;
    double time = 0.0; // s

    double reference_phase() const { return wrap_pi(phi_0 + phi_short + phi_channel); }
    double quantum_phase() const { return wrap_pi(phi_0 + phi_long + phi_channel); }
    double arm_offset() const { return phi_long - phi_short; }
};

struct DriftConfig {
    double channel_drift_rate_std = 0.0; // rad per sqrt(ms)
    double arm_drift_rate_std = 0.0;     // rad per sqrt(s)
    double opll_noise_variance = 0.0;    // rad^2 per window
    std::uint64_t seed = 1;

    void validate() const {
        if (channel_drift_rate_std < 0.0 || arm_drift_rate_std < 0.0 ||
            opll_noise_variance < 0.0)
            throw config_error("drift parameters must be >= 0");
    }
};

// Diffusion constant vs distance, set so the 99.9th percentile of the
// per-millisecond drift magnitude is 6.34 rad/ms at 300 km and 14.95 rad/ms
// at 400 km (|N(0,s)| percentile: 3.29053 s). Linear in length, floored
// where the line would go negative.
inline double default_channel_drift_std(double length_km) {
    constexpr double z999 = 3.29053;
    constexpr double s300 = 6.34 / z999;
    constexpr double s400 = 14.95 / z999;
    double s = s300 + (length_km - 300.0) * (s400 - s300) / 100.0;
    return s < 0.3 ? 0.3 : s;
}

inline DriftConfig default_drift(const FiberSpec& fiber, const SystemParams& sys,
                                 std::uint64_t seed = 1) {
    DriftConfig cfg;
    cfg.channel_drift_rate_std = default_channel_drift_std(fiber.total_length);
    cfg.arm_drift_rate_std = 0.02;
    cfg.opll_noise_variance = sys.opll_residual_phase_variance;
    cfg.seed = seed;
    return cfg;
}

inline InterferometerState step_channel_phase(InterferometerState state, double dt,
                                              const DriftConfig& cfg, rng_t& rng) {
    double std_ms = cfg.channel_drift_rate_std * std::sqrt(dt * 1e3);
    state.phi_channel += gaussian(rng, 0.0, std_ms);
    state.time += dt;
    return state;
}

inline InterferometerState step_arm_phase(InterferometerState state, double dt,
                                          const DriftConfig& cfg, rng_t& rng) {
    state.phi_long += gaussian(rng, 0.0, cfg.arm_drift_rate_std * std::sqrt(dt));
    return state;
}

// One OPLL residual sample on the Alice-Bob phase difference.
inline double opll_noise(const DriftConfig& cfg, rng_t& rng) {
    return gaussian(rng, 0.0, std::sqrt(cfg.opll_noise_variance));
}

inline double residual_error(double phi_q, double phi_ref) {
    return std::abs(wrap_pi(phi_q - phi_ref));
}

} // namespace hqs
