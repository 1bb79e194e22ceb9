#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "common.hpp"

namespace hqs {

// Shared device constants. Defaults describe the reference system.
struct SystemParams {
    double detection_efficiency = 0.64;        // eta_d
    double error_correction_inefficiency = 1.1; // f
    double misalignment_phase_slice = 0.0410;  // e_PS, X-basis slice matching
    double misalignment_x_mdi = 0.0097;        // e_X
    double misalignment_z = 0.0011;            // e_Z
    double failure_probability = 1e-10;        // eps_fail for statistical bounds
    double dark_count_rate = 1.5e-8;           // p_d per detection window
    double repetition_rate = 5e7;              // Hz
    long pulse_pattern_length = 2000;
    int phase_slice_count = 16;                // I
    double opll_residual_phase_variance = 5.6e-3; // rad^2 per window

    void validate() const {
        auto prob = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0))
                throw config_error(std::string(name) + " must be in [0,1]");
        };
        prob(detection_efficiency, "detection_efficiency");
        prob(misalignment_phase_slice, "misalignment_phase_slice");
        prob(misalignment_x_mdi, "misalignment_x_mdi");
        prob(misalignment_z, "misalignment_z");
        prob(failure_probability, "failure_probability");
        prob(dark_count_rate, "dark_count_rate");
        if (!(error_correction_inefficiency >= 1.0))
            throw config_error("error_correction_inefficiency must be >= 1");
        if (phase_slice_count < 2)
            throw config_error("phase_slice_count must be >= 2");
        if (!(repetition_rate > 0.0))
            throw config_error("repetition_rate must be > 0");
        if (pulse_pattern_length < 1)
            throw config_error("pulse_pattern_length must be >= 1");
        if (opll_residual_phase_variance < 0.0)
            throw config_error("opll_residual_phase_variance must be >= 0");
    }
};

enum class ProtocolKind { SNS, MDI };

struct ProtocolParams {
    ProtocolKind protocol_kind = ProtocolKind::SNS;
    double mu = 0.0, nu = 0.0, omega = 0.0, o = 0.0;
    double p_mu = 0.0, p_nu = 0.0, p_omega = 0.0, p_o = 0.0;
    std::optional<double> epsilon; // sending probability, SNS only
    double N = 0.0;                // total pulse-pair windows

    double sending_prob() const { return epsilon ? *epsilon : 0.0; }

    void validate() const {
        if (protocol_kind == ProtocolKind::SNS) {
            if (!(mu >= nu && nu >= omega && omega >= o && o >= 0.0))
                throw config_error("intensities must satisfy mu >= nu >= omega >= o >= 0");
            if (!epsilon)
                throw config_error("epsilon required for the SNS protocol");
            if (!(*epsilon >= 0.0 && *epsilon <= 1.0))
                throw config_error("epsilon must be in [0,1]");
        } else {
            if (!(mu > nu && nu > omega && omega > o && o >= 0.0))
                throw config_error("intensities must satisfy mu > nu > omega > o >= 0");
            if (epsilon)
                throw config_error("epsilon is not a parameter of the MDI protocol");
        }
        for (double p : {p_mu, p_nu, p_omega, p_o})
            if (!(p >= 0.0 && p <= 1.0))
                throw config_error("window probabilities must be in [0,1]");
        double sum = p_mu + p_nu + p_omega + p_o;
        if (std::abs(sum - 1.0) > 1e-3)
            throw config_error("window probabilities must sum to 1 (got " +
                               std::to_string(sum) + ")");
        if (!(N >= 1.0))
            throw config_error("N must be >= 1");
    }
};

struct FiberSpec {
    double total_length = 0.0; // km
    double attenuation = 0.17; // dB/km
    double arm_split = 0.5;    // fraction of total loss on Alice's arm

    double total_loss_db() const { return total_length * attenuation; }

    static FiberSpec from_total_loss(double length_km, double loss_db,
                                     double arm_split = 0.5) {
        FiberSpec f;
        f.total_length = length_km;
        f.attenuation = length_km > 0.0 ? loss_db / length_km : 0.0;
        f.arm_split = arm_split;
        return f;
    }

    void validate() const {
        if (total_length < 0.0) throw config_error("total_length must be >= 0");
        if (attenuation < 0.0) throw config_error("attenuation must be >= 0");
        if (!(arm_split > 0.0 && arm_split < 1.0))
            throw config_error("arm_split must be in (0,1)");
    }
};

enum class Side { Alice, Bob };

// Transmittance of one arm including detector efficiency.
inline double arm_transmittance(const FiberSpec& fiber, Side side,
                                const SystemParams& sys) {
    double split = side == Side::Alice ? fiber.arm_split : 1.0 - fiber.arm_split;
    double arm_loss_db = fiber.total_loss_db() * split;
    return std::pow(10.0, -arm_loss_db / 10.0) * sys.detection_efficiency;
}

// End-to-end transmittance without detector efficiency; the repeaterless
// benchmark takes this as its channel parameter.
inline double channel_transmittance(const FiberSpec& fiber) {
    return std::pow(10.0, -fiber.total_loss_db() / 10.0);
}

} // namespace hqs
