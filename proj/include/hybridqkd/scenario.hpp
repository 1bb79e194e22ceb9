#pragma once

#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "drift.hpp"
#include "params.hpp"

namespace hqs {

struct Scenario {
    std::string name = "custom";
    SystemParams sys;
    ProtocolParams proto;
    FiberSpec fiber;
    DriftConfig drift;

    void validate() const {
        sys.validate();
        proto.validate();
        fiber.validate();
        drift.validate();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_num(const std::string& v, const std::string& key) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw config_error("cannot parse value for " + key + ": '" + v + "'");
    return x;
}

inline std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

inline std::vector<std::string> preset_names() {
    return {"sns-241km", "sns-310km", "sns-351km", "sns-400km",
            "sns-431km", "mdi-150km", "mdi-241km"};
}

inline Scenario preset_scenario(const std::string& name) {
    struct Row {
        ProtocolKind kind;
        double mu, nu, omega, o;
        double p_mu, p_nu, p_omega, p_o;
        double eps; // < 0 for MDI
        double N, length_km, loss_db;
    };
    static const std::map<std::string, Row> rows = {
        {"sns-241km", {ProtocolKind::SNS, 0.5012, 0.4917, 0.0187, 0.001,
                       0.9452, 0.0011, 0.0331, 0.0206, 0.2809, 1e12, 241, 40.95}},
        {"sns-310km", {ProtocolKind::SNS, 0.4995, 0.4920, 0.0238, 0.001,
                       0.9221, 0.0026, 0.0467, 0.0286, 0.2808, 1e12, 310, 52.77}},
        {"sns-351km", {ProtocolKind::SNS, 0.4973, 0.4972, 0.0459, 0.001,
                       0.8136, 0.0077, 0.1241, 0.0545, 0.2808, 1e11, 351, 59.68}},
        {"sns-400km", {ProtocolKind::SNS, 0.4908, 0.4907, 0.0518, 0.001,
                       0.7575, 0.0103, 0.1583, 0.0739, 0.2807, 1e11, 400, 68.02}},
        {"sns-431km", {ProtocolKind::SNS, 0.4890, 0.4889, 0.0359, 0.001,
                       0.8583, 0.0052, 0.0776, 0.0588, 0.2808, 1e12, 431, 73.29}},
        {"mdi-150km", {ProtocolKind::MDI, 0.7681, 0.2601, 0.0730, 0.001,
                       0.6041, 0.1028, 0.2745, 0.01866, -1.0, 1e11, 150, 25.50}},
        {"mdi-241km", {ProtocolKind::MDI, 0.6853, 0.3136, 0.0742, 0.001,
                       0.4453, 0.1372, 0.3994, 0.01818, -1.0, 1e12, 241, 40.95}},
    };
    auto it = rows.find(name);
    if (it == rows.end())
        throw config_error("unknown preset: " + name);
    const Row& r = it->second;
    Scenario sc;
    sc.name = name;
    sc.proto.protocol_kind = r.kind;
    sc.proto.mu = r.mu;
    sc.proto.nu = r.nu;
    sc.proto.omega = r.omega;
    sc.proto.o = r.o;
    sc.proto.p_mu = r.p_mu;
    sc.proto.p_nu = r.p_nu;
    sc.proto.p_omega = r.p_omega;
    sc.proto.p_o = r.p_o;
    if (r.eps >= 0.0) sc.proto.epsilon = r.eps;
    sc.proto.N = r.N;
    sc.fiber = FiberSpec::from_total_loss(r.length_km, r.loss_db);
    sc.drift = default_drift(sc.fiber, sc.sys);
    sc.validate();
    return sc;
}

// Key-value scenario text. Unspecified fields keep their defaults (or the
// preset's values when `preset` is named first).
inline Scenario load_scenario(const std::string& text) {
    Scenario sc;
    bool drift_channel_set = false;
    bool drift_opll_set = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) +
                               ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key == "preset") {
            sc = preset_scenario(val);
            drift_channel_set = false;
            drift_opll_set = false;
        } else if (key == "name") {
            sc.name = val;
        } else if (key == "protocol") {
            if (val == "sns") sc.proto.protocol_kind = ProtocolKind::SNS;
            else if (val == "mdi") sc.proto.protocol_kind = ProtocolKind::MDI;
            else throw config_error("protocol must be sns or mdi");
            if (sc.proto.protocol_kind == ProtocolKind::MDI) sc.proto.epsilon.reset();
        } else if (key == "mu") sc.proto.mu = detail::parse_num(val, key);
        else if (key == "nu") sc.proto.nu = detail::parse_num(val, key);
        else if (key == "omega") sc.proto.omega = detail::parse_num(val, key);
        else if (key == "o") sc.proto.o = detail::parse_num(val, key);
        else if (key == "p_mu") sc.proto.p_mu = detail::parse_num(val, key);
        else if (key == "p_nu") sc.proto.p_nu = detail::parse_num(val, key);
        else if (key == "p_omega") sc.proto.p_omega = detail::parse_num(val, key);
        else if (key == "p_o") sc.proto.p_o = detail::parse_num(val, key);
        else if (key == "epsilon") sc.proto.epsilon = detail::parse_num(val, key);
        else if (key == "N") sc.proto.N = detail::parse_num(val, key);
        else if (key == "length_km") sc.fiber.total_length = detail::parse_num(val, key);
        else if (key == "atten_db_per_km") sc.fiber.attenuation = detail::parse_num(val, key);
        else if (key == "loss_db") {
            double loss = detail::parse_num(val, key);
            sc.fiber.attenuation =
                sc.fiber.total_length > 0.0 ? loss / sc.fiber.total_length : 0.0;
        } else if (key == "arm_split") sc.fiber.arm_split = detail::parse_num(val, key);
        else if (key == "eta_d") sc.sys.detection_efficiency = detail::parse_num(val, key);
        else if (key == "f_ec") sc.sys.error_correction_inefficiency = detail::parse_num(val, key);
        else if (key == "e_ps") sc.sys.misalignment_phase_slice = detail::parse_num(val, key);
        else if (key == "e_x") sc.sys.misalignment_x_mdi = detail::parse_num(val, key);
        else if (key == "e_z") sc.sys.misalignment_z = detail::parse_num(val, key);
        else if (key == "eps_fail") sc.sys.failure_probability = detail::parse_num(val, key);
        else if (key == "p_dark") sc.sys.dark_count_rate = detail::parse_num(val, key);
        else if (key == "rep_rate_hz") sc.sys.repetition_rate = detail::parse_num(val, key);
        else if (key == "pattern_len") sc.sys.pulse_pattern_length = (long)detail::parse_num(val, key);
        else if (key == "slices") sc.sys.phase_slice_count = (int)detail::parse_num(val, key);
        else if (key == "opll_var") {
            sc.sys.opll_residual_phase_variance = detail::parse_num(val, key);
            sc.drift.opll_noise_variance = sc.sys.opll_residual_phase_variance;
            drift_opll_set = true;
        } else if (key == "channel_drift_std") {
            sc.drift.channel_drift_rate_std = detail::parse_num(val, key);
            drift_channel_set = true;
        } else if (key == "arm_drift_std") sc.drift.arm_drift_rate_std = detail::parse_num(val, key);
        else throw config_error("unknown key: " + key);
    }
    if (!drift_channel_set)
        sc.drift.channel_drift_rate_std = default_channel_drift_std(sc.fiber.total_length);
    if (!drift_opll_set)
        sc.drift.opll_noise_variance = sc.sys.opll_residual_phase_variance;
    sc.validate();
    return sc;
}

// Resolves a preset name or a scenario file path.
inline Scenario resolve_scenario(const std::string& ref) {
    for (const auto& n : preset_names())
        if (n == ref) return preset_scenario(n);
    std::FILE* f = std::fopen(ref.c_str(), "rb");
    if (!f) throw config_error("unknown scenario: " + ref);
    std::string text;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
    std::fclose(f);
    return load_scenario(text);
}

inline std::string serialize_scenario(const Scenario& sc) {
    using detail::fmt_num;
    std::ostringstream out;
    out << "# schema: hqs.scenario/1\n";
    out << "name = " << sc.name << "\n";
    out << "protocol = " << (sc.proto.protocol_kind == ProtocolKind::SNS ? "sns" : "mdi") << "\n";
    out << "mu = " << fmt_num(sc.proto.mu) << "\n";
    out << "nu = " << fmt_num(sc.proto.nu) << "\n";
    out << "omega = " << fmt_num(sc.proto.omega) << "\n";
    out << "o = " << fmt_num(sc.proto.o) << "\n";
    out << "p_mu = " << fmt_num(sc.proto.p_mu) << "\n";
    out << "p_nu = " << fmt_num(sc.proto.p_nu) << "\n";
    out << "p_omega = " << fmt_num(sc.proto.p_omega) << "\n";
    out << "p_o = " << fmt_num(sc.proto.p_o) << "\n";
    if (sc.proto.epsilon)
        out << "epsilon = " << fmt_num(*sc.proto.epsilon) << "\n";
    out << "N = " << fmt_num(sc.proto.N) << "\n";
    out << "length_km = " << fmt_num(sc.fiber.total_length) << "\n";
    out << "atten_db_per_km = " << fmt_num(sc.fiber.attenuation) << "\n";
    out << "arm_split = " << fmt_num(sc.fiber.arm_split) << "\n";
    out << "eta_d = " << fmt_num(sc.sys.detection_efficiency) << "\n";
    out << "f_ec = " << fmt_num(sc.sys.error_correction_inefficiency) << "\n";
    out << "e_ps = " << fmt_num(sc.sys.misalignment_phase_slice) << "\n";
    out << "e_x = " << fmt_num(sc.sys.misalignment_x_mdi) << "\n";
    out << "e_z = " << fmt_num(sc.sys.misalignment_z) << "\n";
    out << "eps_fail = " << fmt_num(sc.sys.failure_probability) << "\n";
    out << "p_dark = " << fmt_num(sc.sys.dark_count_rate) << "\n";
    out << "rep_rate_hz = " << fmt_num(sc.sys.repetition_rate) << "\n";
    out << "pattern_len = " << sc.sys.pulse_pattern_length << "\n";
    out << "slices = " << sc.sys.phase_slice_count << "\n";
    out << "opll_var = " << fmt_num(sc.sys.opll_residual_phase_variance) << "\n";
    out << "channel_drift_std = " << fmt_num(sc.drift.channel_drift_rate_std) << "\n";
    out << "arm_drift_std = " << fmt_num(sc.drift.arm_drift_rate_std) << "\n";
    return out.str();
}

} // namespace hqs
