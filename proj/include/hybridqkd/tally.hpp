#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "params.hpp"

namespace hqs {

// Source classes per party. SNS signal windows split into sending (mu) and
// not-sending (off, which still emits the extinction intensity o); MDI signal
// windows are Z-basis mu. `vac` is the declared vacuum window.
enum class SourceClass : int { mu = 0, off = 1, nu = 2, om = 3, vac = 4 };
inline constexpr int source_class_count = 5;

// Accumulated detection and error counts per ordered source-class pair.
// For SNS the nu-nu and om-om table cells are the slice-matched subsets,
// tracked separately so the full matrix keeps exact conservation.
struct TallySheet {
    ProtocolKind protocol = ProtocolKind::SNS;
    double windows = 0.0; // windows represented (N for analytic mode)
    std::array<std::array<double, 5>, 5> detected{};
    std::array<std::array<double, 5>, 5> errors{};
    std::array<std::array<double, 5>, 5> matched_detected{};
    std::array<std::array<double, 5>, 5> matched_errors{};

    double& det(SourceClass a, SourceClass b) { return detected[size_t(int(a))][size_t(int(b))]; }
    double det(SourceClass a, SourceClass b) const { return detected[size_t(int(a))][size_t(int(b))]; }
    double& err(SourceClass a, SourceClass b) { return errors[size_t(int(a))][size_t(int(b))]; }
    double err(SourceClass a, SourceClass b) const { return errors[size_t(int(a))][size_t(int(b))]; }
    double& mdet(SourceClass a, SourceClass b) { return matched_detected[size_t(int(a))][size_t(int(b))]; }
    double mdet(SourceClass a, SourceClass b) const { return matched_detected[size_t(int(a))][size_t(int(b))]; }
    double& merr(SourceClass a, SourceClass b) { return matched_errors[size_t(int(a))][size_t(int(b))]; }
    double merr(SourceClass a, SourceClass b) const { return matched_errors[size_t(int(a))][size_t(int(b))]; }

    double total_effective() const {
        double s = 0.0;
        for (const auto& row : detected)
            for (double v : row) s += v;
        return s;
    }

    void merge(const TallySheet& other) {
        windows += other.windows;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                detected[size_t(i)][size_t(j)] += other.detected[size_t(i)][size_t(j)];
                errors[size_t(i)][size_t(j)] += other.errors[size_t(i)][size_t(j)];
                matched_detected[size_t(i)][size_t(j)] += other.matched_detected[size_t(i)][size_t(j)];
                matched_errors[size_t(i)][size_t(j)] += other.matched_errors[size_t(i)][size_t(j)];
            }
    }

    // --- named table cells ---
    // SNS rows; nu-nu and om-om report the slice-matched subsets.
    double cell_mumu() const { return det(SourceClass::mu, SourceClass::mu); }
    double cell_mu0() const { return det(SourceClass::mu, SourceClass::off); }
    double cell_0mu() const { return det(SourceClass::off, SourceClass::mu); }
    double cell_00() const { return det(SourceClass::off, SourceClass::off); }
    double cell_nunu() const {
        return protocol == ProtocolKind::SNS ? mdet(SourceClass::nu, SourceClass::nu)
                                             : det(SourceClass::nu, SourceClass::nu);
    }
    double cell_omom() const {
        return protocol == ProtocolKind::SNS ? mdet(SourceClass::om, SourceClass::om)
                                             : det(SourceClass::om, SourceClass::om);
    }
    double cell_nuo() const { return det(SourceClass::nu, SourceClass::vac); }
    double cell_onu() const { return det(SourceClass::vac, SourceClass::nu); }
    double cell_omo() const { return det(SourceClass::om, SourceClass::vac); }
    double cell_oom() const { return det(SourceClass::vac, SourceClass::om); }
    double cell_oo() const { return det(SourceClass::vac, SourceClass::vac); }
    // MDI Z rows pair the signal with the declared vacuum.
    double cell_muo() const { return det(SourceClass::mu, SourceClass::vac); }
    double cell_omu() const { return det(SourceClass::vac, SourceClass::mu); }

    double qber_mumu() const {
        double d = cell_mumu();
        return d > 0.0 ? err(SourceClass::mu, SourceClass::mu) / d : 0.0;
    }
    double qber_nunu() const {
        double d = cell_nunu();
        if (d <= 0.0) return 0.0;
        return (protocol == ProtocolKind::SNS ? merr(SourceClass::nu, SourceClass::nu)
                                              : err(SourceClass::nu, SourceClass::nu)) / d;
    }
    double qber_omom() const {
        double d = cell_omom();
        if (d <= 0.0) return 0.0;
        return (protocol == ProtocolKind::SNS ? merr(SourceClass::om, SourceClass::om)
                                              : err(SourceClass::om, SourceClass::om)) / d;
    }

    // SNS pre-pairing sifted-key quantities (signal-window effective events).
    double sifted_total() const { return cell_mumu() + cell_mu0() + cell_0mu() + cell_00(); }
    double sifted_errors() const { return cell_mumu() + cell_00(); }
    double sifted_error_rate() const {
        double t = sifted_total();
        return t > 0.0 ? sifted_errors() / t : 0.0;
    }
};

inline std::string tally_to_text(const TallySheet& t, const std::string& scenario) {
    std::ostringstream out;
    auto count = [](double v) {
        std::ostringstream o;
        o.precision(12);
        o << v;
        return o.str();
    };
    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
        return std::string(buf);
    };
    out << "# schema: hqs.tally/1\n";
    out << "# scenario: " << scenario << "\n";
    out << "# windows: " << count(t.windows) << "\n";
    if (t.protocol == ProtocolKind::SNS) {
        out << "Detected μμ\t" << count(t.cell_mumu()) << "\n";
        out << "Detected μ0\t" << count(t.cell_mu0()) << "\n";
        out << "Detected 0μ\t" << count(t.cell_0mu()) << "\n";
        out << "Detected 00\t" << count(t.cell_00()) << "\n";
        out << "Detected νν\t" << count(t.cell_nunu()) << "\n";
        out << "Detected νo\t" << count(t.cell_nuo()) << "\n";
        out << "Detected oν\t" << count(t.cell_onu()) << "\n";
        out << "Detected ωω\t" << count(t.cell_omom()) << "\n";
        out << "Detected ωo\t" << count(t.cell_omo()) << "\n";
        out << "Detected oω\t" << count(t.cell_oom()) << "\n";
        out << "Detected oo\t" << count(t.cell_oo()) << "\n";
        out << "QBER of νν\t" << pct(t.qber_nunu()) << "\n";
        out << "QBER of ωω\t" << pct(t.qber_omom()) << "\n";
        out << "E_Z (before pairing)\t" << pct(t.sifted_error_rate()) << "\n";
    } else {
        out << "Detected μμ\t" << count(t.cell_mumu()) << "\n";
        out << "Detected μo\t" << count(t.cell_muo()) << "\n";
        out << "Detected oμ\t" << count(t.cell_omu()) << "\n";
        out << "Detected νν\t" << count(t.cell_nunu()) << "\n";
        out << "Detected νo\t" << count(t.cell_nuo()) << "\n";
        out << "Detected oν\t" << count(t.cell_onu()) << "\n";
        out << "Detected ωω\t" << count(t.cell_omom()) << "\n";
        out << "Detected ωo\t" << count(t.cell_omo()) << "\n";
        out << "Detected oω\t" << count(t.cell_oom()) << "\n";
        out << "Detected oo\t" << count(t.cell_oo()) << "\n";
        out << "QBER of μμ\t" << pct(t.qber_mumu()) << "\n";
        out << "QBER of νν\t" << pct(t.qber_nunu()) << "\n";
        out << "QBER of ωω\t" << pct(t.qber_omom()) << "\n";
    }
    out << "Effective events\t" << count(t.total_effective()) << "\n";
    return out.str();
}

} // namespace hqs
