#ifndef TSHUNT_ELEMENTS_HPP
#define TSHUNT_ELEMENTS_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "tshunt/errors.hpp"
#include "tshunt/netcore.hpp"

namespace tshunt {

enum class ShuntKind { Capacitor, SVA, TuningEquivalent, WheelSet };

inline std::string_view to_string(ShuntKind k) {
    switch (k) {
        case ShuntKind::Capacitor: return "capacitor";
        case ShuntKind::SVA: return "sva";
        case ShuntKind::TuningEquivalent: return "tuning";
        case ShuntKind::WheelSet: return "wheelset";
    }
    return "?";
}

/// Stand-in magnitude for an open circuit, in ohm.
inline constexpr double kOpenCircuitOhm = 1e12;

/// A lumped element connected across the two rails.
struct ShuntElement {
    ShuntKind kind = ShuntKind::Capacitor;
    cplx z{};                           // equivalent impedance at the carrier, ohm
    std::optional<double> position_m;   // unset for wheel sets

    void validate() const {
        if (!is_finite(z) || z == cplx{}) throw ZeroImpedance("shunt impedance must be finite and nonzero");
        if (kind == ShuntKind::Capacitor && !(z.real() == 0.0 && z.imag() < 0.0))
            throw WrongKind("capacitor impedance must be purely capacitive");
    }

    bool is_open() const { return std::abs(z) >= kOpenCircuitOhm; }
};

/// Chain matrix of an impedance `z` bridging the rails.
inline Estn shunt_estn(cplx z) {
    if (z == cplx{}) throw ZeroImpedance("a dead short across the rails is not representable");
    if (!is_finite(z)) throw NonFinite("shunt impedance must be finite");
    const cplx y = 1.0 / z;
    Mat4 m = Mat4::Identity();
    m(2, 0) = y;
    m(2, 1) = -y;
    m(3, 0) = -y;
    m(3, 1) = y;
    return Estn(m);
}

inline cplx capacitor_impedance(double farad, double frequency_hz) {
    if (!(farad > 0.0)) throw NonPositive("capacitance must be positive");
    if (!(frequency_hz > 0.0)) throw NonPositive("frequency must be positive");
    return 1.0 / cplx(0.0, 2.0 * std::numbers::pi * frequency_hz * farad);
}

inline ShuntElement make_capacitor(double farad, double frequency_hz, std::optional<double> position_m = {}) {
    return {ShuntKind::Capacitor, capacitor_impedance(farad, frequency_hz), position_m};
}

enum class CapacitorFault { LineBreakage, DegradedHalf };

/// Broken lead: open circuit. Degraded: half the capacitance, twice the impedance.
inline ShuntElement capacitor_fault(const ShuntElement& elem, CapacitorFault fault) {
    if (elem.kind != ShuntKind::Capacitor) throw WrongKind("only capacitors take capacitor faults");
    ShuntElement out = elem;
    switch (fault) {
        case CapacitorFault::LineBreakage: out.z = cplx(0.0, -kOpenCircuitOhm); break;
        case CapacitorFault::DegradedHalf:
            if (!elem.is_open()) out.z = 2.0 * elem.z;
            break;
    }
    return out;
}

/// `count` positions on (0, length): equal spacing, half a spacing at each end.
inline std::vector<double> uniform_capacitor_positions(double length_m, std::size_t count) {
    std::vector<double> pos;
    if (count == 0) return pos;
    const double spacing = length_m / static_cast<double>(count);
    pos.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pos.push_back(spacing * (static_cast<double>(i) + 0.5));
    return pos;
}

}  // namespace tshunt

#endif  // TSHUNT_ELEMENTS_HPP
