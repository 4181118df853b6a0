#ifndef TSHUNT_TRAIN_HPP
#define TSHUNT_TRAIN_HPP

// Train geometry and rail-wheel units.
//
// Positions along the section are measured in metres from the receiving-end
// boundary of the main track (x = 0) towards the sending end (x = length).
// The train runs towards the sending end, so its first wheel set has the
// largest coordinate and the rest of the formation trails behind it.

#include <algorithm>
#include <span>
#include <vector>

#include "tshunt/elements.hpp"
#include "tshunt/errors.hpp"
#include "tshunt/netcore.hpp"
#include "tshunt/railline.hpp"

namespace tshunt {

inline constexpr double kDefaultWheelResistanceOhm = 0.15;

struct TrainFormation {
    std::vector<double> axle_offsets_m;  // behind the first wheel set, ascending, first is 0
    std::vector<cplx> wheel_resistance;  // per wheel set, ohm

    std::size_t size() const { return axle_offsets_m.size(); }

    void validate() const {
        if (axle_offsets_m.size() != wheel_resistance.size())
            throw InputError("axle offsets and wheel resistances differ in length");
        if (!axle_offsets_m.empty() && axle_offsets_m.front() != 0.0)
            throw InputError("first axle offset must be 0");
        for (std::size_t i = 1; i < axle_offsets_m.size(); ++i)
            if (!(axle_offsets_m[i] > axle_offsets_m[i - 1])) throw InputError("axle offsets must increase strictly");
        for (cplx r : wheel_resistance)
            if (!is_finite(r) || !(r.real() > 0.0)) throw InputError("wheel resistance must have a positive real part");
    }

    /// The same formation with every wheel set at resistance `r`.
    TrainFormation with_uniform_resistance(cplx r) const {
        TrainFormation t = *this;
        std::fill(t.wheel_resistance.begin(), t.wheel_resistance.end(), r);
        return t;
    }

    /// Only the first wheel set.
    TrainFormation first_wheel_only() const {
        TrainFormation t;
        if (!axle_offsets_m.empty()) {
            t.axle_offsets_m = {0.0};
            t.wheel_resistance = {wheel_resistance.front()};
        }
        return t;
    }
};

/// Axle layout of a multiple unit built from identical cars with two two-axle bogies.
struct BogieLayout {
    std::size_t cars = 8;
    double wheelbase_m = 2.5;       // axles within one bogie
    double bogie_spacing_m = 17.5;  // leading axle of bogie 1 to leading axle of bogie 2
    double coupling_gap_m = 5.0;    // last axle of a car to first axle of the next
};

/// Default 8-car, 32-axle formation.
///
/// Placeholder geometry: the real CRH380B spacing is not part of the model
/// inputs, so the layout is a parameterized stand-in of the right scale.
inline TrainFormation crh380b_formation(cplx wheel_resistance = kDefaultWheelResistanceOhm, BogieLayout layout = {}) {
    TrainFormation t;
    double car_start = 0.0;
    for (std::size_t car = 0; car < layout.cars; ++car) {
        for (double o : {0.0, layout.wheelbase_m, layout.bogie_spacing_m, layout.bogie_spacing_m + layout.wheelbase_m})
            t.axle_offsets_m.push_back(car_start + o);
        car_start += layout.bogie_spacing_m + layout.wheelbase_m + layout.coupling_gap_m;
    }
    t.wheel_resistance.assign(t.axle_offsets_m.size(), wheel_resistance);
    return t;
}

struct WheelSite {
    std::size_t index = 0;  // 0 is the first wheel set
    double position_m = 0.0;
    cplx resistance{};
    bool in_section = false;
};

/// Wheel-set positions with the first wheel set at `head_m`.
inline std::vector<WheelSite> wheel_positions(const TrainFormation& f, double head_m, double section_length_m) {
    std::vector<WheelSite> sites;
    sites.reserve(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = head_m - f.axle_offsets_m[i];
        sites.push_back({i, x, f.wheel_resistance[i], x >= 0.0 && x <= section_length_m});
    }
    return sites;
}

struct Wheel {
    double position_m = 0.0;
    cplx resistance{};
};

/// Wheel sites that lie inside the section.
inline std::vector<Wheel> in_section_wheels(std::span<const WheelSite> sites) {
    std::vector<Wheel> out;
    for (const auto& s : sites)
        if (s.in_section) out.push_back({s.position_m, s.resistance});
    return out;
}

/// Rail between two adjacent fixed shunt elements plus the wheel sets on it.
///
/// `x_start_m` is the receiving-side boundary and `x_end_m` the sending-side
/// one. Wheels are stored in the signal direction, i.e. by descending position.
struct RailWheelUnit {
    double x_start_m = 0.0;
    double x_end_m = 0.0;
    std::vector<Wheel> wheels;

    double length_m() const { return x_end_m - x_start_m; }
};

/// Splits the rail at `fixed_points` (ascending, metres) and assigns each wheel to one unit.
///
/// A wheel exactly on an interior fixed point goes to the unit on its sending
/// side, so the chain applies the wheel before the fixed element.
inline std::vector<RailWheelUnit> partition_units(std::span<const Wheel> wheels, std::span<const double> fixed_points) {
    if (fixed_points.size() < 2) throw InputError("need at least two fixed points to form a unit");
    if (!std::is_sorted(fixed_points.begin(), fixed_points.end()))
        throw InputError("fixed points must be sorted ascending");

    std::vector<RailWheelUnit> units;
    units.reserve(fixed_points.size() - 1);
    for (std::size_t k = 0; k + 1 < fixed_points.size(); ++k) units.push_back({fixed_points[k], fixed_points[k + 1], {}});

    for (const Wheel& w : wheels) {
        if (w.position_m < fixed_points.front() || w.position_m > fixed_points.back())
            throw OutOfSection("wheel set outside the partitioned span");
        // First fixed point strictly greater than the wheel bounds its unit.
        auto it = std::upper_bound(fixed_points.begin(), fixed_points.end(), w.position_m);
        std::size_t k = static_cast<std::size_t>(it - fixed_points.begin());
        k = (k == 0) ? 0 : k - 1;
        if (k >= units.size()) k = units.size() - 1;  // wheel on the last boundary
        units[k].wheels.push_back(w);
    }
    for (auto& u : units)
        std::sort(u.wheels.begin(), u.wheels.end(),
                  [](const Wheel& a, const Wheel& b) { return a.position_m > b.position_m; });
    return units;
}

/// Factors of a unit's chain matrix, from its sending-side boundary to its
/// receiving-side one: rail(gap_1) shunt(w_1) rail(gap_2) ... shunt(w_n) rail(gap_{n+1}).
/// Zero-length gaps are skipped.
inline std::vector<Estn> rail_wheel_factors(const RailWheelUnit& u, const LineEigen& e) {
    if (!(u.x_end_m >= u.x_start_m)) throw InputError("rail-wheel unit has negative length");
    std::vector<Estn> f;
    f.reserve(2 * u.wheels.size() + 1);
    double x = u.x_end_m;
    for (const Wheel& w : u.wheels) {
        if (w.position_m > x || w.position_m < u.x_start_m) throw InputError("wheels out of order in rail-wheel unit");
        if (x - w.position_m > 0.0) f.push_back(rail_estn(e, (x - w.position_m) / 1000.0));
        f.push_back(shunt_estn(w.resistance));
        x = w.position_m;
    }
    if (x - u.x_start_m > 0.0) f.push_back(rail_estn(e, (x - u.x_start_m) / 1000.0));
    return f;
}

/// Chain matrix of a unit, from its sending-side boundary to its receiving-side one.
inline Estn rail_wheel_estn(const RailWheelUnit& u, const LineEigen& e) {
    Estn n;
    for (const Estn& f : rail_wheel_factors(u, e)) n = n * f;
    return n;
}

}  // namespace tshunt

#endif  // TSHUNT_TRAIN_HPP
