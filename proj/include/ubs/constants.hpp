#pragma once

#include <cmath>

#include "ubs/errors.hpp"

namespace ubs {

// CODATA 2018
namespace si {
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double hbar = 1.054571817e-34;                // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
}  // namespace si

// Conversion layer between SI and the internal units hbar = m = omega0 = 1.
// Internally lengths are measured in the ground-state length x0 for
// single-mode work and in the Coulomb length l0 for two-ion work; times in
// 1/omega0. Everything downstream of this struct is dimensionless.
struct PhysicalParams {
    double ion_mass;  // kg
    double omega0;    // rad/s
    double charge;    // C
    double l0;        // m,  (e^2 / 4 pi eps0 m omega0^2)^(1/3)
    double x0;        // m,  sqrt(hbar / m omega0)
    double eps;       // x0 / l0

    PhysicalParams(double mass_kg, double omega0_rad_s,
                   double q = si::elementary_charge)
        : ion_mass(mass_kg), omega0(omega0_rad_s), charge(q) {
        if (!(mass_kg > 0) || !(omega0_rad_s > 0) || !(q > 0))
            throw ConfigError("PhysicalParams: mass, omega0, charge must be positive");
        const double coulomb = q * q / (4.0 * 3.141592653589793238462643 *
                                        si::vacuum_permittivity);
        l0 = std::cbrt(coulomb / (ion_mass * omega0 * omega0));
        x0 = std::sqrt(si::hbar / (ion_mass * omega0));
        eps = x0 / l0;
    }

    // mass in atomic units, trap frequency as ordinary frequency in Hz
    static PhysicalParams for_ion(double mass_u, double f0_hz) {
        return PhysicalParams(mass_u * si::atomic_mass_unit,
                              2.0 * 3.141592653589793238462643 * f0_hz);
    }

    // 40Ca+ at omega0 = 2 pi x 1 MHz, the reference configuration
    static PhysicalParams ca40_1mhz() { return for_ion(40.0, 1.0e6); }
};

}  // namespace ubs
