#pragma once

namespace dsnav::constants {

inline constexpr double c_light_km_s = 299792.458;         // speed of light [km/s]
inline constexpr double mu_sun_km3_s2 = 1.32712440018e11;  // Sun GM, IAU value [km^3/s^2]
inline constexpr double au_km = 1.495978707e8;             // astronomical unit [km]
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double arcsec_to_rad = pi / (180.0 * 3600.0);
inline constexpr double day_s = 86400.0;

}  // namespace dsnav::constants
