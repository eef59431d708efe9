#include "leo_madrl/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace leo {

EcefVector EcefVector::unit() const {
    const double n = norm();
    if (n == 0.0) return {};
    return {x / n, y / n, z / n};
}

double OrbitalShell::period_s() const {
    const double r = orbit_radius_km();
    return 2.0 * kPi * std::sqrt(r * r * r / kEarthMuKm3s2);
}

void OrbitalShell::validate() const {
    if (num_planes < 1) throw std::invalid_argument("num_planes must be >= 1");
    if (sats_per_plane < 1) throw std::invalid_argument("sats_per_plane must be >= 1");
    if (!(altitude_km > 0.0)) throw std::invalid_argument("altitude_km must be > 0");
    if (!(inclination_deg >= 0.0 && inclination_deg <= 180.0))
        throw std::invalid_argument("inclination_deg must be in [0, 180]");
    if (!(raan_spread_deg > 0.0 && raan_spread_deg <= 360.0))
        throw std::invalid_argument("raan_spread_deg must be in (0, 360]");
    if (!std::isfinite(phasing_offset_deg)) throw std::invalid_argument("phasing_offset_deg must be finite");
}

int satellite_index(const OrbitalShell& shell, SatelliteId id) {
    if (id.plane < 0 || id.plane >= shell.num_planes || id.slot < 0 || id.slot >= shell.sats_per_plane)
        throw std::out_of_range("satellite (" + std::to_string(id.plane) + "," + std::to_string(id.slot) +
                                ") outside shell");
    return id.plane * shell.sats_per_plane + id.slot;
}

SatelliteId satellite_id(const OrbitalShell& shell, int index) {
    if (index < 0 || index >= shell.num_satellites())
        throw std::out_of_range("satellite index " + std::to_string(index) + " outside shell");
    return {index / shell.sats_per_plane, index % shell.sats_per_plane};
}

EcefVector satellite_position(const OrbitalShell& shell, SatelliteId id, double t_s) {
    satellite_index(shell, id);  // bounds check

    const double r = shell.orbit_radius_km();
    const double mean_motion = 2.0 * kPi / shell.period_s();
    const double raan = deg_to_rad(shell.raan_spread_deg * id.plane / shell.num_planes);
    const double u = deg_to_rad(360.0 * id.slot / shell.sats_per_plane + shell.phasing_offset_deg * id.plane) +
                     mean_motion * t_s;
    const double inc = deg_to_rad(shell.inclination_deg);

    const double cu = std::cos(u), su = std::sin(u);
    const double co = std::cos(raan), so = std::sin(raan);
    const double ci = std::cos(inc), si = std::sin(inc);
    return {r * (co * cu - so * su * ci), r * (so * cu + co * su * ci), r * (su * si)};
}

EcefVector geodetic_to_ecef(const GeoPosition& g) {
    const double r = kEarthRadiusKm + g.altitude_km;
    const double lat = deg_to_rad(g.latitude_deg);
    const double lon = deg_to_rad(g.longitude_deg);
    return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
}

EcefVector gateway_position(const GeoPosition& g, double t_s) {
    const EcefVector p = geodetic_to_ecef(g);
    const double theta = 2.0 * kPi * t_s / kSiderealDaySec;
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
}

double slant_range(const EcefVector& a, const EcefVector& b) { return (a - b).norm(); }

double angular_separation_deg(const EcefVector& a, const EcefVector& b) {
    const double c = a.dot(b) / (a.norm() * b.norm());
    // atan2 form keeps precision for small angles
    const EcefVector cross{a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
    const double s = cross.norm() / (a.norm() * b.norm());
    return rad_to_deg(std::atan2(s, std::clamp(c, -1.0, 1.0)));
}

}  // namespace leo
