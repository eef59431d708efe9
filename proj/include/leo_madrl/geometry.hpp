#pragma once

#include <cmath>

namespace leo {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kEarthMuKm3s2 = 398600.4418;
inline constexpr double kSiderealDaySec = 86164.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Earth-centred position in km.
struct EcefVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    EcefVector operator-(const EcefVector& o) const { return {x - o.x, y - o.y, z - o.z}; }
    EcefVector operator+(const EcefVector& o) const { return {x + o.x, y + o.y, z + o.z}; }
    EcefVector operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const EcefVector&) const = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double dot(const EcefVector& o) const { return x * o.x + y * o.y + z * o.z; }
    // Direction of the vector; the zero vector maps to itself.
    EcefVector unit() const;
};

struct GeoPosition {
    double latitude_deg = 0.0;   // [-90, 90]
    double longitude_deg = 0.0;  // [-180, 180)
    double altitude_km = 0.0;

    bool operator==(const GeoPosition&) const = default;
};

struct OrbitalShell {
    int num_planes = 10;
    int sats_per_plane = 10;
    double altitude_km = 600.0;
    double inclination_deg = 80.0;
    double phasing_offset_deg = 0.0;
    double raan_spread_deg = 360.0;

    int num_satellites() const { return num_planes * sats_per_plane; }
    double orbit_radius_km() const { return kEarthRadiusKm + altitude_km; }
    // Seconds per revolution of a circular orbit at this altitude.
    double period_s() const;
    // True when the plane ring closes on itself (cross-seam links allowed).
    bool wraps() const { return raan_spread_deg >= 360.0; }

    // Throws std::invalid_argument naming the first violated field.
    void validate() const;
    bool operator==(const OrbitalShell&) const = default;
};

struct SatelliteId {
    int plane = 0;
    int slot = 0;

    auto operator<=>(const SatelliteId&) const = default;
};

// Flattened index plane * sats_per_plane + slot; ordering matches (plane, slot).
int satellite_index(const OrbitalShell& shell, SatelliteId id);
SatelliteId satellite_id(const OrbitalShell& shell, int index);

// Inertial position on the circular orbit. Throws std::out_of_range for an
// id outside the shell.
EcefVector satellite_position(const OrbitalShell& shell, SatelliteId id, double t_s);

// Spherical-Earth conversion at the constellation epoch.
EcefVector geodetic_to_ecef(const GeoPosition& g);

// Ground position at time t in the inertial frame (Earth rotation applied).
EcefVector gateway_position(const GeoPosition& g, double t_s);

double slant_range(const EcefVector& a, const EcefVector& b);

// Angle between two position vectors, degrees.
double angular_separation_deg(const EcefVector& a, const EcefVector& b);

}  // namespace leo
