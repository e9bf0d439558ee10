#pragma once

#include <cmath>

namespace trajk {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDegToRad = 0.017453292519943295;

/// WGS84 coordinate pair in degrees.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

inline bool operator==(const GeoPoint& a, const GeoPoint& b) {
    return a.lat == b.lat && a.lon == b.lon;
}

/// Equirectangular distance in meters: flat-earth approximation with the
/// longitude delta scaled by cos of the mean latitude. Sub-meter error at
/// city scale, and monotone in both coordinate deltas, which is all the
/// nearest-node search relies on.
inline double equirect_distance_m(const GeoPoint& a, const GeoPoint& b) {
    const double mean_lat_rad = 0.5 * (a.lat + b.lat) * kDegToRad;
    const double dlat = (b.lat - a.lat) * kDegToRad;
    const double dlon = (b.lon - a.lon) * kDegToRad * std::cos(mean_lat_rad);
    return kEarthRadiusM * std::sqrt(dlat * dlat + dlon * dlon);
}

}  // namespace trajk
