#pragma once

#include "geoseq/geohash.hpp"

namespace geoseq {

// WGS-84.
struct Ellipsoid {
  static constexpr double kSemiMajorAxis = 6378137.0;
  static constexpr double kInverseFlattening = 298.257223563;
  static constexpr double kFlattening = 1.0 / kInverseFlattening;
  static constexpr double kSemiMinorAxis = kSemiMajorAxis * (1.0 - kFlattening);
};

// Azimuth in degrees clockwise from north, normalized to [0, 360).
class Bearing {
 public:
  constexpr Bearing() = default;
  explicit Bearing(double degrees);

  double degrees() const { return degrees_; }

 private:
  double degrees_ = 0.0;
};

struct InverseSolution {
  double distance_m = 0.0;
  Bearing initial_bearing;
  Bearing final_bearing;
  // False when the ellipsoidal iteration failed to converge (nearly antipodal
  // points). The distance is then a spherical estimate with ~0.5% error.
  bool converged = true;
};

InverseSolution solve_inverse(const LatLon& from, const LatLon& to);

// Geodesic length on WGS-84 in meters. Exactly symmetric in its arguments.
double inverse_distance(const LatLon& a, const LatLon& b);

// Destination after travelling distance_m along the geodesic leaving start at bearing.
LatLon forward(const LatLon& start, Bearing bearing, double distance_m);

}  // namespace geoseq
