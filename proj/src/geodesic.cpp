#include "geoseq/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "geoseq/errors.hpp"

namespace geoseq {

namespace {

constexpr double kA = Ellipsoid::kSemiMajorAxis;
constexpr double kB = Ellipsoid::kSemiMinorAxis;
constexpr double kF = Ellipsoid::kFlattening;
constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kMaxIterations = 1000;
constexpr double kLambdaTolerance = 1e-13;

double wrap_lon_deg(double lon) {
  double w = std::fmod(lon + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  return w - 180.0;
}

double wrap_pi(double x) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::fmod(x + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w - std::numbers::pi;
}

double reduced_latitude(double lat_rad) { return std::atan((1.0 - kF) * std::tan(lat_rad)); }

struct SeriesCoefficients {
  double a;
  double b;
};

SeriesCoefficients series(double cos_sq_alpha) {
  const double u_sq = cos_sq_alpha * (kA * kA - kB * kB) / (kB * kB);
  const double a = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)));
  const double b = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)));
  return {a, b};
}

double delta_sigma(double b, double sin_sigma, double cos_sigma, double cos_2sm) {
  const double c2 = cos_2sm * cos_2sm;
  return b * sin_sigma *
         (cos_2sm + b / 4.0 *
                        (cos_sigma * (-1.0 + 2.0 * c2) -
                         b / 6.0 * cos_2sm * (-3.0 + 4.0 * sin_sigma * sin_sigma) * (-3.0 + 4.0 * c2)));
}

InverseSolution spherical_inverse(const LatLon& from, const LatLon& to) {
  const double r = (2.0 * kA + kB) / 3.0;
  const double p1 = from.lat * kDeg;
  const double p2 = to.lat * kDeg;
  const double dl = (to.lon - from.lon) * kDeg;
  const double h = std::pow(std::sin((p2 - p1) / 2.0), 2) +
                   std::cos(p1) * std::cos(p2) * std::pow(std::sin(dl / 2.0), 2);
  InverseSolution out;
  out.distance_m = 2.0 * r * std::asin(std::min(1.0, std::sqrt(h)));
  const double y = std::sin(dl) * std::cos(p2);
  const double x = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  out.initial_bearing = Bearing(std::atan2(y, x) / kDeg);
  out.final_bearing = out.initial_bearing;
  out.converged = false;
  return out;
}

// Vincenty's inverse method.
InverseSolution vincenty_inverse(const LatLon& from, const LatLon& to) {
  const double big_l = wrap_pi((to.lon - from.lon) * kDeg);
  const double u1 = reduced_latitude(from.lat * kDeg);
  const double u2 = reduced_latitude(to.lat * kDeg);
  const double sin_u1 = std::sin(u1);
  const double cos_u1 = std::cos(u1);
  const double sin_u2 = std::sin(u2);
  const double cos_u2 = std::cos(u2);

  double lambda = big_l;
  double sin_sigma = 0.0;
  double cos_sigma = 1.0;
  double sigma = 0.0;
  double sin_alpha = 0.0;
  double cos_sq_alpha = 1.0;
  double cos_2sm = 0.0;
  double sin_lambda = 0.0;
  double cos_lambda = 1.0;
  bool converged = false;

  for (int it = 0; it < kMaxIterations; ++it) {
    sin_lambda = std::sin(lambda);
    cos_lambda = std::cos(lambda);
    const double t1 = cos_u2 * sin_lambda;
    const double t2 = cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_lambda;
    sin_sigma = std::sqrt(t1 * t1 + t2 * t2);
    if (sin_sigma == 0.0) {
      InverseSolution same;
      same.distance_m = 0.0;
      return same;
    }
    cos_sigma = sin_u1 * sin_u2 + cos_u1 * cos_u2 * cos_lambda;
    sigma = std::atan2(sin_sigma, cos_sigma);
    sin_alpha = cos_u1 * cos_u2 * sin_lambda / sin_sigma;
    cos_sq_alpha = 1.0 - sin_alpha * sin_alpha;
    // Equatorial lines have cos^2(alpha) == 0.
    cos_2sm = cos_sq_alpha != 0.0 ? cos_sigma - 2.0 * sin_u1 * sin_u2 / cos_sq_alpha : 0.0;
    const double c = kF / 16.0 * cos_sq_alpha * (4.0 + kF * (4.0 - 3.0 * cos_sq_alpha));
    const double previous = lambda;
    lambda = big_l + (1.0 - c) * kF * sin_alpha *
                         (sigma + c * sin_sigma * (cos_2sm + c * cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)));
    if (std::abs(lambda) > std::numbers::pi) break;
    if (std::abs(lambda - previous) < kLambdaTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) return spherical_inverse(from, to);

  const auto [a_coef, b_coef] = series(cos_sq_alpha);
  InverseSolution out;
  out.distance_m = kB * a_coef * (sigma - delta_sigma(b_coef, sin_sigma, cos_sigma, cos_2sm));
  out.initial_bearing =
      Bearing(std::atan2(cos_u2 * sin_lambda, cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_lambda) / kDeg);
  out.final_bearing =
      Bearing(std::atan2(cos_u1 * sin_lambda, -sin_u1 * cos_u2 + cos_u1 * sin_u2 * cos_lambda) / kDeg);
  out.converged = true;
  return out;
}

bool canonical_order(const LatLon& a, const LatLon& b) {
  return a.lat < b.lat || (a.lat == b.lat && a.lon <= b.lon);
}

}  // namespace

Bearing::Bearing(double degrees) {
  if (!std::isfinite(degrees)) throw InvalidArgument("bearing must be finite");
  double d = std::fmod(degrees, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d = 0.0;
  degrees_ = d;
}

InverseSolution solve_inverse(const LatLon& from, const LatLon& to) {
  if (from == to) return InverseSolution{};
  // Solve in a fixed point order so that D(a, b) == D(b, a) bit for bit.
  if (canonical_order(from, to)) return vincenty_inverse(from, to);
  InverseSolution swapped = vincenty_inverse(to, from);
  InverseSolution out;
  out.distance_m = swapped.distance_m;
  out.initial_bearing = Bearing(swapped.final_bearing.degrees() + 180.0);
  out.final_bearing = Bearing(swapped.initial_bearing.degrees() + 180.0);
  out.converged = swapped.converged;
  return out;
}

double inverse_distance(const LatLon& a, const LatLon& b) { return solve_inverse(a, b).distance_m; }

// Vincenty's direct method.
LatLon forward(const LatLon& start, Bearing bearing, double distance_m) {
  if (!std::isfinite(distance_m) || distance_m < 0.0) {
    throw InvalidArgument("distance must be finite and non-negative");
  }
  if (distance_m == 0.0) return start;

  const double alpha1 = bearing.degrees() * kDeg;
  const double sin_alpha1 = std::sin(alpha1);
  const double cos_alpha1 = std::cos(alpha1);
  const double u1 = reduced_latitude(start.lat * kDeg);
  const double sin_u1 = std::sin(u1);
  const double cos_u1 = std::cos(u1);
  const double sigma1 = std::atan2(std::tan(u1), cos_alpha1);
  const double sin_alpha = cos_u1 * sin_alpha1;
  const double cos_sq_alpha = 1.0 - sin_alpha * sin_alpha;
  const auto [a_coef, b_coef] = series(cos_sq_alpha);

  const double base = distance_m / (kB * a_coef);
  double sigma = base;
  double sin_sigma = std::sin(sigma);
  double cos_sigma = std::cos(sigma);
  double cos_2sm = std::cos(2.0 * sigma1 + sigma);
  for (int it = 0; it < kMaxIterations; ++it) {
    cos_2sm = std::cos(2.0 * sigma1 + sigma);
    sin_sigma = std::sin(sigma);
    cos_sigma = std::cos(sigma);
    const double next = base + delta_sigma(b_coef, sin_sigma, cos_sigma, cos_2sm);
    const bool done = std::abs(next - sigma) < 1e-14;
    sigma = next;
    if (done) break;
  }
  sin_sigma = std::sin(sigma);
  cos_sigma = std::cos(sigma);
  cos_2sm = std::cos(2.0 * sigma1 + sigma);

  const double x = sin_u1 * sin_sigma - cos_u1 * cos_sigma * cos_alpha1;
  const double lat2 = std::atan2(sin_u1 * cos_sigma + cos_u1 * sin_sigma * cos_alpha1,
                                 (1.0 - kF) * std::sqrt(sin_alpha * sin_alpha + x * x));
  const double lambda = std::atan2(sin_sigma * sin_alpha1, cos_u1 * cos_sigma - sin_u1 * sin_sigma * cos_alpha1);
  const double c = kF / 16.0 * cos_sq_alpha * (4.0 + kF * (4.0 - 3.0 * cos_sq_alpha));
  const double big_l = lambda - (1.0 - c) * kF * sin_alpha *
                                    (sigma + c * sin_sigma * (cos_2sm + c * cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)));

  LatLon out;
  out.lat = std::clamp(lat2 / kDeg, -90.0, 90.0);
  out.lon = wrap_lon_deg(start.lon + big_l / kDeg);
  return out;
}

}  // namespace geoseq
