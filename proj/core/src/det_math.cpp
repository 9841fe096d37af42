#include "wmbench/det_math.hpp"

#include <cmath>

namespace wmbench::detmath {
namespace {

// Reciprocal factorials, folded at compile time (correctly rounded).
constexpr double kS3 = -1.0 / 6.0;
constexpr double kS5 = 1.0 / 120.0;
constexpr double kS7 = -1.0 / 5040.0;
constexpr double kS9 = 1.0 / 362880.0;
constexpr double kS11 = -1.0 / 39916800.0;
constexpr double kS13 = 1.0 / 6227020800.0;
constexpr double kS15 = -1.0 / 1307674368000.0;
constexpr double kS17 = 1.0 / 355687428096000.0;

constexpr double kC2 = -1.0 / 2.0;
constexpr double kC4 = 1.0 / 24.0;
constexpr double kC6 = -1.0 / 720.0;
constexpr double kC8 = 1.0 / 40320.0;
constexpr double kC10 = -1.0 / 3628800.0;
constexpr double kC12 = 1.0 / 479001600.0;
constexpr double kC14 = -1.0 / 87178291200.0;
constexpr double kC16 = 1.0 / 20922789888000.0;

double sin_poly(double x) {
  const double x2 = x * x;
  double p = kS17;
  p = kS15 + x2 * p;
  p = kS13 + x2 * p;
  p = kS11 + x2 * p;
  p = kS9 + x2 * p;
  p = kS7 + x2 * p;
  p = kS5 + x2 * p;
  p = kS3 + x2 * p;
  p = 1.0 + x2 * p;
  return x * p;
}

double cos_poly(double x) {
  const double x2 = x * x;
  double p = kC16;
  p = kC14 + x2 * p;
  p = kC12 + x2 * p;
  p = kC10 + x2 * p;
  p = kC8 + x2 * p;
  p = kC6 + x2 * p;
  p = kC4 + x2 * p;
  p = kC2 + x2 * p;
  return 1.0 + x2 * p;
}

}  // namespace

double wrap_degrees(double degrees) {
  double d = std::fmod(degrees, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d = 0.0;
  return d + 0.0;  // folds -0 into +0
}

double angle_diff_deg(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

void sincos_deg(double degrees, double& s, double& c) {
  const double d = wrap_degrees(degrees);
  const double q = std::floor(d / 90.0 + 0.5);
  const double x = (d - 90.0 * q) * kDegToRad;
  const double s0 = sin_poly(x);
  const double c0 = cos_poly(x);
  switch (static_cast<int>(q) & 3) {
    case 0: s = s0; c = c0; break;
    case 1: s = c0; c = -s0; break;
    case 2: s = -s0; c = -c0; break;
    default: s = -c0; c = s0; break;
  }
  s += 0.0;
  c += 0.0;
}

double sin_deg(double degrees) {
  double s, c;
  sincos_deg(degrees, s, c);
  return s;
}

double cos_deg(double degrees) {
  double s, c;
  sincos_deg(degrees, s, c);
  return c;
}

double atan2_deg(double y, double x) { return std::atan2(y, x) / kDegToRad; }

}  // namespace wmbench::detmath
