#pragma once

// Platform-independent elementary functions.
//
// Everything here is built from IEEE-754 +, -, *, / and sqrt only, which are
// correctly rounded on every conforming target. Combined with
// -ffp-contract=off this gives bit-identical results on x86-64 and AArch64,
// which the libm sin/cos do not guarantee.

#include <cstdint>

namespace wmbench::detmath {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

/// sin of an angle given in degrees. Argument is reduced to [-45, 45]
/// degrees by quadrant, then evaluated with a degree-17 Taylor polynomial
/// (truncation error below 1e-19 on the reduced range).
double sin_deg(double degrees);
double cos_deg(double degrees);

/// Sine and cosine sharing one range reduction.
void sincos_deg(double degrees, double& s, double& c);

/// atan2 in degrees, used only for pose read-back (never on the render path).
double atan2_deg(double y, double x);

/// Wrap into [0, 360). The result is never 360 itself.
double wrap_degrees(double degrees);

/// Signed shortest angular difference a - b in (-180, 180].
double angle_diff_deg(double a, double b);

}  // namespace wmbench::detmath
