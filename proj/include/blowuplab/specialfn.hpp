#pragma once

// Modified Bessel functions K0, K1 and the radial correction profile
// W(r) = 1/r^2 - K1(r)/r, which solves  -W'' - (3/r) W' + W = 1/r^2  (the
// radial form of -ΔW + W = 1/|x|^2 in R^4).
//
// Supported argument range is [1e-8, 700].  Beyond 700 the Bessel tail is
// below double range; evaluations return the exact algebraic limit with the
// underflow flag set so integrators can drop far-field tails knowingly.

namespace blowuplab {

// Euler-Mascheroni constant, 20 digits.
inline constexpr double kEulerGamma = 0.57721566490153286061;

// K1(r) < DBL_MIN for r beyond this; see underflow policy above.
inline constexpr double kBesselUnderflowR = 700.0;

struct BesselEval {
    double r = 0.0;
    double k1 = 0.0;
    double k1_prime = 0.0;   // K1'(r) = -K0(r) - K1(r)/r
    double k1_second = 0.0;  // K1''(r) = K1 + K0/r + 2 K1/r^2
    bool underflow = false;
};

struct CorrectionEval {
    double r = 0.0;
    double w = 0.0;
    double w_prime = 0.0;
    double w_second = 0.0;
    bool bessel_tail_dropped = false;  // r > 700: K1/r term is exactly 0 in double
};

// Throw std::domain_error unless r is finite and > 0.
double bessel_k0(double r);
double bessel_k1(double r);

// Derivatives come from the standard recurrences (never finite differences).
BesselEval bessel_k1_derivs(double r);

// W, W', W''.  For r <= 1 the closed forms 1/r^2 - K1/r etc. lose all digits
// to cancellation, so the same expressions are evaluated through the K1
// power series with the singular parts cancelled symbolically.
CorrectionEval correction_w(double r);

}  // namespace blowuplab
