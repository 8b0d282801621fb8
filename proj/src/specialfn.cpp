#include "blowuplab/specialfn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace blowuplab {

namespace {

constexpr double kSeriesCut = 2.0;  // series below, continued fraction above
constexpr int kMaxIter = 200;

void check_arg(double r) {
    if (!std::isfinite(r) || r <= 0.0)
        throw std::domain_error("bessel: argument must be finite and > 0, got " +
                                std::to_string(r));
}

struct K0K1 {
    double k0;
    double k1;
};

// Ascending series, DLMF 10.31:
//   K0 = -(ln(r/2)+g) I0 + sum_{k>=1} h_k u^k/(k!)^2
//   K1 = 1/r + (ln(r/2)+g) I1 - (r/4) sum_{k>=0} (h_k+h_{k+1}) u^k/(k!(k+1)!)
// with u = r^2/4 and h_k the harmonic numbers.  Converges fast for r <= 2.
K0K1 k0k1_series(double r) {
    const double u = 0.25 * r * r;
    const double lg = std::log(0.5 * r) + kEulerGamma;

    double i0 = 1.0, s0 = 0.0;       // I0 and its h_k companion sum
    double g = 1.0, sh = 1.0;        // G = sum u^k/(k!(k+1)!) and (h_k+h_{k+1}) companion
    double tk0 = 1.0;                // u^k/(k!)^2
    double tk1 = 1.0;                // u^k/(k!(k+1)!)
    double hk = 0.0;
    for (int k = 1; k < kMaxIter; ++k) {
        tk0 *= u / (static_cast<double>(k) * k);
        tk1 *= u / (static_cast<double>(k) * (k + 1));
        hk += 1.0 / k;
        const double hk1 = hk + 1.0 / (k + 1);
        i0 += tk0;
        s0 += tk0 * hk;
        g += tk1;
        sh += tk1 * (hk + hk1);
        if (tk0 < 1e-19 * i0 && tk1 < 1e-19 * g) break;
    }
    const double i1 = 0.5 * r * g;
    K0K1 out;
    out.k0 = -lg * i0 + s0;
    out.k1 = 1.0 / r + lg * i1 - 0.25 * r * sh;
    return out;
}

// Steed/Thompson-Barnett continued fraction (CF2) at order mu = 0, valid for
// r >= 2: yields K0 and the ratio giving K1.
K0K1 k0k1_cf(double r) {
    constexpr double eps = 1e-17;
    const double a1 = 0.25;  // 0.25 - mu^2 with mu = 0
    double b = 2.0 * (1.0 + r);
    double d = 1.0 / b;
    double dh = d;
    double h = dh;
    double q1 = 0.0, q2 = 1.0;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * dh;
    int quiet = 0;  // require two consecutive negligible increments
    for (int i = 2; i <= kMaxIter; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qn = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qn;
        q += c * qn;
        b += 2.0;
        d = 1.0 / (b + a * d);
        dh = (b * d - 1.0) * dh;
        h += dh;
        const double ds = q * dh;
        s += ds;
        quiet = (std::abs(ds) < eps * std::abs(s)) ? quiet + 1 : 0;
        if (quiet >= 2) break;
    }
    h *= a1;
    K0K1 out;
    out.k0 = std::sqrt(M_PI / (2.0 * r)) * std::exp(-r) / s;
    out.k1 = out.k0 * (0.5 + r - h) / r;
    return out;
}

K0K1 k0k1(double r) {
    return (r < kSeriesCut) ? k0k1_series(r) : k0k1_cf(r);
}

}  // namespace

double bessel_k0(double r) {
    check_arg(r);
    if (r > kBesselUnderflowR) return 0.0;
    return k0k1(r).k0;
}

double bessel_k1(double r) {
    check_arg(r);
    if (r > kBesselUnderflowR) return 0.0;
    return k0k1(r).k1;
}

BesselEval bessel_k1_derivs(double r) {
    check_arg(r);
    BesselEval ev;
    ev.r = r;
    if (r > kBesselUnderflowR) {
        ev.underflow = true;
        return ev;
    }
    const K0K1 v = k0k1(r);
    ev.k1 = v.k1;
    ev.k1_prime = -v.k0 - v.k1 / r;
    ev.k1_second = v.k1 + v.k0 / r + 2.0 * v.k1 / (r * r);
    return ev;
}

CorrectionEval correction_w(double r) {
    check_arg(r);
    CorrectionEval ev;
    ev.r = r;
    if (r > kBesselUnderflowR) {
        // K1(r)/r == 0 in double; W reduces to its far-field algebraic part.
        ev.w = 1.0 / (r * r);
        ev.w_prime = -2.0 / (r * r * r);
        ev.w_second = 6.0 / (r * r * r * r);
        ev.bessel_tail_dropped = true;
        return ev;
    }
    if (r > 1.0) {
        const BesselEval b = bessel_k1_derivs(r);
        const double r2 = r * r;
        ev.w = 1.0 / r2 - b.k1 / r;
        ev.w_prime = -2.0 / (r2 * r) - b.k1_prime / r + b.k1 / r2;
        ev.w_second =
            6.0 / (r2 * r2) - b.k1_second / r + 2.0 * b.k1_prime / r2 - 2.0 * b.k1 / (r2 * r);
        return ev;
    }

    // Series branch.  Substituting the K1 series into W = 1/r^2 - K1/r cancels
    // the 1/r^2 and 1/r poles exactly, leaving (A = ln(r/2)+g, u = r^2/4):
    //   W   = -A G/2 + Gh/4
    //   W'  = -G/(2r) - (A r/4) G' + (r/8) Gh'
    //   W'' =  G/(2r^2) - G'/2 - (A/4) G' - (A u/2) G'' + Gh'/8 + (u/4) Gh''
    // with G = sum u^k/(k!(k+1)!) and Gh its (h_k + h_{k+1})-weighted variant.
    const double u = 0.25 * r * r;
    const double A = std::log(0.5 * r) + kEulerGamma;
    double g = 1.0, g1 = 0.0, g2 = 0.0;
    double gh = 1.0, gh1 = 0.0, gh2 = 0.0;
    double tk = 1.0;  // u^k/(k!(k+1)!)
    double hk = 0.0;
    for (int k = 1; k < kMaxIter; ++k) {
        tk *= u / (static_cast<double>(k) * (k + 1));
        hk += 1.0 / k;
        const double wk = hk + hk + 1.0 / (k + 1);  // h_k + h_{k+1}
        g += tk;
        gh += tk * wk;
        g1 += k * tk / u;
        gh1 += k * tk * wk / u;
        if (k >= 2) {
            g2 += static_cast<double>(k) * (k - 1) * tk / (u * u);
            gh2 += static_cast<double>(k) * (k - 1) * tk * wk / (u * u);
        }
        if (tk < 1e-19 * g) break;
    }
    ev.w = -0.5 * A * g + 0.25 * gh;
    ev.w_prime = -g / (2.0 * r) - 0.25 * A * r * g1 + 0.125 * r * gh1;
    ev.w_second = g / (2.0 * r * r) - 0.5 * g1 - 0.25 * A * g1 - 0.5 * A * u * g2 +
                  0.125 * gh1 + 0.25 * u * gh2;
    return ev;
}

}  // namespace blowuplab
