#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "blowuplab/ansatz.hpp"
#include "blowuplab/specialfn.hpp"
#include "support/bessel_oracle.hpp"

using namespace blowuplab;

namespace {

const DomainSpec kBall = DomainSpec::ball();
const double kPi2 = M_PI * M_PI;

ConcentrationConfig pair_config(double lambda, double beta = 1.0, double d1 = 1.0,
                                double d2 = 1.0) {
    const BoundaryPoint x1 = boundary_point(kBall, Vec4::UnitW());
    const BoundaryPoint x2 = boundary_point(kBall, -Vec4::UnitW());
    return ConcentrationConfig::make(lambda, beta, d1, d2, x1, x2, 0.25);
}

Vec4 random_in_ball(std::mt19937& rng, double rmax = 0.95) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec4 x;
    do {
        x = {u(rng), u(rng), u(rng), u(rng)};
    } while (x.norm() >= rmax || x.norm() < 1e-3);
    return x;
}

}  // namespace

TEST_CASE("config admissibility") {
    CHECK_THROWS(pair_config(2.0));  // lambda <= e
    const BoundaryPoint x1 = boundary_point(kBall, Vec4::UnitW());
    const BoundaryPoint x2 = boundary_point(kBall, -Vec4::UnitW());
    CHECK_THROWS(ConcentrationConfig::make(100.0, 1.0, 0.1, 1.0, x1, x2, 0.25));  // d <= eta
    CHECK_THROWS(ConcentrationConfig::make(100.0, 1.0, 5.0, 1.0, x1, x2, 0.25));  // d >= 1/eta
    const BoundaryPoint close = boundary_point(kBall, Vec4(0.3, 0, 0, 1.0).normalized());
    CHECK_THROWS(ConcentrationConfig::make(100.0, 1.0, 1.0, 1.0, x1, close, 0.25));

    const ConcentrationConfig c = pair_config(100.0);
    CHECK(c.delta[0] == doctest::Approx(1.0 / (100.0 * std::log(100.0))).epsilon(1e-15));
}

TEST_CASE("bubble: center value, scaling covariance, gradient, PDE") {
    CHECK(bubble(1.0, Vec4::Zero(), Vec4::Zero()).value ==
          doctest::Approx(2.0 * M_SQRT2).epsilon(1e-15));

    std::mt19937 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const Vec4 x = random_in_ball(rng);
        const Vec4 xi = 0.5 * random_in_ball(rng);
        const double delta = 0.05 + 0.5 * std::abs(x[0]);
        // scaling covariance U_{d,xi}(x) = d^-1 U_{1,0}((x-xi)/d)
        const double lhs = bubble(delta, xi, x).value;
        const double rhs = bubble(1.0, Vec4::Zero(), Vec4((x - xi) / delta)).value / delta;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }

    // gradient and Laplacian against central differences
    for (int i = 0; i < 50; ++i) {
        const Vec4 x = random_in_ball(rng);
        const Vec4 xi = Vec4::UnitW();
        const Field2Eval f = bubble_full(0.3, xi, x);
        const double h = 1e-5;
        double lap_fd = 0.0;
        for (int a = 0; a < 4; ++a) {
            Vec4 e = Vec4::Zero();
            e[a] = h;
            const double fp = bubble(0.3, xi, x + e).value;
            const double fm = bubble(0.3, xi, x - e).value;
            CHECK(f.gradient[a] ==
                  doctest::Approx((fp - fm) / (2.0 * h)).epsilon(1e-6).scale(1.0));
            lap_fd += (fp - 2.0 * f.value + fm) / (h * h);
        }
        CHECK(f.laplacian == doctest::Approx(lap_fd).epsilon(1e-4).scale(1.0));
        // -Delta U = U^3
        CHECK(-f.laplacian ==
              doctest::Approx(std::pow(f.value, 3.0)).epsilon(1e-12));
    }

    // int_{R^4} U_{1,0}^4 = 32 pi^2/3 via a large ball
    QuadTol tol;
    tol.rel = 1e-7;
    SingularityHint hint;
    hint.centers = {Vec4::Zero()};
    hint.min_panel = 0.25;
    const QuadResult m = integrate_domain(
        [](const Vec4& x) { return std::pow(bubble(1.0, Vec4::Zero(), x).value, 4.0); },
        DomainSpec::ball(50.0), hint, tol);
    CHECK(m.value == doctest::Approx(32.0 * kPi2 / 3.0).epsilon(1e-4));
}

TEST_CASE("correction field: the two closed forms agree to 1e-10") {
    std::mt19937 rng(5);
    for (double lambda : {1e2, 1e4}) {
        const double delta = 1.0 / (lambda * std::log(lambda));
        const Vec4 xi = Vec4::UnitW();
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Vec4 x = random_in_ball(rng);
            const double r = (x - xi).norm();
            if (r < 1e-3) continue;
            const double wd = correction_field(lambda, delta, xi, x).value;  // w-delta form
            const double sl = std::sqrt(lambda);
            const double ww1 = kBubbleAlpha * (delta / (r * r) -
                                               sl * delta * bessel_k1(sl * r) / r);
            if (std::abs(ww1) > 1e-300)
                worst = std::max(worst, std::abs(wd - ww1) / std::abs(ww1));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("correction field: far field and high-precision oracle point") {
    // sqrt(lambda) r >= 30: W ~ a delta / r^2 within 1e-6
    const double lambda = 1e4, delta = 1e-5;
    const Vec4 xi = Vec4::UnitW();
    for (double r : {0.31, 0.5, 0.9}) {
        const Vec4 x = xi - r * Vec4::UnitW();
        const double w = correction_field(lambda, delta, xi, x).value;
        const double far = kBubbleAlpha * delta / (r * r);
        CHECK(w == doctest::Approx(far).epsilon(1e-6));
    }

    // lambda = 1e4, delta = 1e-5, |x-xi| = 1e-3: binary128 oracle through ww-1
    const double r = 1e-3;
    const double s = std::sqrt(lambda) * r;
    const double oracle_w =
        kBubbleAlpha * (delta / (r * r) - std::sqrt(lambda) * delta * oracle::bessel_k1(s) / r);
    const Vec4 x = xi + Vec4(r, 0.0, 0.0, 0.0);
    CHECK(correction_field(lambda, delta, xi, x).value ==
          doctest::Approx(oracle_w).epsilon(1e-11));

    // gradient vs finite differences of the value
    std::mt19937 rng(7);
    for (int i = 0; i < 30; ++i) {
        const Vec4 p = random_in_ball(rng);
        if ((p - xi).norm() < 0.05) continue;
        const FieldEval f = correction_field(1e3, 1e-4, xi, p);
        const double h = 1e-6;
        for (int a = 0; a < 4; ++a) {
            Vec4 e = Vec4::Zero();
            e[a] = h;
            const double fd = (correction_field(1e3, 1e-4, xi, p + e).value -
                               correction_field(1e3, 1e-4, xi, p - e).value) /
                              (2.0 * h);
            CHECK(f.gradient[a] == doctest::Approx(fd).epsilon(2e-6).scale(1e-4));
        }
    }

    CHECK_THROWS(correction_field(1e3, 1e-4, xi, xi));  // singular point rejected
}

TEST_CASE("ansatz V: far-field bound, near-center closeness, V < U") {
    std::mt19937 rng(11);
    double worst_prev = -1.0;
    for (double lambda : {1e2, 1e3, 1e4}) {
        const ConcentrationConfig cfg = pair_config(lambda);
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            const Vec4 x = random_in_ball(rng);
            if ((x - cfg.xi[0].xi).norm() < 0.5 * cfg.eta) continue;
            worst = std::max(worst, std::abs(ansatz_v(cfg, 0, x).value) / cfg.delta[0]);
        }
        // |V| <= C delta away from the center, C stable across lambda
        CHECK(worst < 50.0);
        if (worst_prev > 0.0) CHECK(worst < 3.0 * worst_prev);
        worst_prev = worst;

        // near the center V is dominated by the bubble
        const Vec4 xc = cfg.xi[0].xi + cfg.delta[0] * cfg.xi[0].tangent_frame[0];
        const double v = ansatz_v(cfg, 0, xc).value;
        const double u = bubble(cfg.delta[0], cfg.xi[0].xi, xc).value;
        if (lambda >= 1e3) CHECK(v == doctest::Approx(u).epsilon(0.01));

        // V < U wherever the correction is positive
        for (int i = 0; i < 200; ++i) {
            const Vec4 x = random_in_ball(rng);
            const double w = correction_field(lambda, cfg.delta[0], cfg.xi[0].xi, x).value;
            if (w > 0.0)
                CHECK(ansatz_v(cfg, 0, x).value <
                      bubble(cfg.delta[0], cfg.xi[0].xi, x).value);
        }
    }
}

TEST_CASE("ansatz PDE residual vanishes relative to U^3 + lambda U") {
    std::mt19937 rng(13);
    for (double lambda : {1e2, 1e4}) {
        const ConcentrationConfig cfg = pair_config(lambda);
        const double delta = cfg.delta[0];
        const Vec4& xi = cfg.xi[0].xi;
        // stratified: near-center, mid, far
        std::vector<Vec4> pts;
        for (int i = 0; i < 300; ++i) {
            const Vec4 dir = Vec4::Random().normalized();
            pts.push_back(xi + 10.0 * delta * dir);
            pts.push_back(xi + std::sqrt(delta) * dir);
            pts.push_back(random_in_ball(rng));
        }
        for (const Vec4& x : pts) {
            if (!kBall.contains(x) || (x - xi).norm() < 5.0 * delta) continue;
            const double u = bubble(delta, xi, x).value;
            const double scale = u * u * u + lambda * u;
            CHECK(std::abs(ansatz_pde_residual(cfg, 0, x)) <= 1e-7 * scale);
        }
    }

    // finite-difference Laplacian cross-check at 3 points near the center,
    // where Delta V is large enough for central differences to resolve
    const ConcentrationConfig cfg = pair_config(1e3);
    const Vec4 dir = Vec4(1.0, 2.0, -1.0, 0.5).normalized();
    for (double k : {3.0, 10.0, 30.0}) {
        const Vec4 x = cfg.xi[0].xi + k * cfg.delta[0] * dir;
        const Field2Eval v = ansatz_v_full(cfg, 0, x);
        const double h = k * cfg.delta[0] / 150.0;
        double lap = 0.0;
        for (int a = 0; a < 4; ++a) {  // fourth-order central second difference
            Vec4 e = Vec4::Zero();
            e[a] = h;
            const double f1 = ansatz_v(cfg, 0, x + e).value;
            const double m1 = ansatz_v(cfg, 0, x - e).value;
            const double f2 = ansatz_v(cfg, 0, x + 2.0 * e).value;
            const double m2 = ansatz_v(cfg, 0, x - 2.0 * e).value;
            lap += (-f2 + 16.0 * f1 - 30.0 * v.value + 16.0 * m1 - m2) / (12.0 * h * h);
        }
        CHECK(v.laplacian == doctest::Approx(lap).epsilon(1e-5));
    }
}

TEST_CASE("kernel elements: closed forms, symmetry, domination") {
    const ConcentrationConfig cfg = pair_config(1e3);
    const double delta = cfg.delta[0];
    const Vec4& xi = cfg.xi[0].xi;

    // Z_0 at the center equals -alpha/delta (= -alpha when delta = 1);
    // checked against the dilation-derivative oracle d * dU/dd by finite
    // differences in delta
    const double z0c = kernel_element(cfg, 0, 0, xi).value;
    CHECK(z0c == doctest::Approx(-kBubbleAlpha / delta).epsilon(1e-12));
    {
        // delta = 1 variant of the same closed form
        const double v = kBubbleAlpha * 1.0 * (0.0 - 1.0) / std::pow(1.0 + 0.0, 2.0);
        CHECK(v == doctest::Approx(-kBubbleAlpha).epsilon(1e-15));
    }
    std::mt19937 rng(17);
    for (int i = 0; i < 200; ++i) {
        const Vec4 x = random_in_ball(rng);
        const double h = 1e-7 * delta;
        const double fd = delta *
                          (bubble(delta + h, xi, x).value - bubble(delta - h, xi, x).value) /
                          (2.0 * h);
        CHECK(kernel_element(cfg, 0, 0, x).value ==
              doctest::Approx(fd).epsilon(1e-6).scale(1e-8));
        for (int j = 1; j <= 3; ++j) {
            const Vec4 t = cfg.xi[0].tangent_frame[j - 1];
            const double fdt = delta *
                               (bubble(delta, xi - 1e-9 * t, x).value -
                                bubble(delta, xi + 1e-9 * t, x).value) /
                               (-2e-9);
            CHECK(kernel_element(cfg, 0, j, x).value ==
                  doctest::Approx(fdt).epsilon(1e-5).scale(1e-8));
        }
    }

    // oddness: Z_j vanishes at the center and flips under reflection
    for (int j = 1; j <= 3; ++j) {
        CHECK(kernel_element(cfg, 0, j, xi).value == 0.0);
        const Vec4 t = cfg.xi[0].tangent_frame[j - 1];
        const double plus = kernel_element(cfg, 0, j, xi + 0.1 * t).value;
        const double minus = kernel_element(cfg, 0, j, xi - 0.1 * t).value;
        CHECK(plus == doctest::Approx(-minus).epsilon(1e-12));
    }

    // pointwise domination |Z_j| <= U (sharp constant 1)
    double cfit = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Vec4 x = random_in_ball(rng);
        const double u = bubble(delta, xi, x).value;
        for (int j = 0; j < 4; ++j)
            cfit = std::max(cfit, std::abs(kernel_element(cfg, 0, j, x).value) / u);
    }
    CHECK(cfit <= 1.0 + 1e-12);

    // gradient consistency
    for (int i = 0; i < 20; ++i) {
        const Vec4 x = random_in_ball(rng);
        for (int j = 0; j < 4; ++j) {
            const FieldEval z = kernel_element(cfg, 0, j, x);
            for (int a = 0; a < 4; ++a) {
                Vec4 e = Vec4::Zero();
                e[a] = 1e-6;
                const double fd = (kernel_element(cfg, 0, j, x + e).value -
                                   kernel_element(cfg, 0, j, x - e).value) /
                                  2e-6;
                CHECK(z.gradient[a] == doctest::Approx(fd).epsilon(1e-5).scale(1e-6));
            }
        }
    }
}

TEST_CASE("kernel Gram matrix: diagonal limits and off-diagonal decay") {
    // half-space oracle for A0 = lim sigma_00: (1/2) int_{R^4} |grad Z0|^2 with
    // Z0 = a(|y|^2-1)/(1+|y|^2)^2, evaluated by 1D radial quadrature
    double a0_oracle = 0.0;
    {
        const int n = 200000;
        const double rmax = 400.0;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {  // midpoint rule on a graded grid
            const double t = (i + 0.5) / n;
            const double r = rmax * t * t * t;
            const double dr = 3.0 * rmax * t * t / n;
            const double q = 1.0 + r * r;
            const double gz = 2.0 * kBubbleAlpha * r * (3.0 - r * r) / (q * q * q);
            acc += gz * gz * r * r * r * dr;
        }
        // analytic tail: |grad Z0| ~ 2a/r^3 for r >> 1
        acc += 2.0 * kBubbleAlpha * kBubbleAlpha / (rmax * rmax);
        a0_oracle = 0.5 * 2.0 * kPi2 * acc;
    }
    CHECK(a0_oracle == doctest::Approx(3.2 * kPi2).epsilon(1e-5));  // closed form cross-check

    QuadTol tol;
    tol.rel = 1e-6;
    double prev_gap = 1e300, prev_off = 1e300;
    for (double lambda : {1e2, 1e3, 1e4}) {
        const ConcentrationConfig cfg = pair_config(lambda);
        const Mat4 sigma = kernel_gram(cfg, 0, kBall, tol);
        for (int k = 0; k < 4; ++k) CHECK(sigma(k, k) > 0.0);
        const double gap = std::abs(sigma(0, 0) - a0_oracle) / a0_oracle;
        CHECK(gap < prev_gap);
        prev_gap = gap;
        double off = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                if (a != b) off = std::max(off, std::abs(sigma(a, b)) / sigma(0, 0));
        CHECK(off < prev_off + 1e-12);
        prev_off = off;
    }
    CHECK(prev_gap < 0.05);
    CHECK(prev_off < 0.05);
}

TEST_CASE("||W_lambda||_L4^4 stays within its lambda^2 delta^4 (ln lambda)^4 envelope") {
    QuadTol tol;
    tol.rel = 1e-5;
    double worst = 0.0;
    for (double lambda : {1e2, 1e3, 1e4}) {
        const ConcentrationConfig cfg = pair_config(lambda);
        SingularityHint hint = concentration_hint(cfg, false);
        const QuadResult r = integrate_domain(
            [&](const Vec4& x) {
                const double w =
                    correction_field(cfg.lambda, cfg.delta[0], cfg.xi[0].xi, x).value;
                return w * w * w * w;
            },
            kBall, hint, tol);
        const double envelope = lambda * lambda * std::pow(cfg.delta[0], 4.0) *
                                std::pow(std::log(lambda), 4.0);
        worst = std::max(worst, r.value / envelope);
    }
    CHECK(worst < 50.0);
    CHECK(worst > 1e-4);  // envelope is the right order, not wildly loose
}
