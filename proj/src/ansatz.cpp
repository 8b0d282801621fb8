#include "blowuplab/ansatz.hpp"

#include <cmath>
#include <stdexcept>

#include "blowuplab/specialfn.hpp"

namespace blowuplab {

namespace {

constexpr double kA = kBubbleAlpha;

void check_off_center(double r) {
    if (r < kSingularRadius)
        throw std::domain_error("evaluation at a concentration point rejected");
}

void check_index(int i) {
    if (i != 0 && i != 1) throw std::out_of_range("component index must be 0 or 1");
}

}  // namespace

ConcentrationConfig ConcentrationConfig::make(double lambda, double beta, double d1, double d2,
                                              const BoundaryPoint& xi1,
                                              const BoundaryPoint& xi2, double eta) {
    if (!(lambda > M_E)) throw std::invalid_argument("lambda must exceed e (ln lambda > 1)");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0,1)");
    for (double d : {d1, d2})
        if (!(d > eta && d < 1.0 / eta))
            throw std::invalid_argument("d_i must satisfy eta < d_i < 1/eta");
    if ((xi1.xi - xi2.xi).norm() < 2.0 * eta)
        throw std::invalid_argument("|xi1 - xi2| >= 2 eta violated");
    ConcentrationConfig c;
    c.lambda = lambda;
    c.beta = beta;
    c.d = {d1, d2};
    c.xi = {xi1, xi2};
    c.eta = eta;
    const double ll = lambda * std::log(lambda);
    c.delta = {d1 / ll, d2 / ll};
    return c;
}

ConcentrationConfig ConcentrationConfig::single(double lambda, double beta, double d,
                                                const BoundaryPoint& xi, double eta) {
    if (!(lambda > M_E)) throw std::invalid_argument("lambda must exceed e (ln lambda > 1)");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0,1)");
    if (!(d > eta && d < 1.0 / eta))
        throw std::invalid_argument("d must satisfy eta < d < 1/eta");
    ConcentrationConfig c;
    c.lambda = lambda;
    c.beta = beta;
    c.d = {d, d};
    c.xi = {xi, xi};
    c.eta = eta;
    const double ll = lambda * std::log(lambda);
    c.delta = {d / ll, d / ll};
    return c;
}

FieldEval bubble(double delta, const Vec4& xi, const Vec4& x) {
    const Vec4 y = x - xi;
    const double q = delta * delta + y.squaredNorm();
    FieldEval f;
    f.value = kA * delta / q;
    f.gradient = -2.0 * kA * delta / (q * q) * y;
    return f;
}

Field2Eval bubble_full(double delta, const Vec4& xi, const Vec4& x) {
    const Vec4 y = x - xi;
    const double q = delta * delta + y.squaredNorm();
    Field2Eval f;
    f.value = kA * delta / q;
    f.gradient = -2.0 * kA * delta / (q * q) * y;
    f.laplacian = -8.0 * kA * delta * delta * delta / (q * q * q);  // = -U^3
    return f;
}

FieldEval correction_field(double lambda, double delta, const Vec4& xi, const Vec4& x) {
    const Vec4 y = x - xi;
    const double r = y.norm();
    check_off_center(r);
    const double sl = std::sqrt(lambda);
    const CorrectionEval w = correction_w(sl * r);
    FieldEval f;
    f.value = kA * lambda * delta * w.w;
    f.gradient = kA * lambda * sl * delta * w.w_prime / r * y;
    return f;
}

Field2Eval correction_field_full(double lambda, double delta, const Vec4& xi, const Vec4& x) {
    const Vec4 y = x - xi;
    const double r = y.norm();
    check_off_center(r);
    const double sl = std::sqrt(lambda);
    const double s = sl * r;
    const CorrectionEval w = correction_w(s);
    Field2Eval f;
    f.value = kA * lambda * delta * w.w;
    f.gradient = kA * lambda * sl * delta * w.w_prime / r * y;
    f.laplacian = kA * lambda * lambda * delta * (w.w_second + 3.0 * w.w_prime / s);
    return f;
}

FieldEval ansatz_v(const ConcentrationConfig& cfg, int i, const Vec4& x) {
    check_index(i);
    const FieldEval u = bubble(cfg.delta[i], cfg.xi[i].xi, x);
    const FieldEval w = correction_field(cfg.lambda, cfg.delta[i], cfg.xi[i].xi, x);
    return {u.value - w.value, u.gradient - w.gradient};
}

Field2Eval ansatz_v_full(const ConcentrationConfig& cfg, int i, const Vec4& x) {
    check_index(i);
    const Field2Eval u = bubble_full(cfg.delta[i], cfg.xi[i].xi, x);
    const Field2Eval w = correction_field_full(cfg.lambda, cfg.delta[i], cfg.xi[i].xi, x);
    return {u.value - w.value, u.gradient - w.gradient, u.laplacian - w.laplacian};
}

double ansatz_pde_residual(const ConcentrationConfig& cfg, int i, const Vec4& x) {
    check_index(i);
    const double delta = cfg.delta[i];
    const Vec4& xi = cfg.xi[i].xi;
    const double r2 = (x - xi).squaredNorm();
    check_off_center(std::sqrt(r2));
    const Field2Eval v = ansatz_v_full(cfg, i, x);
    const Field2Eval u = bubble_full(cfg.delta[i], xi, x);
    const double u3 = u.value * u.value * u.value;
    return -v.laplacian + cfg.lambda * v.value - u3 -
           cfg.lambda * (u.value - kA * delta / r2);
}

FieldEval kernel_element(const ConcentrationConfig& cfg, int i, int j, const Vec4& x) {
    check_index(i);
    if (j < 0 || j > 3) throw std::out_of_range("kernel index j must be 0..3");
    const double delta = cfg.delta[i];
    const Vec4 y = x - cfg.xi[i].xi;
    const double r2 = y.squaredNorm();
    const double q = delta * delta + r2;
    FieldEval f;
    if (j == 0) {
        // Z_0 = d dU/dd = a d (r^2 - d^2)/(d^2+r^2)^2
        f.value = kA * delta * (r2 - delta * delta) / (q * q);
        f.gradient = 2.0 * kA * delta * (3.0 * delta * delta - r2) / (q * q * q) * y;
    } else {
        // Z_j = d dU/dt_j = 2 a d^2 (y . t_j)/(d^2+r^2)^2
        const Vec4& t = cfg.xi[i].tangent_frame[j - 1];
        const double yt = y.dot(t);
        f.value = 2.0 * kA * delta * delta * yt / (q * q);
        f.gradient = 2.0 * kA * delta * delta * (q * t - 4.0 * yt * y) / (q * q * q);
    }
    return f;
}

SingularityHint concentration_hint(const ConcentrationConfig& cfg, bool both_centers) {
    SingularityHint h;
    h.centers.push_back(cfg.xi[0].xi);
    double dmin = cfg.delta[0];
    if (both_centers) {
        h.centers.push_back(cfg.xi[1].xi);
        dmin = std::min(dmin, cfg.delta[1]);
    }
    h.min_panel = std::max(0.25 * dmin, 1e-10);
    return h;
}

Mat4 kernel_gram(const ConcentrationConfig& cfg, int i, const DomainSpec& domain,
                 const QuadTol& tol) {
    check_index(i);
    ConcentrationConfig c = cfg;
    if (i == 1) std::swap(c.xi[0], c.xi[1]);  // hint centers on the active bubble
    SingularityHint hint;
    hint.centers = {cfg.xi[i].xi};
    hint.min_panel = std::max(0.25 * cfg.delta[i], 1e-10);

    // upper triangle of sigma in one pass
    const QuadResultN r = integrate_domain_n(
        [&](const Vec4& x, double* out) {
            FieldEval z[4];
            for (int k = 0; k < 4; ++k) z[k] = kernel_element(cfg, i, k, x);
            int c2 = 0;
            for (int a = 0; a < 4; ++a)
                for (int b = a; b < 4; ++b)
                    out[c2++] = z[a].gradient.dot(z[b].gradient) +
                                cfg.lambda * z[a].value * z[b].value;
        },
        10, domain, hint, tol);
    Mat4 sigma;
    int c2 = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
            sigma(a, b) = r.value[c2];
            sigma(b, a) = r.value[c2];
            ++c2;
        }
    return sigma;
}

}  // namespace blowuplab
