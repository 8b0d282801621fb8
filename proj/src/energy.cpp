#include "blowuplab/energy.hpp"

#include <cmath>

#include "blowuplab/specialfn.hpp"

namespace blowuplab {

namespace {

constexpr double kA = kBubbleAlpha;

double sq(double x) { return x * x; }

ConcentrationConfig with_active_first(const ConcentrationConfig& cfg, int i) {
    ConcentrationConfig c = cfg;
    if (i == 1) {
        std::swap(c.d[0], c.d[1]);
        std::swap(c.xi[0], c.xi[1]);
        std::swap(c.delta[0], c.delta[1]);
    }
    return c;
}

}  // namespace

EnergyBreakdown energy_full(const ConcentrationConfig& cfg, const DomainSpec& domain,
                            const QuadTol& tol) {
    const SingularityHint hint = concentration_hint(cfg, true);
    const QuadResultN r = integrate_domain_n(
        [&](const Vec4& x, double* out) {
            const FieldEval v1 = ansatz_v(cfg, 0, x);
            const FieldEval v2 = ansatz_v(cfg, 1, x);
            out[0] = v1.gradient.squaredNorm() + v2.gradient.squaredNorm();
            out[1] = sq(v1.value) + sq(v2.value);
            out[2] = sq(sq(v1.value)) + sq(sq(v2.value));
            out[3] = sq(v1.value) * sq(v2.value);
        },
        4, domain, hint, tol);
    EnergyBreakdown b;
    b.dirichlet = 0.5 * r.value[0];
    b.mass = 0.5 * cfg.lambda * r.value[1];
    b.quartic = -0.25 * r.value[2];
    b.coupling = -0.5 * cfg.beta * r.value[3];
    b.total = b.dirichlet + b.mass + b.quartic + b.coupling;
    b.err_est = 0.5 * r.err_est[0] + 0.5 * cfg.lambda * r.err_est[1] + 0.25 * r.err_est[2] +
                0.5 * std::abs(cfg.beta) * r.err_est[3];
    b.converged = r.converged;
    return b;
}

EnergyValue single_energy_detailed(const ConcentrationConfig& cfg, int i,
                                   const DomainSpec& domain, const QuadTol& tol) {
    const ConcentrationConfig c = with_active_first(cfg, i);
    const SingularityHint hint = concentration_hint(c, false);
    const QuadResultN r = integrate_domain_n(
        [&](const Vec4& x, double* out) {
            const FieldEval v = ansatz_v(c, 0, x);
            out[0] = v.gradient.squaredNorm();
            out[1] = sq(v.value);
            out[2] = sq(sq(v.value));
        },
        3, domain, hint, tol);
    EnergyValue ev;
    ev.value = 0.5 * r.value[0] + 0.5 * cfg.lambda * r.value[1] - 0.25 * r.value[2];
    ev.err_est =
        0.5 * r.err_est[0] + 0.5 * cfg.lambda * r.err_est[1] + 0.25 * r.err_est[2];
    ev.converged = r.converged;
    return ev;
}

double single_energy(const ConcentrationConfig& cfg, int i, const DomainSpec& domain,
                     const QuadTol& tol) {
    return single_energy_detailed(cfg, i, domain, tol).value;
}

EnergyValue coupling_term(const ConcentrationConfig& cfg, const DomainSpec& domain,
                          const QuadTol& tol) {
    if (cfg.beta == 0.0) return {0.0, 0.0, true};
    if ((cfg.xi[0].xi - cfg.xi[1].xi).norm() < 2.0 * cfg.eta)
        throw std::invalid_argument("coupling_term: centers violate |xi1-xi2| >= 2 eta");
    const SingularityHint hint = concentration_hint(cfg, true);
    const QuadResult r = integrate_domain(
        [&](const Vec4& x) {
            return sq(ansatz_v(cfg, 0, x).value) * sq(ansatz_v(cfg, 1, x).value);
        },
        domain, hint, tol);
    return {-0.5 * cfg.beta * r.value, 0.5 * std::abs(cfg.beta) * r.err_est, r.converged};
}

ReducedEnergySample reduced_energy(const ConcentrationConfig& cfg, const DomainSpec& domain,
                                   const QuadTol& tol) {
    ReducedEnergySample s;
    const EnergyValue e1 = single_energy_detailed(cfg, 0, domain, tol);
    const EnergyValue e2 = single_energy_detailed(cfg, 1, domain, tol);
    const EnergyValue cp = coupling_term(cfg, domain, tol);
    s.i1 = e1.value;
    s.i2 = e2.value;
    s.coupling = cp.value;
    s.value = s.i1 + s.i2 + s.coupling;
    s.err_est = e1.err_est + e2.err_est + cp.err_est;
    s.converged = e1.converged && e2.converged && cp.converged;
    // ||E||_H ||psi||_H = O( sum_i delta_i |ln d_i|^(2/3) / (l (ln l)^(1/3)) )
    double err_scale = 0.0;
    for (int i = 0; i < 2; ++i)
        err_scale += cfg.delta[i] * std::pow(std::abs(std::log(cfg.delta[i])), 2.0 / 3.0);
    s.neglected_bound =
        err_scale / (cfg.lambda * std::pow(std::log(cfg.lambda), 1.0 / 3.0));
    return s;
}

ErrorNormReport error_dual_norms(const ConcentrationConfig& cfg, int i,
                                 const DomainSpec& domain, const QuadTol& tol) {
    const ConcentrationConfig c = with_active_first(cfg, i);
    const double lambda = c.lambda;
    const double delta = c.delta[0];
    const double dj = c.delta[1];
    const Vec4& xi = c.xi[0].xi;
    const double sl = std::sqrt(lambda);

    ErrorNormReport rep;
    const double p43 = 4.0 / 3.0;

    // E1..E4 share one pass; integrands in L^(4/3) power form
    {
        const SingularityHint hint = concentration_hint(c, false);
        const QuadResultN r = integrate_domain_n(
            [&](const Vec4& x, double* out) {
                const double u = bubble(delta, xi, x).value;
                const double w = correction_field(lambda, delta, xi, x).value;
                const double r2 = (x - xi).squaredNorm();
                out[0] = std::pow(std::abs(3.0 * u * u * w), p43);
                out[1] = std::pow(std::abs(3.0 * u * w * w), p43);
                out[2] = std::pow(std::abs(w * w * w), p43);
                out[3] = std::pow(std::abs(lambda * (u - kA * delta / r2)), p43);
            },
            4, domain, hint, tol);
        for (int k = 0; k < 4; ++k) rep.e[k] = std::pow(r.value[k], 0.75);
        rep.converged = r.converged;
    }

    // E5: boundary L^(3/2) norm of d_nu U - d_nu W_lambda
    {
        SingularityHint hint = concentration_hint(c, false);
        const QuadResultN r = integrate_boundary_n(
            [&](const Vec4& x, const Vec4& nu, double* out) {
                const Vec4 gu = bubble(delta, xi, x).gradient;
                const Vec4 gw = correction_field(lambda, delta, xi, x).gradient;
                out[0] = std::pow(std::abs((gu - gw).dot(nu)), 1.5);
            },
            1, domain, hint, tol);
        rep.e[4] = std::pow(r.value[0], 2.0 / 3.0);
        rep.converged = rep.converged && r.converged;
    }

    // E6: |b| ||V_i V_j^2||_{L^(4/3)}, split over the proof's eta/2-balls
    if (c.beta == 0.0) {
        rep.e[5] = 0.0;
        rep.e6_regions = {0.0, 0.0, 0.0};
    } else {
        auto integrand = [&](const Vec4& x, double* out) {
            out[0] = std::pow(
                std::abs(ansatz_v(c, 0, x).value) * sq(ansatz_v(c, 1, x).value), p43);
        };
        SingularityHint hint_i = concentration_hint(c, true);
        hint_i.region_radii = {0.5 * c.eta};
        const QuadResultN ri = integrate_domain_n(integrand, 1, domain, hint_i, tol);
        SingularityHint hint_j = hint_i;
        std::swap(hint_j.centers[0], hint_j.centers[1]);
        const QuadResultN rj = integrate_domain_n(integrand, 1, domain, hint_j, tol);
        const double total = ri.value[0];
        const double near_i = ri.region_value[0][0];
        const double near_j = rj.region_value[0][0];
        rep.e[5] = std::abs(c.beta) * std::pow(total, 0.75);
        rep.e6_regions = {std::abs(c.beta) * std::pow(near_i, 0.75),
                          std::abs(c.beta) * std::pow(near_j, 0.75),
                          std::abs(c.beta) *
                              std::pow(std::max(0.0, total - near_i - near_j), 0.75)};
        rep.converged = rep.converged && ri.converged && rj.converged;
    }

    const double lnd = std::abs(std::log(delta));
    const double lnl = std::log(lambda);
    rep.s[0] = lambda * delta * delta * lnd;
    rep.s[1] = std::pow(lambda, 1.5) * delta * delta * delta * lnl * lnl;
    rep.s[2] = std::pow(lambda, 1.5) * delta * delta * delta * lnl * lnl * lnl;
    rep.s[3] = lambda * delta * delta;
    rep.s[4] = delta * std::pow(lnd, 2.0 / 3.0);
    rep.s[5] = std::abs(c.beta) * delta * dj;
    rep.total_bound = delta * std::pow(lnd, 2.0 / 3.0) +
                      dj * std::pow(std::abs(std::log(dj)), 2.0 / 3.0);
    (void)sl;
    return rep;
}

QDecomposition q_decomposition(const ConcentrationConfig& cfg, int i,
                               const DomainSpec& domain, const QuadTol& tol) {
    const ConcentrationConfig c = with_active_first(cfg, i);
    const double lambda = c.lambda;
    const double delta = c.delta[0];
    const Vec4& xi = c.xi[0].xi;
    const double sl = std::sqrt(lambda);

    SingularityHint hint = concentration_hint(c, false);
    hint.region_radii = {std::sqrt(delta), 1.0 / sl};

    const QuadResultN r = integrate_domain_n(
        [&](const Vec4& x, double* out) {
            const double u = bubble(delta, xi, x).value;
            const double w = correction_field(lambda, delta, xi, x).value;
            const double rr = (x - xi).norm();
            const double m1 = -delta * delta * delta / (rr * rr * (delta * delta + rr * rr));
            const double k1 = bessel_k1(sl * rr);
            const double m2 = sl * delta * k1 / rr;
            out[0] = lambda * (u - w) * u;  // V U
            out[1] = lambda * u * u;
            out[2] = lambda * w * u;
            out[3] = lambda * kA * m1 * u;
            out[4] = lambda * kA * m2 * u;
        },
        5, domain, hint, tol);

    QDecomposition q;
    q.q = r.value[0];
    q.q1 = r.region_value[1][0];
    q.q2 = r.region_value[2][0];
    q.q3 = r.region_value[0][1] + r.region_value[0][2];
    q.m1 = r.region_value[3][1] + r.region_value[3][2];
    q.m2 = r.region_value[4][1];
    q.m3 = r.region_value[4][2];
    const double scale = lambda * delta * delta * std::abs(std::log(delta));
    q.ratio_q1 = q.q1 / scale;
    q.ratio_q2 = std::abs(q.q2) / scale;
    q.ratio_q3 = std::abs(q.q3) / scale;
    q.converged = r.converged;
    return q;
}

EnergyValue reduced_energy_delta(const ConcentrationConfig& cfg, int i, double d_new,
                                 const DomainSpec& domain, const QuadTol& tol) {
    ConcentrationConfig alt = cfg;
    alt.d[i] = d_new;
    alt.delta[i] = d_new / (cfg.lambda * std::log(cfg.lambda));
    if (!(d_new > cfg.eta && d_new < 1.0 / cfg.eta))
        throw std::invalid_argument("reduced_energy_delta: d outside the admissible range");

    const int j = 1 - i;
    SingularityHint hint = concentration_hint(cfg, cfg.beta != 0.0);
    hint.min_panel = std::max(0.25 * std::min(cfg.delta[i], alt.delta[i]), 1e-10);
    if (i == 1 && cfg.beta != 0.0) std::swap(hint.centers[0], hint.centers[1]);

    const int ncomp = (cfg.beta != 0.0) ? 4 : 3;
    const QuadResultN r = integrate_domain_n(
        [&](const Vec4& x, double* out) {
            const FieldEval va = ansatz_v(alt, i, x);
            const FieldEval vb = ansatz_v(cfg, i, x);
            out[0] = va.gradient.squaredNorm() - vb.gradient.squaredNorm();
            out[1] = sq(va.value) - sq(vb.value);
            out[2] = sq(sq(va.value)) - sq(sq(vb.value));
            if (cfg.beta != 0.0)
                out[3] = (sq(va.value) - sq(vb.value)) * sq(ansatz_v(cfg, j, x).value);
        },
        ncomp, domain, hint, tol);

    EnergyValue ev;
    ev.value = 0.5 * r.value[0] + 0.5 * cfg.lambda * r.value[1] - 0.25 * r.value[2];
    ev.err_est = 0.5 * r.err_est[0] + 0.5 * cfg.lambda * r.err_est[1] + 0.25 * r.err_est[2];
    if (cfg.beta != 0.0) {
        ev.value += -0.5 * cfg.beta * r.value[3];
        ev.err_est += 0.5 * std::abs(cfg.beta) * r.err_est[3];
    }
    ev.converged = r.converged;
    return ev;
}

}  // namespace blowuplab
