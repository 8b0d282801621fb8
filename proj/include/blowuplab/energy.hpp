#pragma once

// The energy functional
//   E(u1,u2) = 1/2 int |grad u1|^2+|grad u2|^2 + l/2 int u1^2+u2^2
//              - 1/4 int u1^4+u2^4 - b/2 int u1^2 u2^2
// evaluated on the ansatz pair, its single-component part I(V), the coupling
// term, the six dual error norms E1..E6 with their predicted scalings, and
// the Q = l int V U decomposition split over the proof's regions
// B_sqrt(delta) and B_1/sqrt(lambda).

#include <array>

#include "blowuplab/ansatz.hpp"

namespace blowuplab {

struct EnergyBreakdown {
    double dirichlet = 0.0;  // 1/2 int |grad u1|^2 + |grad u2|^2
    double mass = 0.0;       // l/2 int u1^2 + u2^2
    double quartic = 0.0;    // -1/4 int u1^4 + u2^4
    double coupling = 0.0;   // -b/2 int u1^2 u2^2
    double total = 0.0;
    double err_est = 0.0;
    bool converged = false;
};

struct EnergyValue {
    double value = 0.0;
    double err_est = 0.0;
    bool converged = false;
};

struct ErrorNormReport {
    std::array<double, 6> e{};  // computed dual norms
    std::array<double, 6> s{};  // predicted scalings (unit constants)
    // E6 sub-report over the proof's regions: near xi_i, near xi_j, rest
    std::array<double, 3> e6_regions{};
    double total_bound = 0.0;  // sum_i delta_i |ln delta_i|^(2/3)
    bool converged = false;
};

struct QDecomposition {
    double q = 0.0;   // l int_Omega V U
    double q1 = 0.0;  // l int_{B_sqrt(delta)} U^2
    double q2 = 0.0;  // l int_{B_sqrt(delta)} W_l U
    double q3 = 0.0;  // far-field remainder, = m1+m2+m3
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    double ratio_q1 = 0.0;  // q1 / (l delta^2 |ln delta|)
    double ratio_q2 = 0.0, ratio_q3 = 0.0;
    bool converged = false;
};

struct ReducedEnergySample {
    double value = 0.0;  // I(V1) + I(V2) + coupling
    double i1 = 0.0, i2 = 0.0, coupling = 0.0;
    // predicted size of the neglected O(||E||_H ||psi||_H) term
    double neglected_bound = 0.0;
    double err_est = 0.0;
    bool converged = false;
};

EnergyBreakdown energy_full(const ConcentrationConfig& cfg, const DomainSpec& domain,
                            const QuadTol& tol);

EnergyValue single_energy_detailed(const ConcentrationConfig& cfg, int i,
                                   const DomainSpec& domain, const QuadTol& tol);
double single_energy(const ConcentrationConfig& cfg, int i, const DomainSpec& domain,
                     const QuadTol& tol);

// -b/2 int V1^2 V2^2; exactly zero when b = 0.
EnergyValue coupling_term(const ConcentrationConfig& cfg, const DomainSpec& domain,
                          const QuadTol& tol);

ReducedEnergySample reduced_energy(const ConcentrationConfig& cfg, const DomainSpec& domain,
                                   const QuadTol& tol);

ErrorNormReport error_dual_norms(const ConcentrationConfig& cfg, int i,
                                 const DomainSpec& domain, const QuadTol& tol);

QDecomposition q_decomposition(const ConcentrationConfig& cfg, int i,
                               const DomainSpec& domain, const QuadTol& tol);

// Landscape difference  [I(V_i(d_new)) + coupling(d_new)] - [same at cfg.d[i]],
// computed from pointwise difference integrands so the O(1/(l ln l)) energy
// landscape survives at modest quadrature tolerances.  The minimizer of
// reduced_energy over d_i coincides with the minimizer of this profile.
EnergyValue reduced_energy_delta(const ConcentrationConfig& cfg, int i, double d_new,
                                 const DomainSpec& domain, const QuadTol& tol);

}  // namespace blowuplab
