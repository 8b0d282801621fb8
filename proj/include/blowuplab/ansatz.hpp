#pragma once

// Closed-form evaluation of the concentration ansatz:
//   bubble          U_{d,xi}(x) = a d / (d^2 + |x-xi|^2),  a = 2 sqrt 2
//   correction      W_{l,d,xi}(x) = a l d W(sqrt(l) |x-xi|)
//   ansatz          V = U - W_{l,d,xi}
//   kernel elements Z_{0} = d dU/dd, Z_{j} = d dU/dt_j (tangent directions)
// together with analytic gradients/Laplacians and the residual of
//   -Delta V + l V = U^3 + l (U - a d/|x-xi|^2),
// which V satisfies identically away from xi.

#include <array>

#include "blowuplab/field.hpp"
#include "blowuplab/geometry.hpp"
#include "blowuplab/quadrature.hpp"

namespace blowuplab {

inline constexpr double kBubbleAlpha = 2.0 * M_SQRT2;

// Parameters of the two-bubble ansatz; delta_i = d_i / (lambda ln lambda).
struct ConcentrationConfig {
    double lambda = 0.0;
    double beta = 0.0;
    std::array<double, 2> d{1.0, 1.0};
    std::array<BoundaryPoint, 2> xi;
    double eta = 0.25;
    std::array<double, 2> delta{0.0, 0.0};  // derived

    // Validates lambda > e and the admissible-set constraints
    // |xi1 - xi2| >= 2 eta, eta < d_i < 1/eta.
    static ConcentrationConfig make(double lambda, double beta, double d1, double d2,
                                    const BoundaryPoint& xi1, const BoundaryPoint& xi2,
                                    double eta);
    // Single-bubble variant (second slot mirrors the first; admissibility of
    // the pair is not enforced).  Used when only component i matters.
    static ConcentrationConfig single(double lambda, double beta, double d,
                                      const BoundaryPoint& xi, double eta);
};

struct Field2Eval {
    double value = 0.0;
    Vec4 gradient = Vec4::Zero();
    double laplacian = 0.0;
};

FieldEval bubble(double delta, const Vec4& xi, const Vec4& x);
Field2Eval bubble_full(double delta, const Vec4& xi, const Vec4& x);

// Points closer than this to a concentration center are rejected.
inline constexpr double kSingularRadius = 1e-14;

FieldEval correction_field(double lambda, double delta, const Vec4& xi, const Vec4& x);
Field2Eval correction_field_full(double lambda, double delta, const Vec4& xi, const Vec4& x);

FieldEval ansatz_v(const ConcentrationConfig& cfg, int i, const Vec4& x);
Field2Eval ansatz_v_full(const ConcentrationConfig& cfg, int i, const Vec4& x);

// |R(x)| of the identity above; should vanish to rounding.
double ansatz_pde_residual(const ConcentrationConfig& cfg, int i, const Vec4& x);

// j = 0: dilation element; j = 1..3: tangential derivatives along the frame
// stored in cfg.xi[i].
FieldEval kernel_element(const ConcentrationConfig& cfg, int i, int j, const Vec4& x);

// Gram matrix sigma_kj = <Z_k, Z_j> in the H^1_lambda inner product over Omega.
Mat4 kernel_gram(const ConcentrationConfig& cfg, int i, const DomainSpec& domain,
                 const QuadTol& tol);

// Default integration hint for fields concentrated at the config's centers.
SingularityHint concentration_hint(const ConcentrationConfig& cfg, bool both_centers);

}  // namespace blowuplab
