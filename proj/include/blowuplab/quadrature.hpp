#pragma once

// Deterministic adaptive integration over star-shaped Omega in R^4 and its
// boundary 3-manifold.  Product structure: radial Gauss-Legendre panels
// (geometrically graded toward every radius where the ray passes near a
// declared concentration center) times an S^3 product-angle rule whose polar
// axis is aligned with the first center and whose panels are graded toward
// the center directions.  Error estimates come from differencing two
// successive grid levels; node sets are pure functions of the inputs, so
// results are bit-reproducible at any thread count (pairwise reduction over
// a fixed chunk order).

#include <cstddef>
#include <functional>
#include <vector>

#include "blowuplab/field.hpp"
#include "blowuplab/geometry.hpp"

namespace blowuplab {

struct QuadTol {
    double rel = 1e-6;
    double abs = 0.0;
    std::size_t max_evals = 30'000'000;
    int base_level = 0;  // first grid level to evaluate
    int max_level = 3;   // finest grid level allowed
};

struct SingularityHint {
    std::vector<Vec4> centers;   // concentration points (need not lie inside)
    double grading_ratio = 0.5;  // geometric ladder ratio, in (0,1)
    double min_panel = 1e-8;     // smallest radial panel near a center
    // Sorted radii around centers[0]; panel edges are aligned with the
    // spheres |x - c0| = s so region-restricted integrals are exact.
    std::vector<double> region_radii;
};

struct QuadResult {
    double value = 0.0;
    double err_est = 0.0;
    std::size_t n_evals = 0;
    bool converged = false;
};

// Multi-component results share one node set.
struct QuadResultN {
    std::vector<double> value;
    std::vector<double> err_est;
    // value split by region (component-major), present iff region_radii set:
    // region k is s_{k-1} <= |x-c0| < s_k with s_{-1} = 0, s_last = inf.
    std::vector<std::vector<double>> region_value;
    std::size_t n_evals = 0;
    bool converged = false;
};

// Writes ncomp values for the point x into out[0..ncomp).
using DomainIntegrand = std::function<void(const Vec4& x, double* out)>;
// Boundary integrands also see the inward unit normal.
using BoundaryIntegrand = std::function<void(const Vec4& x, const Vec4& inward_normal, double* out)>;

QuadResultN integrate_domain_n(const DomainIntegrand& f, int ncomp, const DomainSpec& domain,
                               const SingularityHint& hints, const QuadTol& tol);
QuadResult integrate_domain(const std::function<double(const Vec4&)>& f,
                            const DomainSpec& domain, const SingularityHint& hints,
                            const QuadTol& tol);

QuadResultN integrate_boundary_n(const BoundaryIntegrand& f, int ncomp,
                                 const DomainSpec& domain, const SingularityHint& hints,
                                 const QuadTol& tol);
QuadResult integrate_boundary(const std::function<double(const Vec4&, const Vec4&)>& f,
                              const DomainSpec& domain, const SingularityHint& hints,
                              const QuadTol& tol);

using Field = std::function<FieldEval(const Vec4&)>;

// <u,v> = int grad u . grad v + lambda int u v
QuadResult h1_lambda_inner(const Field& u, const Field& v, double lambda,
                           const DomainSpec& domain, const SingularityHint& hints,
                           const QuadTol& tol);

enum class Region { domain, boundary };

QuadResult lp_norm(const std::function<double(const Vec4&)>& u, double p, Region region,
                   const DomainSpec& domain, const SingularityHint& hints, const QuadTol& tol);

// Worker threads used by the integrators; 0 restores the default
// (BLOWUPLAB_THREADS env var, else hardware concurrency).  Thread count
// never changes results.
void set_quadrature_threads(int n);
int quadrature_threads();

}  // namespace blowuplab
