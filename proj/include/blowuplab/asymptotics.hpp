#pragma once

// Scaling-law regression across lambda grids: recovery of the reduced-energy
// expansion constants c0, c1, c2 from I(V) samples, flatness verification of
// the six error-norm ratio bands, and the blow-up prediction
//   xi* = top curvature maxima,  d_i* = c1 H(xi_i*) / (2 c2),
// cross-validated by direct minimization of the reduced energy.

#include <functional>
#include <utility>
#include <vector>

#include "blowuplab/energy.hpp"

namespace blowuplab {

struct ScalingModel {
    enum class Tag { pure_power, power_with_log, affine_in_basis };
    Tag tag = Tag::pure_power;
    // power_with_log: value ~ A * basis(lambda) * lambda^s (s = residual slope)
    std::function<double(double)> basis;
    // affine_in_basis: value ~ sum_k coef_k * cols[k](lambda)
    std::vector<std::function<double(double)>> cols;

    static ScalingModel pure_power();
    static ScalingModel power_with_log(std::function<double(double)> basis);
    static ScalingModel affine(std::vector<std::function<double(double)>> cols);
};

struct ScalingFit {
    ScalingModel::Tag model = ScalingModel::Tag::pure_power;
    // pure_power: {A, p}; power_with_log: {A, s}; affine: basis coefficients
    std::vector<double> coefficients;
    double r_squared = 0.0;
    std::vector<double> residuals;
    std::vector<std::pair<double, double>> grid;
    bool rank_deficient = false;
};

// Requires >= 4 samples spanning >= 2 decades of lambda.
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& samples,
                       const ScalingModel& model);

struct ConstantsFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double r_squared = 0.0;
    std::vector<double> residuals;
    // per-sample rows: lambda, H, delta, I(V)
    struct Row {
        double lambda, h, delta, energy;
    };
    std::vector<Row> rows;
    // split-grid stability: constants refitted on the lower/upper lambda half
    double c1_low = 0.0, c2_low = 0.0, c1_high = 0.0, c2_high = 0.0;
    bool sign_ok = false;      // c1 > 0 and c2 > 0
    bool fit_ok = false;       // r_squared >= 0.99
    bool rank_deficient = false;
};

// Regresses single_energy samples on {1, H(xi) delta, lambda delta^2 |ln delta|}
// jointly across boundary points with distinct H (>= 3 required).
ConstantsFit extract_constants(const DomainSpec& domain,
                               const std::vector<BoundaryPoint>& xi_set,
                               const std::vector<double>& lambda_grid, double d,
                               const QuadTol& tol);

struct ErrorScalingReport {
    struct Term {
        std::vector<double> ratios;  // e_k/s_k along the grid
        double slope = 0.0;          // fitted d ln ratio / d ln lambda
        bool flat = false;           // |slope| <= 0.1
    };
    std::array<Term, 6> terms;
    // predicted-scaling dominance of E5's term at each grid point
    std::vector<bool> s5_dominant;
    // index of the largest computed norm at each grid point (diagnostic)
    std::vector<int> largest_computed;
    bool pass = false;  // all bands flat and s5 dominant everywhere
    bool converged = true;
};

ErrorScalingReport verify_error_scaling(const DomainSpec& domain, const BoundaryPoint& xi,
                                        const std::vector<double>& lambda_grid, double beta,
                                        const QuadTol& tol);

struct ExpansionConstants {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
};

struct BlowupPrediction {
    std::array<BoundaryPoint, 2> xi_star;
    std::array<double, 2> d_star{};      // c1 H / (2 c2)
    std::array<double, 2> delta_star{};  // d*/(lambda ln lambda)
    std::array<double, 2> h_values{};
    int maxima_count = 0;
    int pair_count = 0;  // k(k-1)/2 candidate blow-up pairs
    // direct reduced-energy minimization (when cross-validated)
    std::array<double, 2> d_direct{};
    double energy_at_min = 0.0;  // reduced-energy drop at the direct minimum
    bool cross_validated = false;
    bool consistent = false;  // formula vs direct within agree_tol
};

struct PredictOptions {
    bool cross_validate = true;
    QuadTol tol;            // quadrature for the minimization profile
    int n_seeds = 2048;     // curvature scan seeds
    double agree_tol = 0.10;
    double eta = 0.2;       // admissible-set parameter for the search
};

// Thrown when fewer than two strict curvature maxima with H > 0 exist
// (hypothesis of the existence theorem unmet).
struct hypothesis_unmet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

BlowupPrediction predict_blowup(const DomainSpec& domain, double lambda, double beta,
                                const ExpansionConstants& constants,
                                const PredictOptions& opts);

// Deterministic golden-section minimizer used by the cross-validation;
// exposed for the argmin-invariance property tests.
double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double xtol);

}  // namespace blowuplab
