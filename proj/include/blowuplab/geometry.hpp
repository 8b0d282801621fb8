#pragma once

// Star-shaped domains in R^4 given by a boundary radial profile rho on S^3:
//   Omega = { r w : 0 <= r < rho(w), w in S^3 }.
// The profile is extended 0-homogeneously to R^4\{0}; the boundary is the
// zero set of the level function F(x) = |x| - rho(x/|x|), whose analytic
// gradient and Hessian drive normals, local graph coefficients and the mean
// curvature H = (2/3)(g1+g2+g3) of the paper's chart normalization.

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace blowuplab {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class DomainSpec {
  public:
    enum class Kind { ball, ellipsoid, protrusion };

    static DomainSpec ball(double radius = 1.0);
    static DomainSpec ellipsoid(const Vec4& semi_axes);
    // Lobes sit on the great circle orthogonal to `axis`; on that circle the
    // profile is base + amplitude*sin(m*phi), extended smoothly to S^3 via
    // the harmonic polynomial Im((x.u + i x.v)^m).
    static DomainSpec protrusion(double base, double amplitude, int frequency,
                                 const Vec4& axis);

    // Same domain, rigidly rotated by R (orthogonal).
    DomainSpec rotated(const Mat4& rot) const;

    Kind kind() const { return kind_; }
    double radius() const { return radius_; }
    const Vec4& semi_axes() const { return semi_axes_; }
    double base() const { return base_; }
    double amplitude() const { return amplitude_; }
    int frequency() const { return frequency_; }
    const Vec4& axis() const { return axis_; }
    const Mat4& orientation() const { return orient_; }

    double rho(const Vec4& omega) const;  // omega unit
    double rho_min() const;
    double rho_max() const;

    double level(const Vec4& x) const;  // negative inside
    Vec4 level_grad(const Vec4& x) const;
    Mat4 level_hess(const Vec4& x) const;
    bool contains(const Vec4& x) const { return level(x) < 0.0; }

    // Surface gradient of rho at a unit direction (tangent to S^3); feeds the
    // boundary area element rho^3 sqrt(1 + |grad rho|^2 / rho^2).
    Vec4 profile_grad(const Vec4& omega) const;

    // Rough number of oscillations per angle; integrators scale their base
    // angular panel counts by this.
    int angular_complexity() const;

  private:
    DomainSpec() = default;
    void validate() const;

    Kind kind_ = Kind::ball;
    double radius_ = 1.0;
    Vec4 semi_axes_ = Vec4::Ones();
    double base_ = 1.0;
    double amplitude_ = 0.0;
    int frequency_ = 0;
    Vec4 axis_ = Vec4::UnitW();
    Vec4 lobe_u_ = Vec4::UnitX(), lobe_v_ = Vec4::UnitY();
    Mat4 orient_ = Mat4::Identity();
};

struct BoundaryPoint {
    Vec4 xi = Vec4::Zero();
    Vec4 normal = Vec4::Zero();  // inward unit normal
    std::array<Vec4, 3> tangent_frame{};
    // Local graph x4 = sum g_i x_i'^2 + sum_{i<=j<=l} g_ijl x_i'x_j'x_l' in
    // the (principal) tangent frame; filled by local_graph_coeffs.
    Vec3 graph_g = Vec3::Zero();
    std::array<double, 10> graph_cubic{};
    double fit_residual = 0.0;
    double chart_radius = 0.0;
    bool has_graph = false;
};

struct CurvatureEval {
    double h = 0.0;
    Vec3 h_grad = Vec3::Zero();  // tangential gradient, principal-frame coords
};

struct CurvatureMaxima {
    bool constant_curvature = false;
    std::vector<BoundaryPoint> points;  // sorted by H descending
    std::vector<double> h_values;
};

// xi = rho(w) w, inward normal, Gram-Schmidt tangent frame from fixed seeds.
BoundaryPoint boundary_point(const DomainSpec& domain, const Vec4& omega);

// Quadratic coefficients from the second fundamental form, frame rotated to
// principal axes (eigenvalues sorted descending, signs fixed); cubic
// coefficients by least squares over boundary samples in the chart.
// Updates p in place and returns it.
BoundaryPoint& local_graph_coeffs(const DomainSpec& domain, BoundaryPoint& p);

CurvatureEval mean_curvature(const DomainSpec& domain, BoundaryPoint& p);

// Cheap H(omega) without frames or fits (trace of the shape operator).
double mean_curvature_fast(const DomainSpec& domain, const Vec4& omega);

// Multi-start tangent-plane ascent of H over S^3; deduplicated strict local
// maxima with H > 0, sorted by H descending.
CurvatureMaxima find_curvature_maxima(const DomainSpec& domain, int n_seeds = 2048);

// Order-10 monomial index (i<=j<=l) used for graph_cubic packing.
int cubic_index(int i, int j, int l);

}  // namespace blowuplab
