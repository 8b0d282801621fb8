#include "blowuplab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace blowuplab {

namespace {

// Deterministic orthonormal completion: accept standard basis seeds in order,
// rejecting near-parallel ones.
std::array<Vec4, 3> tangent_seeds(const Vec4& normal) {
    std::array<Vec4, 3> frame;
    int got = 0;
    for (int s = 0; s < 4 && got < 3; ++s) {
        Vec4 v = Vec4::Unit(s);
        v -= v.dot(normal) * normal;
        for (int j = 0; j < got; ++j) v -= v.dot(frame[j]) * frame[j];
        const double n = v.norm();
        if (n > 1e-6) frame[got++] = v / n;
    }
    if (got < 3) throw std::runtime_error("tangent frame construction failed");
    return frame;
}

// S^3 low-discrepancy lattice in Hopf coordinates.
Vec4 hopf_point(int k, int n) {
    const double u = (k + 0.5) / n;  // sin^2(eta) uniform
    const double eta = std::asin(std::sqrt(u));
    const double g1 = 0.7548776662466927;  // plastic-number lattice increments
    const double g2 = 0.5698402909980532;
    const double p1 = 2.0 * M_PI * std::fmod(k * g1, 1.0);
    const double p2 = 2.0 * M_PI * std::fmod(k * g2, 1.0);
    return {std::cos(eta) * std::cos(p1), std::cos(eta) * std::sin(p1),
            std::sin(eta) * std::cos(p2), std::sin(eta) * std::sin(p2)};
}

}  // namespace

int cubic_index(int i, int j, int l) {
    int idx = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
            for (int c = b; c < 3; ++c) {
                if (a == i && b == j && c == l) return idx;
                ++idx;
            }
    throw std::logic_error("cubic_index: triple must be sorted and in [0,3)");
}

DomainSpec DomainSpec::ball(double radius) {
    DomainSpec d;
    d.kind_ = Kind::ball;
    d.radius_ = radius;
    d.validate();
    return d;
}

DomainSpec DomainSpec::ellipsoid(const Vec4& semi_axes) {
    DomainSpec d;
    d.kind_ = Kind::ellipsoid;
    d.semi_axes_ = semi_axes;
    d.validate();
    return d;
}

DomainSpec DomainSpec::protrusion(double base, double amplitude, int frequency,
                                  const Vec4& axis) {
    if (frequency < 1) throw std::invalid_argument("protrusion frequency must be >= 1");
    DomainSpec d;
    d.kind_ = Kind::protrusion;
    d.base_ = base;
    d.amplitude_ = amplitude;
    d.frequency_ = frequency;
    d.axis_ = axis.normalized();
    const auto uv = tangent_seeds(d.axis_);
    d.lobe_u_ = uv[0];
    d.lobe_v_ = uv[1];
    d.validate();
    return d;
}

DomainSpec DomainSpec::rotated(const Mat4& rot) const {
    if ((rot * rot.transpose() - Mat4::Identity()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("rotated: matrix is not orthogonal");
    DomainSpec d = *this;
    d.orient_ = rot * orient_;
    return d;
}

void DomainSpec::validate() const {
    if (rho_min() <= 0.0) throw std::invalid_argument("domain profile must stay positive");
    for (int k = 0; k < 512; ++k) {
        const double r = rho(hopf_point(k, 512));
        if (!(r >= rho_min() - 1e-12) || !(r <= rho_max() + 1e-12))
            throw std::invalid_argument("domain profile violates its stated bounds");
    }
}

double DomainSpec::rho_min() const {
    switch (kind_) {
        case Kind::ball: return radius_;
        case Kind::ellipsoid: return semi_axes_.minCoeff();
        case Kind::protrusion: return base_ - std::abs(amplitude_);
    }
    return 0.0;
}

double DomainSpec::rho_max() const {
    switch (kind_) {
        case Kind::ball: return radius_;
        case Kind::ellipsoid: return semi_axes_.maxCoeff();
        case Kind::protrusion: return base_ + std::abs(amplitude_);
    }
    return 0.0;
}

int DomainSpec::angular_complexity() const {
    switch (kind_) {
        case Kind::ball: return 1;
        case Kind::ellipsoid: return 2;
        case Kind::protrusion: return std::max(2, frequency_);
    }
    return 1;
}

double DomainSpec::rho(const Vec4& omega) const {
    const Vec4 w = orient_.transpose() * omega;
    switch (kind_) {
        case Kind::ball: return radius_;
        case Kind::ellipsoid: {
            const double q = (w.array() / semi_axes_.array()).square().sum();
            return 1.0 / std::sqrt(q);
        }
        case Kind::protrusion: {
            const std::complex<double> z(w.dot(lobe_u_), w.dot(lobe_v_));
            return base_ + amplitude_ * std::imag(std::pow(z, frequency_));
        }
    }
    return 0.0;
}

double DomainSpec::level(const Vec4& x) const {
    const double n = x.norm();
    return n - rho(x / n);
}

namespace {

struct Deriv2 {
    Vec4 grad = Vec4::Zero();
    Mat4 hess = Mat4::Zero();
};

// grad/hess of the 0-homogeneous profile extension, in the unrotated frame
Deriv2 profile_deriv(DomainSpec::Kind kind, const Vec4& semi_axes, double amplitude,
                     int m, const Vec4& U, const Vec4& V, const Vec4& y) {
    Deriv2 out;
    const double n = y.norm();
    switch (kind) {
        case DomainSpec::Kind::ball: break;
        case DomainSpec::Kind::ellipsoid: {
            // rho~ = |y| q^{-1/2}, q = sum y_i^2/a_i^2
            const Vec4 a2 = semi_axes.array().square();
            const double q = (y.array().square() / a2.array()).sum();
            const Vec4 Dy = 2.0 * (y.array() / a2.array()).matrix();
            const Mat4 D = Vec4(2.0 / a2.array()).asDiagonal();
            const double qm12 = 1.0 / std::sqrt(q);
            const double qm32 = qm12 / q;
            const double qm52 = qm32 / q;
            const Vec4 gn = y / n;
            const Mat4 hn = (Mat4::Identity() - gn * gn.transpose()) / n;
            const Vec4 gq = -0.5 * qm32 * Dy;
            const Mat4 hq = -0.5 * qm32 * D + 0.75 * qm52 * Dy * Dy.transpose();
            out.grad = qm12 * gn + n * gq;
            out.hess = qm12 * hn + gn * gq.transpose() + gq * gn.transpose() + n * hq;
            break;
        }
        case DomainSpec::Kind::protrusion: {
            // rho~ = base + eps P(y)/|y|^m, P = Im((y.U + i y.V)^m)
            const std::complex<double> z(y.dot(U), y.dot(V));
            const std::complex<double> zm1 = std::pow(z, m - 1);
            const std::complex<double> zm2 =
                (m >= 2) ? std::pow(z, m - 2) : std::complex<double>(0.0, 0.0);
            const double P = std::imag(zm1 * z);
            const Vec4 gP = m * (std::imag(zm1) * U + std::real(zm1) * V);
            const Mat4 hP = double(m) * (m - 1) *
                            (std::imag(zm2) * (U * U.transpose() - V * V.transpose()) +
                             std::real(zm2) * (U * V.transpose() + V * U.transpose()));
            const double nm = std::pow(n, -m);
            const Vec4 gn = -m * nm / (n * n) * y;
            const Mat4 hn = -m * nm / (n * n) * Mat4::Identity() +
                            double(m) * (m + 2) * nm / (n * n * n * n) * y * y.transpose();
            out.grad = amplitude * (nm * gP + P * gn);
            out.hess =
                amplitude * (nm * hP + gP * gn.transpose() + gn * gP.transpose() + P * hn);
            break;
        }
    }
    return out;
}

}  // namespace

Vec4 DomainSpec::level_grad(const Vec4& x) const {
    const Vec4 y = orient_.transpose() * x;
    const Deriv2 p =
        profile_deriv(kind_, semi_axes_, amplitude_, frequency_, lobe_u_, lobe_v_, y);
    return orient_ * (y.normalized() - p.grad);
}

Mat4 DomainSpec::level_hess(const Vec4& x) const {
    const Vec4 y = orient_.transpose() * x;
    const double n = y.norm();
    const Vec4 yh = y / n;
    const Deriv2 p =
        profile_deriv(kind_, semi_axes_, amplitude_, frequency_, lobe_u_, lobe_v_, y);
    const Mat4 h = (Mat4::Identity() - yh * yh.transpose()) / n - p.hess;
    return orient_ * h * orient_.transpose();
}

Vec4 DomainSpec::profile_grad(const Vec4& omega) const {
    const Vec4 y = orient_.transpose() * omega;
    return orient_ *
           profile_deriv(kind_, semi_axes_, amplitude_, frequency_, lobe_u_, lobe_v_, y).grad;
}

BoundaryPoint boundary_point(const DomainSpec& domain, const Vec4& omega) {
    const Vec4 w = omega.normalized();
    BoundaryPoint p;
    p.xi = domain.rho(w) * w;
    const Vec4 g = domain.level_grad(p.xi);
    p.normal = -g / g.norm();  // inward: the domain lies above the chart graph
    p.tangent_frame = tangent_seeds(p.normal);
    return p;
}

BoundaryPoint& local_graph_coeffs(const DomainSpec& domain, BoundaryPoint& p) {
    const Vec4 gradF = domain.level_grad(p.xi);
    const Mat4 hessF = domain.level_hess(p.xi);
    const double gn = gradF.norm();

    // second fundamental form in the current frame: S_jk = t_j^T HessF t_k / |gradF|
    Mat3 S;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            S(j, k) = p.tangent_frame[j].dot(hessF * p.tangent_frame[k]) / gn;
    S = 0.5 * (S + S.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Mat3> es(S);
    const std::array<int, 3> ord = {2, 1, 0};  // eigenvalues ascending -> descending
    std::array<Vec4, 3> principal;
    for (int i = 0; i < 3; ++i) {
        Vec3 q = es.eigenvectors().col(ord[i]);
        for (int c = 0; c < 3; ++c) {
            if (std::abs(q[c]) > 1e-12) {
                if (q[c] < 0.0) q = -q;
                break;
            }
        }
        principal[i] =
            q[0] * p.tangent_frame[0] + q[1] * p.tangent_frame[1] + q[2] * p.tangent_frame[2];
        p.graph_g[i] = 0.5 * es.eigenvalues()[ord[i]];
    }
    p.tangent_frame = principal;

    // cubic coefficients: least squares over two shells of boundary samples.
    // Chart radius respects the local curvature scale and halves on failure.
    const double curv_scale = std::max(1.0, 2.0 * p.graph_g.cwiseAbs().maxCoeff());
    double h = std::min(0.1 * domain.rho_min(), 0.2 / curv_scale);

    auto graph_depth = [&](const Vec3& xp) {
        const Vec4 base = p.xi + xp[0] * p.tangent_frame[0] + xp[1] * p.tangent_frame[1] +
                          xp[2] * p.tangent_frame[2];
        double t = p.graph_g.dot(xp.cwiseProduct(xp));
        for (int it = 0; it < 50; ++it) {
            const Vec4 x = base + t * p.normal;
            const double f = domain.level(x);
            const double df = domain.level_grad(x).dot(p.normal);
            const double step = f / df;
            t -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(t))) break;
        }
        return t;
    };

    std::vector<Vec3> dirs;  // 26 lattice directions
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c)
                if (a || b || c) dirs.push_back(Vec3(a, b, c).normalized());

    // One fit per shell radius.  The +- symmetric direction set kills the
    // even-degree (quartic) aliasing; Richardson over two radii removes the
    // O(h^2) quintic aliasing from the cubic coefficients.
    auto fit_shell = [&](double scale, Eigen::VectorXd& coef) {
        const int rows = static_cast<int>(dirs.size());
        Eigen::MatrixXd A(rows, 10);
        Eigen::VectorXd b(rows);
        for (int r = 0; r < rows; ++r) {
            const Vec3 xp = scale * dirs[r];
            b[r] = graph_depth(xp) - p.graph_g.dot(xp.cwiseProduct(xp));
            int cidx = 0;
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j)
                    for (int l = j; l < 3; ++l) A(r, cidx++) = xp[i] * xp[j] * xp[l];
        }
        coef = A.colPivHouseholderQr().solve(b);
        return (A * coef - b).norm() / std::sqrt(double(rows));
    };

    for (int attempt = 0;; ++attempt) {
        Eigen::VectorXd c_full, c_half;
        fit_shell(h, c_full);
        const double resid = fit_shell(0.5 * h, c_half);
        const Eigen::VectorXd c = (4.0 * c_half - c_full) / 3.0;
        for (int i = 0; i < 10; ++i) p.graph_cubic[i] = c[i];
        p.fit_residual = resid;
        p.chart_radius = h;
        if (resid <= 0.5 * h * h * h) break;
        if (attempt >= 3)
            throw std::runtime_error("local_graph_coeffs: chart fit residual too large");
        h *= 0.5;
    }
    p.has_graph = true;
    return p;
}

double mean_curvature_fast(const DomainSpec& domain, const Vec4& omega) {
    const Vec4 w = omega.normalized();
    const Vec4 xi = domain.rho(w) * w;
    const Vec4 g = domain.level_grad(xi);
    const Mat4 h = domain.level_hess(xi);
    const Vec4 nu = g.normalized();
    // (2/3) sum g_i = tr(S)/3 with S the tangential part of HessF/|gradF|
    return (h.trace() - nu.dot(h * nu)) / g.norm() / 3.0;
}

CurvatureEval mean_curvature(const DomainSpec& domain, BoundaryPoint& p) {
    if (!p.has_graph) local_graph_coeffs(domain, p);
    CurvatureEval ev;
    ev.h = (2.0 / 3.0) * p.graph_g.sum();
    // H'(0)_i = (2/3) ( sum_{j != i} g_(jji sorted) + 3 g_iii )
    for (int i = 0; i < 3; ++i) {
        double s = 3.0 * p.graph_cubic[cubic_index(i, i, i)];
        for (int j = 0; j < 3; ++j) {
            if (j == i) continue;
            int t[3] = {j, j, i};
            std::sort(t, t + 3);
            s += p.graph_cubic[cubic_index(t[0], t[1], t[2])];
        }
        ev.h_grad[i] = (2.0 / 3.0) * s;
    }
    return ev;
}

CurvatureMaxima find_curvature_maxima(const DomainSpec& domain, int n_seeds) {
    CurvatureMaxima out;

    double hmin = 1e300, hmax = -1e300;
    std::vector<Vec4> seeds(n_seeds);
    std::vector<double> seed_h(n_seeds);
    for (int k = 0; k < n_seeds; ++k) {
        seeds[k] = hopf_point(k, n_seeds);
        seed_h[k] = mean_curvature_fast(domain, seeds[k]);
        hmin = std::min(hmin, seed_h[k]);
        hmax = std::max(hmax, seed_h[k]);
    }
    if (hmax - hmin <= 1e-9 * std::max(1.0, std::abs(hmax))) {
        out.constant_curvature = true;
        return out;
    }

    auto ascend = [&](Vec4 w) {
        double h = mean_curvature_fast(domain, w);
        double step = 0.2;
        while (step > 1e-8) {
            const auto frame = tangent_seeds(w);
            bool moved = false;
            for (const auto& t : frame) {
                for (double s : {step, -step}) {
                    const Vec4 cand = (w + s * t).normalized();
                    const double hc = mean_curvature_fast(domain, cand);
                    if (hc > h) {
                        w = cand;
                        h = hc;
                        moved = true;
                    }
                }
            }
            if (!moved) step *= 0.5;
        }
        return std::pair<Vec4, double>(w, h);
    };

    std::vector<int> order(n_seeds);
    for (int i = 0; i < n_seeds; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return seed_h[a] > seed_h[b]; });

    std::vector<std::pair<Vec4, double>> found;
    const int n_starts = std::min(n_seeds, 96);
    for (int s = 0; s < n_starts; ++s) {
        auto [w, h] = ascend(seeds[order[s]]);
        if (h <= 0.0) continue;
        bool dup = false;
        for (auto& f : found) {
            if ((f.first - w).norm() < 1e-3) {
                if (h > f.second) f = {w, h};
                dup = true;
                break;
            }
        }
        if (!dup) found.emplace_back(w, h);
    }

    // strictness: the centre must beat a small surrounding ring
    std::vector<std::pair<Vec4, double>> strict;
    for (const auto& [w, h] : found) {
        const auto frame = tangent_seeds(w);
        bool is_strict = true;
        for (int k = 0; k < 8 && is_strict; ++k) {
            const double a = 2.0 * M_PI * k / 8.0;
            const Vec4 probe =
                (w + 1e-3 * (std::cos(a) * frame[0] + std::sin(a) * frame[1])).normalized();
            if (mean_curvature_fast(domain, probe) >= h) is_strict = false;
        }
        for (int k = 0; k < 2 && is_strict; ++k) {
            const Vec4 probe = (w + (k ? 1e-3 : -1e-3) * frame[2]).normalized();
            if (mean_curvature_fast(domain, probe) >= h) is_strict = false;
        }
        if (is_strict) strict.emplace_back(w, h);
    }

    std::sort(strict.begin(), strict.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [w, h] : strict) {
        out.points.push_back(boundary_point(domain, w));
        out.h_values.push_back(h);
    }
    return out;
}

}  // namespace blowuplab
