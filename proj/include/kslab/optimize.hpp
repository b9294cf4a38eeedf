#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

namespace kslab::optimize {

struct GoldenResult {
    double x = 0.0;
    double fx = 0.0;
    bool at_boundary = false;  // minimum sits within tolerance of a bracket end
};

/// Golden-section minimization of a unimodal function on [lo, hi].
/// Ties between the two interior probes keep the lower sub-interval.
template <class F>
GoldenResult golden_section(F&& f, double lo, double hi, double tol)
{
    constexpr double inv_phi = 0.6180339887498948482;
    const double lo0 = lo, hi0 = hi;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > tol) {
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    GoldenResult r;
    if (fc <= fd) {
        r.x = c;
        r.fx = fc;
    } else {
        r.x = d;
        r.fx = fd;
    }
    const double flo = f(lo0), fhi = f(hi0);
    if (flo <= r.fx) {
        r.x = lo0;
        r.fx = flo;
    } else if (fhi < r.fx) {
        r.x = hi0;
        r.fx = fhi;
    }
    r.at_boundary = (r.x - lo0 <= 2.0 * tol) || (hi0 - r.x <= 2.0 * tol);
    return r;
}

/// Coarse scan on a grid followed by golden-section refinement inside the
/// best cell; protects against a multimodal profile.
template <class F>
GoldenResult scan_then_golden(F&& f, double lo, double hi, double tol, std::size_t grid = 64)
{
    double best_x = lo, best_f = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i <= grid; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid);
        const double fx = f(x);
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
            best_i = i;
        }
    }
    const double step = (hi - lo) / static_cast<double>(grid);
    const double a = best_i == 0 ? lo : best_x - step;
    const double b = best_i == grid ? hi : best_x + step;
    auto r = golden_section(f, a, b, tol);
    if (best_f < r.fx) {
        r.x = best_x;
        r.fx = best_f;
    }
    r.at_boundary = (r.x - lo <= 2.0 * tol) || (hi - r.x <= 2.0 * tol);
    return r;
}

struct LinearFit {
    Eigen::VectorXd coef;
    double sse = 0.0;
    Eigen::Index rank = 0;
};

/// Ordinary least squares via column-pivoted QR.
inline LinearFit linear_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y)
{
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    LinearFit out;
    out.rank = qr.rank();
    out.coef = qr.solve(y);
    out.sse = (y - design * out.coef).squaredNorm();
    return out;
}

/// Covariance sigma^2 (J^T J)^{-1}; NaN entries when J is rank deficient.
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& jacobian, double sigma2)
{
    const auto p = jacobian.cols();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jacobian);
    if (qr.rank() < p) return Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
    return sigma2 * jtj.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
}

struct LmOptions {
    int max_iterations = 500;
    double step_tol = 1e-13;
    double sse_rel_tol = 1e-15;
};

struct LmResult {
    Eigen::VectorXd params;
    double sse = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) least squares.
/// `model(params, residuals, jacobian)` fills residual = observed - fitted
/// and the Jacobian of the *fitted* values; it returns false when params
/// fall outside the model's domain, which rejects the trial step.
/// Only strictly improving steps are accepted, so the returned SSE never
/// exceeds the starting SSE.
template <class Model>
LmResult levenberg_marquardt(Model&& model, Eigen::VectorXd x0, const LmOptions& opt = {})
{
    Eigen::VectorXd r, r_trial;
    Eigen::MatrixXd J, J_trial;

    LmResult res;
    res.params = x0;
    if (!model(x0, r, J)) {
        res.sse = std::numeric_limits<double>::infinity();
        return res;
    }
    double sse = r.squaredNorm();
    res.sse = sse;
    if (sse == 0.0) {
        res.converged = true;
        return res;
    }

    double lambda = 1e-3;
    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it + 1;
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        const Eigen::VectorXd scale = A.diagonal().cwiseMax(1e-12 * std::max(1.0, A.diagonal().maxCoeff()));

        bool accepted = false;
        while (lambda < 1e20) {
            Eigen::MatrixXd damped = A;
            damped.diagonal() += lambda * scale;
            const Eigen::VectorXd delta = damped.ldlt().solve(g);
            const Eigen::VectorXd trial = res.params + delta;
            if (delta.allFinite() && model(trial, r_trial, J_trial)) {
                const double sse_trial = r_trial.squaredNorm();
                if (std::isfinite(sse_trial) && sse_trial < sse) {
                    const double rel_drop = (sse - sse_trial) / sse;
                    const double step_norm = delta.norm();
                    const double x_norm = res.params.norm();
                    res.params = trial;
                    r = r_trial;
                    J = J_trial;
                    sse = sse_trial;
                    lambda = std::max(lambda * 0.3, 1e-15);
                    accepted = true;
                    if (sse == 0.0 || rel_drop < opt.sse_rel_tol
                        || step_norm <= opt.step_tol * (x_norm + opt.step_tol)) {
                        res.sse = sse;
                        res.converged = true;
                        return res;
                    }
                    break;
                }
            }
            lambda *= 8.0;
        }
        if (!accepted) {
            // No descent direction at working precision: a stationary point.
            res.sse = sse;
            res.converged = true;
            return res;
        }
    }
    res.sse = sse;
    return res;
}

} // namespace kslab::optimize
