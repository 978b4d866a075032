#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace tvzip {

using VecD = std::vector<double>;

/// A smooth maximization problem with an analytic gradient and optional
/// feasible-region hooks. `project` must map any point to a feasible one and
/// is only invoked after step halving has failed to restore feasibility.
struct NewtonProblem {
    std::function<double(const VecD&)> objective;
    std::function<VecD(const VecD&)> score;
    std::function<bool(const VecD&)> feasible = [](const VecD&) { return true; };
    std::function<void(VecD&)> project = [](VecD&) {};
};

struct NewtonOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-6;
    double absolute_guard = 1e-8;  // coordinates below this use absolute change
    int max_step_halvings = 50;    // feasibility pullback depth before projecting
    int max_armijo_backtracks = 12;  // improvement tries per damping level
    double fd_step = 1e-5;  // relative step for the hessian-of-score differences
};

struct NewtonOutcome {
    VecD x;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Central finite differences of an analytic gradient, symmetrized. Steps are
/// shrunk (and fall back to one-sided differences) when a perturbation would
/// leave the feasible region, which happens for coordinates pinned at a bound.
inline Eigen::MatrixXd fd_hessian_of_score(
    const std::function<VecD(const VecD&)>& score, const VecD& x,
    const std::function<bool(const VecD&)>& feasible, double base_step = 1e-5) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    VecD hi = x, lo = x;
    for (int j = 0; j < n; ++j) {
        double step = base_step * std::max(1.0, std::abs(x[j]));
        bool central = false, forward = false, backward = false;
        for (int attempt = 0; attempt < 8; ++attempt) {
            hi[j] = x[j] + step;
            lo[j] = x[j] - step;
            const bool up = feasible(hi);
            const bool down = feasible(lo);
            if (up && down) {
                central = true;
                break;
            }
            if (attempt == 7) {
                forward = up;
                backward = down;
                break;
            }
            step *= 0.25;
        }
        VecD column(n, 0.0);
        if (central) {
            const VecD s_hi = score(hi);
            const VecD s_lo = score(lo);
            for (int i = 0; i < n; ++i) column[i] = (s_hi[i] - s_lo[i]) / (2.0 * step);
        } else if (forward || backward) {
            VecD& side = forward ? hi : lo;
            const VecD s_side = score(side);
            const VecD s_mid = score(x);
            const double sign = forward ? 1.0 : -1.0;
            for (int i = 0; i < n; ++i) column[i] = sign * (s_side[i] - s_mid[i]) / step;
        }
        for (int i = 0; i < n; ++i) h(i, j) = column[i];
        hi[j] = x[j];
        lo[j] = x[j];
    }
    h = 0.5 * (h + h.transpose()).eval();
    if (!h.allFinite()) throw std::runtime_error("hessian: non-finite entries");
    return h;
}

/// Damped Newton-Raphson ascent. Each iteration solves (H - mu I) d = -S with
/// mu escalated from zero until the system solves and d is an ascent
/// direction, then backtracks: infeasible proposals are halved up to
/// max_step_halvings and finally projected; accepted steps must improve the
/// objective (Armijo with a small constant, so the objective never
/// decreases). Iteration stops when every coordinate moves by less than the
/// relative tolerance, or when no improving step exists (a stationary or
/// boundary-pinned point).
inline NewtonOutcome newton_maximize(const NewtonProblem& problem, VecD x,
                                     const NewtonOptions& options = {}) {
    const int n = static_cast<int>(x.size());
    NewtonOutcome out;
    double fx = problem.objective(x);
    if (!std::isfinite(fx)) throw std::runtime_error("newton: objective not finite at start");

    VecD candidate(n);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        out.iterations = iter + 1;
        const VecD s = problem.score(x);
        Eigen::VectorXd sv(n);
        for (int i = 0; i < n; ++i) sv[i] = s[i];
        if (!sv.allFinite()) throw std::runtime_error("newton: non-finite score");

        const Eigen::MatrixXd h = fd_hessian_of_score(problem.score, x, problem.feasible,
                                                      options.fd_step);
        const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());

        // Levenberg-style ladder: each damping level gets a short Armijo
        // backtracking search, and rejected steps escalate the damping, which
        // both bends the direction toward the gradient and shortens it. In
        // the limit failure at every level means the point is numerically
        // stationary or pinned against a constraint. Infeasible proposals are
        // halved (feasibility pullback) and finally projected onto the box.
        bool accepted = false;
        bool undamped_step = false;
        bool projected_step = false;
        double f_candidate = fx;
        for (double mu = 0.0; mu <= 1e12 * scale;
             mu = (mu == 0.0 ? 1e-8 * scale : mu * 10.0)) {
            Eigen::MatrixXd m = h;
            m.diagonal().array() -= mu;
            const Eigen::VectorXd d = -m.partialPivLu().solve(sv);
            if (!d.allFinite()) continue;
            const double directional = d.dot(sv);
            if (directional <= 0.0 && sv.norm() > 0.0) continue;

            double step = 1.0;
            int improvement_tries = 0;
            for (int halving = 0; halving <= options.max_step_halvings;
                 ++halving, step *= 0.5) {
                for (int i = 0; i < n; ++i) candidate[i] = x[i] + step * d[i];
                bool projected = false;
                if (!problem.feasible(candidate)) {
                    // halving alone cannot restore feasibility when a
                    // coordinate sits exactly on its bound and d points out,
                    // so project the halved proposal onto the box
                    problem.project(candidate);
                    projected = true;
                    if (!problem.feasible(candidate)) continue;
                }
                const double fc = problem.objective(candidate);
                // projected proposals move along the boundary, where the
                // directional-derivative test does not apply; any strict
                // improvement is progress there (a zero move never is)
                const bool improves =
                    std::isfinite(fc) &&
                    (projected ? fc > fx : fc >= fx + 1e-4 * step * directional);
                if (improves) {
                    accepted = true;
                    undamped_step = mu == 0.0 && halving <= 1 && !projected;
                    projected_step = projected;
                    f_candidate = fc;
                    break;
                }
                if (++improvement_tries >= options.max_armijo_backtracks) break;
            }
            if (accepted) break;
        }
        if (!accepted) {
            out.converged = true;
            break;
        }

        bool small_change = true;
        for (int i = 0; i < n; ++i) {
            const double delta = std::abs(candidate[i] - x[i]);
            const double base = std::abs(x[i]);
            if (base >= options.absolute_guard) {
                if (delta > options.relative_tolerance * base) small_change = false;
            } else if (delta > options.relative_tolerance) {
                small_change = false;
            }
        }
        const double improvement = f_candidate - fx;
        x = candidate;
        fx = f_candidate;
        // A damped or halved step can be small without being near a
        // stationary point, so the change criterion only counts when the
        // accepted step was (essentially) the full Newton step, when the
        // iterate is pinned against the feasible boundary (projected steps
        // that barely move cannot ever move further), or when the objective
        // itself has stopped improving.
        if (small_change && (undamped_step || projected_step ||
                             improvement <= 1e-9 * (1.0 + std::abs(fx)))) {
            out.converged = true;
            break;
        }
    }

    out.x = std::move(x);
    out.objective = fx;
    return out;
}

}  // namespace tvzip
