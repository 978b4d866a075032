#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvzip/model.hpp"
#include "tvzip/newton.hpp"
#include "tvzip/zero_inflation.hpp"

namespace tvzip {

enum class FitMethod { EM, MLE };

/// Composite parameter vector Phi = (gamma, theta) with the fixed layout
/// [link parameters..., alpha0, alpha_1..alpha_p, beta_1..beta_q].
struct ParamVector {
    std::vector<double> values;
    int gamma_size = 0;
    ModelOrder order;

    int size() const { return static_cast<int>(values.size()); }

    std::span<const double> gamma() const {
        return {values.data(), static_cast<std::size_t>(gamma_size)};
    }

    IngarchParams theta() const {
        IngarchParams params;
        params.alpha0 = values[gamma_size];
        params.alpha.assign(values.begin() + gamma_size + 1,
                            values.begin() + gamma_size + 1 + order.p);
        params.beta.assign(values.begin() + gamma_size + 1 + order.p,
                           values.begin() + gamma_size + 1 + order.p + order.q);
        return params;
    }
};

inline ParamVector make_param_vector(const ZeroInflationLink& link, const IngarchParams& theta,
                                     const ModelOrder& order) {
    theta.validate_order(order);
    ParamVector phi;
    phi.order = order;
    auto gamma = gamma_values(link);
    phi.gamma_size = static_cast<int>(gamma.size());
    phi.values = std::move(gamma);
    phi.values.push_back(theta.alpha0);
    phi.values.insert(phi.values.end(), theta.alpha.begin(), theta.alpha.end());
    phi.values.insert(phi.values.end(), theta.beta.begin(), theta.beta.end());
    return phi;
}

/// Labels matching the flattened layout, e.g. {"A","B","alpha0","alpha1","beta1"}.
inline std::vector<std::string> param_labels(const ZeroInflationLink& link,
                                             const ModelOrder& order) {
    std::vector<std::string> labels = gamma_labels(link);
    labels.push_back("alpha0");
    for (int i = 1; i <= order.p; ++i) labels.push_back("alpha" + std::to_string(i));
    for (int j = 1; j <= order.q; ++j) labels.push_back("beta" + std::to_string(j));
    return labels;
}

/// Posterior structural-zero probabilities tau_t = E[Z_t | X_t, Phi];
/// exactly zero wherever X_t > 0.
struct Responsibilities {
    std::vector<double> tau;
};

struct FitOptions {
    int max_em_sweeps = 500;
    int max_newton_iterations = 200;
    double relative_tolerance = 1e-6;
    double absolute_guard = 1e-8;
    bool generalized_em = false;  // single Newton update per M step instead of full maximization
    std::vector<std::uint8_t> free_mask;  // empty means every coordinate is free
};

struct FitResult {
    ParamVector phi;
    FitMethod method = FitMethod::MLE;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    bool at_boundary = false;
    double aic = 0.0;
    double bic = 0.0;
    std::vector<double> fitted_lambda;
    std::vector<double> fitted_omega;
    std::vector<double> loglik_trace;  // observed-data log-likelihood per EM sweep
    std::size_t n_observations = 0;
    std::size_t n_used = 0;  // likelihood summation range, N - p
    int n_parameters = 0;    // estimated coordinates, the k of AIC/BIC
    std::uint64_t series_hash = 0;
    ZeroInflationLink link;  // structural link with fitted gamma baked in
    ModelOrder order;
};

namespace detail {

// Estimation-time bounds, slightly inside the model's open constraints.
constexpr double kAlpha0Floor = 1e-8;
constexpr double kPersistenceCap = 1.0 - 1e-8;
constexpr double kOmegaMargin = 1e-8;
constexpr double kLogisticBound = 30.0;
constexpr double kBoundSlack = 1e-12;

inline std::optional<double> exog_value(const CountSeries& data, std::size_t t) {
    if (!data.exog) return std::nullopt;
    return (*data.exog)[t - 1];
}

struct PathSet {
    LambdaPath lambda;
    std::vector<double> omega;
    ZeroInflationLink active;
};

inline PathSet eval_paths(const ParamVector& phi, const CountSeries& data,
                          const ZeroInflationLink& link) {
    PathSet paths;
    paths.active = with_gamma(link, phi.gamma());
    validate_link(paths.active);
    if (link_requires_exog(paths.active) && !data.exog)
        throw std::invalid_argument("estimation: logistic link requires an exogenous series");
    paths.lambda = lambda_path(phi.theta(), data, phi.order);
    paths.omega.resize(data.size());
    for (std::size_t t = 1; t <= data.size(); ++t)
        paths.omega[t - 1] =
            omega_at(paths.active, static_cast<double>(t), exog_value(data, t));
    return paths;
}

inline void require_fit_data(const CountSeries& data, const ModelOrder& order) {
    data.validate();
    if (data.size() <= static_cast<std::size_t>(order.p))
        throw std::invalid_argument("estimation: series length must exceed the count-lag order");
}

inline bool box_feasible(const std::vector<double>& values, int gamma_size,
                         const ModelOrder& order, const ZeroInflationLink& link) {
    const double alpha0 = values[gamma_size];
    if (!(alpha0 >= kAlpha0Floor)) return false;
    double persistence = 0.0;
    for (int i = 1; i <= order.p + order.q; ++i) {
        const double c = values[gamma_size + i];
        if (!(c >= 0.0)) return false;
        persistence += c;
    }
    if (!(persistence <= kPersistenceCap + 1e-9)) return false;

    if (const auto* c = std::get_if<ConstantLink>(&link)) {
        if (c->estimated) {
            const double omega = values[0];
            if (!(omega >= kOmegaMargin - kBoundSlack &&
                  omega <= 1.0 - kOmegaMargin + kBoundSlack))
                return false;
        }
    } else if (const auto* s = std::get_if<SinusoidalLink>(&link)) {
        if (!(std::hypot(values[0], values[1]) <= 0.5 - s->min_omega)) return false;
    } else if (const auto* m = std::get_if<PiecewiseMonthlyLink>(&link)) {
        if (!(std::hypot(values[0], values[1]) <= 0.5 - m->min_omega)) return false;
    } else {
        if (std::abs(values[0]) > kLogisticBound + kBoundSlack) return false;
        if (std::abs(values[1]) > kLogisticBound + kBoundSlack) return false;
    }
    return true;
}

/// Pulls a proposal back onto the feasible box; fixed coordinates (per the
/// mask) are never moved, and the persistence cap is restored by rescaling
/// only the free lag coefficients.
inline void box_project(std::vector<double>& values, int gamma_size, const ModelOrder& order,
                        const ZeroInflationLink& link,
                        const std::vector<std::uint8_t>& free_mask) {
    auto is_free = [&](int idx) {
        return free_mask.empty() || free_mask[static_cast<std::size_t>(idx)] != 0;
    };

    if (is_free(gamma_size)) values[gamma_size] = std::max(values[gamma_size], kAlpha0Floor);
    double fixed_sum = 0.0, free_sum = 0.0;
    for (int i = 1; i <= order.p + order.q; ++i) {
        const int idx = gamma_size + i;
        if (is_free(idx)) {
            values[idx] = std::max(values[idx], 0.0);
            free_sum += values[idx];
        } else {
            fixed_sum += values[idx];
        }
    }
    if (fixed_sum + free_sum > kPersistenceCap && free_sum > 0.0) {
        const double target = std::max(0.0, kPersistenceCap - fixed_sum);
        const double scale = target / free_sum;
        for (int i = 1; i <= order.p + order.q; ++i) {
            const int idx = gamma_size + i;
            if (is_free(idx)) values[idx] *= scale;
        }
    }

    if (const auto* c = std::get_if<ConstantLink>(&link)) {
        if (c->estimated && is_free(0))
            values[0] = std::clamp(values[0], kOmegaMargin, 1.0 - kOmegaMargin);
    } else if (std::holds_alternative<SinusoidalLink>(link) ||
               std::holds_alternative<PiecewiseMonthlyLink>(link)) {
        const double floor_value = std::holds_alternative<SinusoidalLink>(link)
                                       ? std::get<SinusoidalLink>(link).min_omega
                                       : std::get<PiecewiseMonthlyLink>(link).min_omega;
        const double radius = std::hypot(values[0], values[1]);
        const double max_radius = 0.5 - floor_value - 1e-12;
        if (radius > max_radius) {
            if (is_free(0) && is_free(1)) {
                const double scale = radius > 0.0 ? max_radius / radius : 0.0;
                values[0] *= scale;
                values[1] *= scale;
            } else {
                const int fixed = is_free(0) ? 1 : 0;
                const int free = 1 - fixed;
                const double room = max_radius * max_radius - values[fixed] * values[fixed];
                const double limit = room > 0.0 ? std::sqrt(room) : 0.0;
                values[free] = std::clamp(values[free], -limit, limit);
            }
        }
    } else if (std::holds_alternative<LogisticLink>(link)) {
        if (is_free(0)) values[0] = std::clamp(values[0], -kLogisticBound, kLogisticBound);
        if (is_free(1)) values[1] = std::clamp(values[1], -kLogisticBound, kLogisticBound);
    }
}

inline void require_model_feasible(const ParamVector& phi, const ZeroInflationLink& link) {
    phi.order.validate();
    phi.theta().validate_order(phi.order);
    if (static_cast<int>(gamma_dimension(link)) != phi.gamma_size)
        throw std::invalid_argument("estimation: parameter vector does not match link layout");
    validate_link(with_gamma(link, phi.gamma()));
}

}  // namespace detail

/// Conditional log-likelihood of the observed data, summed over
/// t = p+1 .. N: zero observations contribute log(omega + (1-omega)e^{-lambda}),
/// positive ones the zero-deflated Poisson term.
inline double log_likelihood(const ParamVector& phi, const CountSeries& data,
                             const ZeroInflationLink& link) {
    detail::require_model_feasible(phi, link);
    detail::require_fit_data(data, phi.order);
    const auto paths = detail::eval_paths(phi, data, link);

    double total = 0.0;
    for (std::size_t t = phi.order.p + 1; t <= data.size(); ++t) {
        const double lambda = paths.lambda[t - 1];
        const double omega = paths.omega[t - 1];
        const long x = data.counts[t - 1];
        if (x == 0) {
            total += std::log(omega + (1.0 - omega) * std::exp(-lambda));
        } else {
            total += std::log1p(-omega) + static_cast<double>(x) * std::log(lambda) - lambda -
                     std::lgamma(static_cast<double>(x) + 1.0);
        }
    }
    return total;
}

/// Complete-data log-likelihood with known (or estimated) structural-zero
/// memberships z_t in [0, 1]. Used with the E-step responsibilities this is
/// the surrogate maximized by the M step.
inline double complete_data_log_likelihood(const ParamVector& phi, std::span<const double> z,
                                           const CountSeries& data,
                                           const ZeroInflationLink& link) {
    detail::require_model_feasible(phi, link);
    detail::require_fit_data(data, phi.order);
    if (z.size() != data.size())
        throw std::invalid_argument("complete-data likelihood: membership length mismatch");
    for (std::size_t t = 1; t <= data.size(); ++t) {
        if (!(z[t - 1] >= 0.0 && z[t - 1] <= 1.0))
            throw std::invalid_argument("complete-data likelihood: memberships must lie in [0,1]");
        if (data.counts[t - 1] > 0 && z[t - 1] != 0.0)
            throw std::invalid_argument(
                "complete-data likelihood: membership must be zero where the count is positive");
    }
    const auto paths = detail::eval_paths(phi, data, link);

    double total = 0.0;
    for (std::size_t t = phi.order.p + 1; t <= data.size(); ++t) {
        const double lambda = paths.lambda[t - 1];
        const double omega = paths.omega[t - 1];
        const double zt = z[t - 1];
        const long x = data.counts[t - 1];
        double poisson_part = std::log1p(-omega) - lambda;
        if (x > 0)
            poisson_part += static_cast<double>(x) * std::log(lambda) -
                            std::lgamma(static_cast<double>(x) + 1.0);
        total += zt * std::log(omega) + (1.0 - zt) * poisson_part;
    }
    return total;
}

namespace detail {

/// Shared chain-rule assembly: d l / d gamma_i = sum_t w_omega(t) domega/dgamma_i
/// and d l / d theta_j = sum_t w_lambda(t) dlambda/dtheta_j. The weight
/// callback returns the pair (w_omega, w_lambda) for one time index.
template <typename WeightFn>
std::vector<double> assemble_score(const ParamVector& phi, const CountSeries& data,
                                   const ZeroInflationLink& link, WeightFn&& weights) {
    const auto paths = eval_paths(phi, data, link);
    const auto dlambda = lambda_gradient(phi.theta(), data, paths.lambda, phi.order);
    const int theta_dim = 1 + phi.order.p + phi.order.q;

    std::vector<double> grad(phi.values.size(), 0.0);
    for (std::size_t t = phi.order.p + 1; t <= data.size(); ++t) {
        const auto [w_omega, w_lambda] =
            weights(t, paths.lambda[t - 1], paths.omega[t - 1], data.counts[t - 1]);
        if (phi.gamma_size > 0 && w_omega != 0.0) {
            const auto domega = omega_gradient(paths.active, static_cast<double>(t),
                                               exog_value(data, t));
            for (int i = 0; i < phi.gamma_size; ++i) grad[i] += w_omega * domega[i];
        }
        if (w_lambda != 0.0)
            for (int j = 0; j < theta_dim; ++j)
                grad[phi.gamma_size + j] += w_lambda * dlambda(t - 1, static_cast<std::size_t>(j));
    }
    return grad;
}

}  // namespace detail

/// Analytic score of the observed-data log-likelihood (gradient over Phi).
inline std::vector<double> score(const ParamVector& phi, const CountSeries& data,
                                 const ZeroInflationLink& link) {
    detail::require_model_feasible(phi, link);
    detail::require_fit_data(data, phi.order);
    return detail::assemble_score(
        phi, data, link, [](std::size_t, double lambda, double omega, long x) {
            if (x == 0) {
                const double p0 = omega + (1.0 - omega) * std::exp(-lambda);
                return std::pair<double, double>{(1.0 - std::exp(-lambda)) / p0,
                                                 -(1.0 - omega) * std::exp(-lambda) / p0};
            }
            return std::pair<double, double>{-1.0 / (1.0 - omega),
                                             static_cast<double>(x) / lambda - 1.0};
        });
}

/// Analytic score of the complete-data surrogate at memberships tau.
inline std::vector<double> complete_data_score(const ParamVector& phi,
                                               const Responsibilities& tau,
                                               const CountSeries& data,
                                               const ZeroInflationLink& link) {
    detail::require_model_feasible(phi, link);
    detail::require_fit_data(data, phi.order);
    if (tau.tau.size() != data.size())
        throw std::invalid_argument("complete-data score: membership length mismatch");
    const auto& z = tau.tau;
    return detail::assemble_score(
        phi, data, link, [&z](std::size_t t, double lambda, double omega, long x) {
            const double zt = z[t - 1];
            return std::pair<double, double>{
                zt / omega - (1.0 - zt) / (1.0 - omega),
                (1.0 - zt) * (static_cast<double>(x) / lambda - 1.0)};
        });
}

/// Observed-data hessian: central finite differences of the analytic score,
/// symmetrized. Throws on non-finite entries.
inline Eigen::MatrixXd hessian(const ParamVector& phi, const CountSeries& data,
                               const ZeroInflationLink& link) {
    detail::require_model_feasible(phi, link);
    ParamVector probe = phi;
    auto score_at = [&](const VecD& values) {
        probe.values = values;
        return score(probe, data, link);
    };
    auto feasible = [&](const VecD& values) {
        return detail::box_feasible(values, phi.gamma_size, phi.order, link);
    };
    return fd_hessian_of_score(score_at, phi.values, feasible);
}

/// E step: tau_t = omega_t / (omega_t + (1-omega_t) e^{-lambda_t}) at zero
/// observations, zero elsewhere.
inline Responsibilities e_step(const ParamVector& phi, const CountSeries& data,
                               const ZeroInflationLink& link) {
    detail::require_model_feasible(phi, link);
    detail::require_fit_data(data, phi.order);
    const auto paths = detail::eval_paths(phi, data, link);
    Responsibilities out;
    out.tau.assign(data.size(), 0.0);
    for (std::size_t t = 1; t <= data.size(); ++t) {
        if (data.counts[t - 1] != 0) continue;
        const double omega = paths.omega[t - 1];
        const double lambda = paths.lambda[t - 1];
        out.tau[t - 1] = omega / (omega + (1.0 - omega) * std::exp(-lambda));
    }
    return out;
}

namespace detail {

struct ReducedProblem {
    std::vector<int> free_indices;

    VecD reduce(const std::vector<double>& full) const {
        VecD reduced(free_indices.size());
        for (std::size_t i = 0; i < free_indices.size(); ++i) reduced[i] = full[free_indices[i]];
        return reduced;
    }
    void embed(const VecD& reduced, std::vector<double>& full) const {
        for (std::size_t i = 0; i < free_indices.size(); ++i) full[free_indices[i]] = reduced[i];
    }
};

inline ReducedProblem make_reduced(const ParamVector& phi, const FitOptions& options) {
    if (!options.free_mask.empty() &&
        options.free_mask.size() != static_cast<std::size_t>(phi.size()))
        throw std::invalid_argument("fit options: free mask length mismatch");
    ReducedProblem reduced;
    for (int i = 0; i < phi.size(); ++i)
        if (options.free_mask.empty() || options.free_mask[static_cast<std::size_t>(i)] != 0)
            reduced.free_indices.push_back(i);
    return reduced;
}

template <typename Objective, typename Score>
NewtonOutcome maximize_reduced(const ParamVector& phi0, const ZeroInflationLink& link,
                               const FitOptions& options, int max_iterations,
                               Objective&& objective, Score&& score_fn) {
    const ReducedProblem reduced = make_reduced(phi0, options);
    ParamVector work = phi0;

    NewtonProblem problem;
    problem.objective = [&, work](const VecD& x) mutable {
        reduced.embed(x, work.values);
        return objective(work);
    };
    problem.score = [&, work](const VecD& x) mutable {
        reduced.embed(x, work.values);
        const auto full = score_fn(work);
        VecD out(reduced.free_indices.size());
        for (std::size_t i = 0; i < reduced.free_indices.size(); ++i)
            out[i] = full[reduced.free_indices[i]];
        return out;
    };
    problem.feasible = [&, work](const VecD& x) mutable {
        reduced.embed(x, work.values);
        return box_feasible(work.values, phi0.gamma_size, phi0.order, link);
    };
    problem.project = [&, work](VecD& x) mutable {
        reduced.embed(x, work.values);
        box_project(work.values, phi0.gamma_size, phi0.order, link, options.free_mask);
        x = reduced.reduce(work.values);
    };

    NewtonOptions newton_options;
    newton_options.max_iterations = max_iterations;
    newton_options.relative_tolerance = options.relative_tolerance;
    newton_options.absolute_guard = options.absolute_guard;
    return newton_maximize(problem, reduced.reduce(phi0.values), newton_options);
}

inline std::uint64_t hash_series(const CountSeries& data) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto mix = [&h](std::uint64_t value) {
        h ^= value;
        h *= 1099511628211ull;
    };
    mix(data.size());
    for (long c : data.counts) mix(static_cast<std::uint64_t>(c));
    if (data.exog) {
        std::uint64_t bits = 0;
        for (double v : data.exog.value()) {
            static_assert(sizeof(double) == sizeof(std::uint64_t));
            std::memcpy(&bits, &v, sizeof(bits));
            mix(bits);
        }
    }
    return h;
}

inline bool near_boundary(const ParamVector& phi, const ZeroInflationLink& link) {
    constexpr double tol = 1e-6;
    const auto theta = phi.theta();
    if (theta.alpha0 <= kAlpha0Floor + tol) return true;
    for (double a : theta.alpha)
        if (a <= tol) return true;
    for (double b : theta.beta)
        if (b <= tol) return true;
    if (theta.persistence() >= kPersistenceCap - tol) return true;

    if (const auto* c = std::get_if<ConstantLink>(&link)) {
        if (c->estimated) {
            const double omega = phi.values[0];
            if (omega <= kOmegaMargin + tol || omega >= 1.0 - kOmegaMargin - tol) return true;
        }
    } else if (std::holds_alternative<SinusoidalLink>(link) ||
               std::holds_alternative<PiecewiseMonthlyLink>(link)) {
        const double floor_value = std::holds_alternative<SinusoidalLink>(link)
                                       ? std::get<SinusoidalLink>(link).min_omega
                                       : std::get<PiecewiseMonthlyLink>(link).min_omega;
        if (std::hypot(phi.values[0], phi.values[1]) >= 0.5 - floor_value - 1e-9) return true;
    } else if (std::holds_alternative<LogisticLink>(link)) {
        if (std::abs(phi.values[0]) >= kLogisticBound - tol) return true;
        if (std::abs(phi.values[1]) >= kLogisticBound - tol) return true;
    }
    return false;
}

inline FitResult finalize_fit(ParamVector phi, FitMethod method, int iterations, bool converged,
                              std::vector<double> trace, const CountSeries& data,
                              const ZeroInflationLink& link, const FitOptions& options) {
    FitResult result;
    result.loglik = log_likelihood(phi, data, link);
    result.method = method;
    result.iterations = iterations;
    result.converged = converged;
    result.at_boundary = near_boundary(phi, link);
    result.n_observations = data.size();
    result.n_used = data.size() - static_cast<std::size_t>(phi.order.p);
    const ReducedProblem reduced = make_reduced(phi, options);
    result.n_parameters = static_cast<int>(reduced.free_indices.size());
    const double n_eff = static_cast<double>(result.n_used);
    result.aic = -2.0 * result.loglik + 2.0 * result.n_parameters;
    result.bic = -2.0 * result.loglik + result.n_parameters * std::log(n_eff);
    const auto paths = eval_paths(phi, data, link);
    result.fitted_lambda = paths.lambda;
    result.fitted_omega = paths.omega;
    result.loglik_trace = std::move(trace);
    result.series_hash = hash_series(data);
    result.link = with_gamma(link, phi.gamma());
    result.order = phi.order;
    result.phi = std::move(phi);
    return result;
}

}  // namespace detail

/// Data-driven start: the excess-zero fraction relative to a Poisson with the
/// sample mean seeds the zero-inflation level, lag coefficients start small,
/// and alpha0 absorbs the remaining mean. For the cyclic links the phase is
/// read off the zero-indicator's Fourier coefficients, and among a small
/// deterministic set of candidate phases (or slopes, for the logistic link)
/// the one with the highest starting log-likelihood wins.
inline ParamVector default_initialization(const CountSeries& data, const ZeroInflationLink& link,
                                          const ModelOrder& order) {
    detail::require_fit_data(data, order);
    const double n = static_cast<double>(data.size());
    double mean = 0.0;
    double zero_fraction = 0.0;
    for (long c : data.counts) {
        mean += static_cast<double>(c);
        if (c == 0) zero_fraction += 1.0;
    }
    mean /= n;
    zero_fraction /= n;

    double excess_zero = 0.5;
    if (mean > 1e-12) {
        const double poisson_zero = std::exp(-mean);
        excess_zero = std::clamp((zero_fraction - poisson_zero) / (1.0 - poisson_zero), 0.0, 0.95);
    }

    IngarchParams theta;
    theta.alpha0 = std::max(mean * (1.0 - excess_zero), 1e-3);
    theta.alpha.assign(order.p, 0.1 / order.p);
    if (order.q > 0) theta.beta.assign(order.q, 0.1 / order.q);

    std::vector<std::vector<double>> gamma_candidates;
    if (const auto* c = std::get_if<ConstantLink>(&link)) {
        if (c->estimated) gamma_candidates.push_back({std::clamp(excess_zero, 1e-3, 0.9)});
    } else if (std::holds_alternative<SinusoidalLink>(link) ||
               std::holds_alternative<PiecewiseMonthlyLink>(link)) {
        const bool monthly = std::holds_alternative<PiecewiseMonthlyLink>(link);
        const double floor_value = monthly ? std::get<PiecewiseMonthlyLink>(link).min_omega
                                           : std::get<SinusoidalLink>(link).min_omega;
        const double target = std::clamp(excess_zero, floor_value, 1.0 - floor_value);
        const double radius =
            std::clamp(target - floor_value, 1e-3, 0.5 - floor_value - 1e-6);
        // zero-indicator Fourier coefficients at the link's own phase argument
        double a_f = 0.0, b_f = 0.0;
        for (std::size_t t = 1; t <= data.size(); ++t) {
            const double phase =
                monthly ? 2.0 * std::numbers::pi *
                              std::get<PiecewiseMonthlyLink>(link).month_of(
                                  static_cast<double>(t)) /
                              std::get<PiecewiseMonthlyLink>(link).months
                        : 2.0 * std::numbers::pi * static_cast<double>(t) /
                              std::get<SinusoidalLink>(link).period;
            const double z = (data.counts[t - 1] == 0 ? 1.0 : 0.0) - zero_fraction;
            a_f += z * std::sin(phase);
            b_f += z * std::cos(phase);
        }
        double u0 = std::numbers::sqrt2 / 2.0, u1 = std::numbers::sqrt2 / 2.0;
        const double norm = std::hypot(a_f, b_f);
        if (norm > 1e-12) {
            u0 = a_f / norm;
            u1 = b_f / norm;
        }
        gamma_candidates.push_back({radius * u0, radius * u1});
        gamma_candidates.push_back({-radius * u0, -radius * u1});
        gamma_candidates.push_back({-radius * u1, radius * u0});
        gamma_candidates.push_back({radius * u1, -radius * u0});
    } else {
        const double p = std::clamp(excess_zero, 1e-3, 1.0 - 1e-3);
        const double intercept = std::log(p / (1.0 - p));
        gamma_candidates.push_back({intercept, 0.0});
        gamma_candidates.push_back({intercept, 1.0});
        gamma_candidates.push_back({intercept, -1.0});
    }

    if (gamma_candidates.empty()) return make_param_vector(link, theta, order);

    ParamVector best;
    double best_loglik = -std::numeric_limits<double>::infinity();
    for (const auto& gamma : gamma_candidates) {
        const ParamVector candidate =
            make_param_vector(with_gamma(link, gamma), theta, order);
        const double value = log_likelihood(candidate, data, link);
        if (value > best_loglik) {
            best_loglik = value;
            best = candidate;
        }
    }
    return best;
}

/// One M step: maximizes the complete-data surrogate at fixed tau with damped
/// Newton-Raphson under the estimation constraints. Runs Newton to its own
/// convergence unless generalized_em requests a single update.
inline ParamVector m_step(const ParamVector& phi, const Responsibilities& tau,
                          const CountSeries& data, const ZeroInflationLink& link,
                          const FitOptions& options = {}) {
    detail::require_model_feasible(phi, link);
    detail::require_fit_data(data, phi.order);
    if (tau.tau.size() != data.size())
        throw std::invalid_argument("m step: membership length mismatch");
    for (std::size_t t = 0; t < data.size(); ++t)
        if (data.counts[t] > 0 && tau.tau[t] != 0.0)
            throw std::invalid_argument("m step: membership must be zero where the count is positive");

    const int iterations = options.generalized_em ? 1 : options.max_newton_iterations;
    auto outcome = detail::maximize_reduced(
        phi, link, options, iterations,
        [&](const ParamVector& p) {
            return complete_data_log_likelihood(p, tau.tau, data, link);
        },
        [&](const ParamVector& p) { return complete_data_score(p, tau, data, link); });

    ParamVector next = phi;
    detail::make_reduced(phi, options).embed(outcome.x, next.values);
    return next;
}

/// EM estimation: alternate the E step and a fully maximizing M step until no
/// coordinate moves by more than the relative tolerance (absolute change for
/// near-zero coordinates), or the sweep cap is reached. The observed-data
/// log-likelihood trace is recorded per sweep and is non-decreasing.
inline FitResult fit_em(const CountSeries& data, const ZeroInflationLink& link,
                        const ModelOrder& order, std::optional<ParamVector> init = std::nullopt,
                        const FitOptions& options = {}) {
    detail::require_fit_data(data, order);
    ParamVector phi = init ? *init : default_initialization(data, link, order);
    detail::require_model_feasible(phi, link);
    if (!detail::box_feasible(phi.values, phi.gamma_size, order, link))
        detail::box_project(phi.values, phi.gamma_size, order, link, options.free_mask);

    std::vector<double> trace;
    trace.push_back(log_likelihood(phi, data, link));
    bool converged = false;
    int sweeps = 0;
    while (sweeps < options.max_em_sweeps) {
        ++sweeps;
        const Responsibilities tau = e_step(phi, data, link);
        const ParamVector next = m_step(phi, tau, data, link, options);
        trace.push_back(log_likelihood(next, data, link));

        bool small_change = true;
        for (int i = 0; i < phi.size(); ++i) {
            const double delta = std::abs(next.values[i] - phi.values[i]);
            const double base = std::abs(phi.values[i]);
            if (base >= options.absolute_guard) {
                if (delta > options.relative_tolerance * base) small_change = false;
            } else if (delta > options.relative_tolerance) {
                small_change = false;
            }
        }
        phi = next;
        if (small_change) {
            converged = true;
            break;
        }
    }
    return detail::finalize_fit(std::move(phi), FitMethod::EM, sweeps, converged,
                                std::move(trace), data, link, options);
}

/// Direct maximum likelihood: damped Newton-Raphson on the observed-data
/// log-likelihood with the same constraint policy and stopping rule.
inline FitResult fit_mle(const CountSeries& data, const ZeroInflationLink& link,
                         const ModelOrder& order, std::optional<ParamVector> init = std::nullopt,
                         const FitOptions& options = {}) {
    detail::require_fit_data(data, order);
    ParamVector phi = init ? *init : default_initialization(data, link, order);
    detail::require_model_feasible(phi, link);
    if (!detail::box_feasible(phi.values, phi.gamma_size, order, link))
        detail::box_project(phi.values, phi.gamma_size, order, link, options.free_mask);

    std::vector<double> trace;
    trace.push_back(log_likelihood(phi, data, link));
    auto outcome = detail::maximize_reduced(
        phi, link, options, options.max_newton_iterations,
        [&](const ParamVector& p) { return log_likelihood(p, data, link); },
        [&](const ParamVector& p) { return score(p, data, link); });
    detail::make_reduced(phi, options).embed(outcome.x, phi.values);
    trace.push_back(outcome.objective);
    return detail::finalize_fit(std::move(phi), FitMethod::MLE, outcome.iterations,
                                outcome.converged, std::move(trace), data, link, options);
}

}  // namespace tvzip
