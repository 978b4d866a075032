#pragma once

#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tvzip {

/// Lag orders of the conditional-mean recursion: p count lags, q mean lags.
/// q = 0 is the pure ARCH-type submodel.
struct ModelOrder {
    int p = 1;
    int q = 0;

    void validate() const {
        if (p < 1) throw std::invalid_argument("model order: p must be >= 1");
        if (q < 0) throw std::invalid_argument("model order: q must be >= 0");
    }
};

/// Coefficients of the linear conditional-mean recursion
///   lambda_t = alpha0 + sum_i alpha[i] * X_{t-i-1} + sum_j beta[j] * lambda_{t-j-1}.
struct IngarchParams {
    double alpha0 = 1.0;
    std::vector<double> alpha;  // count-lag coefficients, size p
    std::vector<double> beta;   // mean-lag coefficients, size q

    double persistence() const {
        return std::accumulate(alpha.begin(), alpha.end(), 0.0) +
               std::accumulate(beta.begin(), beta.end(), 0.0);
    }

    /// alpha0 > 0, all lag coefficients nonnegative, persistence < 1.
    void validate() const {
        if (!(alpha0 > 0.0))
            throw std::invalid_argument("ingarch params: alpha0 must be > 0");
        for (double a : alpha)
            if (!(a >= 0.0))
                throw std::invalid_argument("ingarch params: alpha coefficients must be >= 0");
        for (double b : beta)
            if (!(b >= 0.0))
                throw std::invalid_argument("ingarch params: beta coefficients must be >= 0");
        if (!(persistence() < 1.0))
            throw std::invalid_argument("ingarch params: sum(alpha) + sum(beta) must be < 1");
    }

    void validate_order(const ModelOrder& order) const {
        validate();
        if (static_cast<int>(alpha.size()) != order.p || static_cast<int>(beta.size()) != order.q)
            throw std::invalid_argument("ingarch params: coefficient counts do not match model order");
    }
};

/// Observed counts X_1..X_N with an optional aligned exogenous series V_1..V_N.
struct CountSeries {
    std::vector<long> counts;
    std::optional<std::vector<double>> exog;

    std::size_t size() const { return counts.size(); }

    void validate() const {
        for (long c : counts)
            if (c < 0) throw std::invalid_argument("count series: counts must be nonnegative");
        if (exog && exog->size() != counts.size())
            throw std::invalid_argument("count series: exogenous series length differs from counts");
    }
};

/// Conditional-mean path lambda_1..lambda_N; entry t-1 holds lambda_t.
using LambdaPath = std::vector<double>;

/// Computes the conditional-mean recursion with zero pre-sample values
/// (lambda_l = 0 and X_l = 0 for l <= 0). Every lambda_t >= alpha0 > 0.
inline LambdaPath lambda_path(const IngarchParams& params, const CountSeries& series,
                              const ModelOrder& order) {
    order.validate();
    params.validate_order(order);
    if (series.counts.empty()) throw std::invalid_argument("lambda_path: empty series");

    const std::size_t n = series.size();
    LambdaPath lambda(n, 0.0);
    for (std::size_t t = 1; t <= n; ++t) {
        double value = params.alpha0;
        for (int i = 1; i <= order.p; ++i)
            if (t > static_cast<std::size_t>(i))
                value += params.alpha[i - 1] * static_cast<double>(series.counts[t - i - 1]);
        for (int j = 1; j <= order.q; ++j)
            if (t > static_cast<std::size_t>(j))
                value += params.beta[j - 1] * lambda[t - j - 1];
        lambda[t - 1] = value;
    }
    return lambda;
}

/// Per-time-step derivatives of lambda_t with respect to the mean coefficients,
/// laid out as (d/d alpha0, d/d alpha_1.., d/d beta_1..). Row t-1 holds time t.
struct LambdaGradient {
    std::size_t n = 0;
    std::size_t dim = 0;  // 1 + p + q
    std::vector<double> data;

    double operator()(std::size_t t_index, std::size_t coef) const {
        return data[t_index * dim + coef];
    }
    double& at(std::size_t t_index, std::size_t coef) { return data[t_index * dim + coef]; }
};

/// Differentiates the recursion: the beta feedback propagates derivatives, and
/// pre-sample derivatives are zero to match the zero-initialization convention.
inline LambdaGradient lambda_gradient(const IngarchParams& params, const CountSeries& series,
                                      const LambdaPath& path, const ModelOrder& order) {
    order.validate();
    params.validate_order(order);
    if (path.size() != series.size())
        throw std::invalid_argument("lambda_gradient: path and series lengths differ");
    if (series.counts.empty()) throw std::invalid_argument("lambda_gradient: empty series");

    const std::size_t n = series.size();
    const std::size_t dim = 1 + static_cast<std::size_t>(order.p) + static_cast<std::size_t>(order.q);
    LambdaGradient grad;
    grad.n = n;
    grad.dim = dim;
    grad.data.assign(n * dim, 0.0);

    for (std::size_t t = 1; t <= n; ++t) {
        grad.at(t - 1, 0) = 1.0;  // d lambda_t / d alpha0, before feedback
        for (int i = 1; i <= order.p; ++i)
            if (t > static_cast<std::size_t>(i))
                grad.at(t - 1, static_cast<std::size_t>(i)) =
                    static_cast<double>(series.counts[t - i - 1]);
        for (int j = 1; j <= order.q; ++j)
            if (t > static_cast<std::size_t>(j))
                grad.at(t - 1, static_cast<std::size_t>(order.p + j)) = path[t - j - 1];
        // feedback: each beta lag carries the full derivative vector forward
        for (int j = 1; j <= order.q; ++j) {
            if (t <= static_cast<std::size_t>(j)) continue;
            const double bj = params.beta[j - 1];
            if (bj == 0.0) continue;
            for (std::size_t k = 0; k < dim; ++k)
                grad.at(t - 1, k) += bj * grad(t - j - 1, k);
        }
    }
    return grad;
}

}  // namespace tvzip
