#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tvzip/model.hpp"
#include "tvzip/rng.hpp"
#include "tvzip/zero_inflation.hpp"

namespace tvzip {

/// Everything needed to generate one sample path.
struct SimulationSpec {
    ModelOrder order;
    IngarchParams params;
    ZeroInflationLink link;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::optional<std::vector<double>> exog;  // required for the logistic link

    void validate() const {
        order.validate();
        params.validate_order(order);
        validate_link(link);
        if (n < 1) throw std::invalid_argument("simulation spec: n must be >= 1");
        if (link_requires_exog(link)) {
            if (!exog) throw std::invalid_argument("simulation spec: logistic link requires an exogenous series");
            if (exog->size() != n)
                throw std::invalid_argument("simulation spec: exogenous series must have length n");
        }
    }
};

/// Simulated counts together with the true conditional-mean and
/// zero-inflation paths that generated them.
struct SimulatedSeries {
    CountSeries series;
    std::vector<double> lambda;
    std::vector<double> omega;
};

/// Draws X_1..X_N: at each t the conditional mean is updated from the counts
/// simulated so far (zero pre-sample values), a uniform U_t <= omega_t forces
/// a structural zero, and otherwise X_t is Poisson(lambda_t). Identical seeds
/// give identical output.
inline SimulatedSeries simulate_tvzip(const SimulationSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    SimulatedSeries out;
    out.series.counts.reserve(spec.n);
    out.lambda.reserve(spec.n);
    out.omega.reserve(spec.n);
    if (spec.exog) out.series.exog = *spec.exog;

    std::vector<double> lambda_hist;
    lambda_hist.reserve(spec.n);
    for (std::size_t t = 1; t <= spec.n; ++t) {
        double lambda = spec.params.alpha0;
        for (int i = 1; i <= spec.order.p; ++i)
            if (t > static_cast<std::size_t>(i))
                lambda += spec.params.alpha[i - 1] *
                          static_cast<double>(out.series.counts[t - i - 1]);
        for (int j = 1; j <= spec.order.q; ++j)
            if (t > static_cast<std::size_t>(j))
                lambda += spec.params.beta[j - 1] * lambda_hist[t - j - 1];
        lambda_hist.push_back(lambda);

        const std::optional<double> v =
            spec.exog ? std::optional<double>((*spec.exog)[t - 1]) : std::nullopt;
        const double omega = omega_at(spec.link, static_cast<double>(t), v);

        long x = 0;
        if (rng.uniform01() > omega) x = rng.poisson(lambda);
        out.series.counts.push_back(x);
        out.lambda.push_back(lambda);
        out.omega.push_back(omega);
    }
    return out;
}

/// Purely seasonal AR driver V_t = eta * V_{t-period} + eps_t with standard
/// normal noise and zero pre-sample values.
inline std::vector<double> simulate_seasonal_ar(double eta, int period, std::size_t n,
                                                std::uint64_t seed) {
    if (!(std::abs(eta) < 1.0))
        throw std::invalid_argument("seasonal ar: |eta| must be < 1 for stationarity");
    if (period < 1) throw std::invalid_argument("seasonal ar: period must be >= 1");
    Rng rng(seed);
    std::vector<double> v(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double lagged = t >= static_cast<std::size_t>(period) ? v[t - period] : 0.0;
        v[t] = eta * lagged + rng.normal();
    }
    return v;
}

}  // namespace tvzip
