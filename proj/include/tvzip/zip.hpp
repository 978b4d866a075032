#pragma once

#include <cmath>
#include <stdexcept>

namespace tvzip {

/// One zero-inflated Poisson distribution: intensity lambda and structural
/// zero probability omega. omega = 0 is accepted so the plain Poisson
/// reduction can be evaluated; the model itself keeps omega strictly inside
/// (0, 1).
struct ZipParams {
    double lambda = 1.0;
    double omega = 0.0;

    void validate() const {
        if (!(lambda > 0.0)) throw std::invalid_argument("zip params: lambda must be > 0");
        if (!(omega >= 0.0 && omega < 1.0))
            throw std::invalid_argument("zip params: omega must lie in [0, 1)");
    }
};

/// P(X = k) = omega * [k == 0] + (1 - omega) * lambda^k e^{-lambda} / k!,
/// with the factorial kept in log space.
inline double zip_pmf(long k, const ZipParams& zp) {
    zp.validate();
    if (k < 0) return 0.0;
    const double log_pois =
        static_cast<double>(k) * std::log(zp.lambda) - zp.lambda - std::lgamma(static_cast<double>(k) + 1.0);
    double p = (1.0 - zp.omega) * std::exp(log_pois);
    if (k == 0) p += zp.omega;
    return p;
}

struct ConditionalMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// mean = (1 - omega) lambda, variance = (1 - omega) lambda (1 + omega lambda).
inline ConditionalMoments conditional_moments(const ZipParams& zp) {
    zp.validate();
    const double mean = (1.0 - zp.omega) * zp.lambda;
    return {mean, mean * (1.0 + zp.omega * zp.lambda)};
}

/// variance / mean = 1 + omega * lambda; exceeds 1 whenever omega > 0.
inline double dispersion_ratio(const ZipParams& zp) {
    zp.validate();
    return 1.0 + zp.omega * zp.lambda;
}

}  // namespace tvzip
