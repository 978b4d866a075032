#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tvzip/estimate.hpp"
#include "tvzip/rng.hpp"
#include "tvzip/simulate.hpp"

namespace tvzip {

/// Mean absolute deviation of replication estimates from the true value.
inline double made(std::span<const double> estimates, double truth) {
    if (estimates.empty()) throw std::invalid_argument("made: no estimates");
    double total = 0.0;
    for (double e : estimates) total += std::abs(e - truth);
    return total / static_cast<double>(estimates.size());
}

struct InformationCriteria {
    double aic = 0.0;
    double bic = 0.0;
};

/// AIC = -2 l + 2k and BIC = -2 l + k log(n_effective), where n_effective is
/// the likelihood's summation range N - p.
inline InformationCriteria information_criteria(double loglik, double n_effective, int k) {
    if (!(n_effective > 0.0))
        throw std::invalid_argument("information criteria: n_effective must be positive");
    return {-2.0 * loglik + 2.0 * k, -2.0 * loglik + k * std::log(n_effective)};
}

inline InformationCriteria information_criteria(const FitResult& fit) {
    return information_criteria(fit.loglik, static_cast<double>(fit.n_used), fit.n_parameters);
}

/// Candidate ranking by AIC, ties broken by BIC and then by fewer parameters.
/// All fits must refer to the same data series.
struct ModelRanking {
    std::vector<std::size_t> order;  // indices into the fit list, best first
};

inline ModelRanking compare_models(const std::vector<FitResult>& fits) {
    if (fits.empty()) throw std::invalid_argument("compare_models: no fits");
    for (const auto& fit : fits)
        if (fit.series_hash != fits.front().series_hash ||
            fit.n_observations != fits.front().n_observations)
            throw std::invalid_argument("compare_models: fits were made on different data");
    ModelRanking ranking;
    ranking.order.resize(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i) ranking.order[i] = i;
    std::stable_sort(ranking.order.begin(), ranking.order.end(),
                     [&fits](std::size_t a, std::size_t b) {
                         if (fits[a].aic != fits[b].aic) return fits[a].aic < fits[b].aic;
                         if (fits[b].bic != fits[a].bic) return fits[a].bic < fits[b].bic;
                         return fits[a].n_parameters < fits[b].n_parameters;
                     });
    return ranking;
}

/// One Monte-Carlo recovery study: simulate m replications from a true model
/// and re-estimate each with the requested estimators.
struct StudyConfig {
    std::string name;       // catalog label, e.g. "A1"
    std::string link_case;  // "sin" or "logistic"
    ModelOrder order;
    IngarchParams true_params;
    ZeroInflationLink link;  // truth, including link parameters
    int n = 360;
    int replications = 200;
    std::uint64_t base_seed = 1;
    bool run_mle = true;
    bool run_em = true;
    bool fresh_exog_per_replication = true;
    double exog_eta = 0.25;
    int exog_period = 12;
    int threads = 0;  // 0: hardware concurrency
    FitOptions fit_options;

    void validate() const {
        order.validate();
        true_params.validate_order(order);
        validate_link(link);
        if (replications < 1) throw std::invalid_argument("study: replications must be >= 1");
        if (n <= order.p) throw std::invalid_argument("study: n must exceed the count-lag order");
        if (!run_mle && !run_em) throw std::invalid_argument("study: no estimator selected");
    }
};

struct ReplicationFit {
    bool attempted = false;
    bool converged = false;
    bool failed = false;  // exception or non-convergence
    std::vector<double> estimate;
    double loglik = 0.0;
    int iterations = 0;
    double min_em_increment = std::numeric_limits<double>::infinity();
};

struct ReplicationOutcome {
    int index = 0;
    double loglik_at_truth = 0.0;
    ReplicationFit em;
    ReplicationFit mle;
};

struct EstimatorSummary {
    bool present = false;
    std::vector<double> mean;
    std::vector<double> made;
    int n_converged = 0;
    int n_failed = 0;
};

struct StudyReport {
    std::string name;
    std::string link_case;
    int n = 0;
    int replications = 0;
    std::uint64_t base_seed = 0;
    std::vector<std::string> labels;
    std::vector<double> truth;
    EstimatorSummary mle;
    EstimatorSummary em;
    std::vector<ReplicationOutcome> outcomes;
};

namespace detail {

inline ReplicationFit run_one_fit(FitMethod method, const CountSeries& series,
                                  const ZeroInflationLink& link, const ModelOrder& order,
                                  const FitOptions& options) {
    ReplicationFit fit;
    fit.attempted = true;
    try {
        const FitResult result = method == FitMethod::EM
                                     ? fit_em(series, link, order, std::nullopt, options)
                                     : fit_mle(series, link, order, std::nullopt, options);
        fit.converged = result.converged;
        fit.failed = !result.converged;
        fit.estimate = result.phi.values;
        fit.loglik = result.loglik;
        fit.iterations = result.iterations;
        if (method == FitMethod::EM) {
            double min_increment = std::numeric_limits<double>::infinity();
            for (std::size_t i = 1; i < result.loglik_trace.size(); ++i)
                min_increment = std::min(min_increment,
                                         result.loglik_trace[i] - result.loglik_trace[i - 1]);
            fit.min_em_increment = min_increment;
        }
    } catch (const std::exception&) {
        fit.failed = true;
    }
    return fit;
}

inline EstimatorSummary summarize(const StudyReport& report, bool em) {
    EstimatorSummary summary;
    summary.present = true;
    const std::size_t dim = report.truth.size();
    std::vector<std::vector<double>> estimates(dim);
    for (const auto& outcome : report.outcomes) {
        const ReplicationFit& fit = em ? outcome.em : outcome.mle;
        if (!fit.attempted) continue;
        if (fit.failed || !fit.converged) {
            ++summary.n_failed;
            continue;
        }
        ++summary.n_converged;
        for (std::size_t i = 0; i < dim; ++i) estimates[i].push_back(fit.estimate[i]);
    }
    summary.mean.assign(dim, std::numeric_limits<double>::quiet_NaN());
    summary.made.assign(dim, std::numeric_limits<double>::quiet_NaN());
    if (summary.n_converged > 0) {
        for (std::size_t i = 0; i < dim; ++i) {
            double total = 0.0;
            for (double e : estimates[i]) total += e;
            summary.mean[i] = total / static_cast<double>(estimates[i].size());
            summary.made[i] = made(estimates[i], report.truth[i]);
        }
    }
    return summary;
}

}  // namespace detail

/// Runs the study: replication j simulates with stream seed j, both
/// estimators see the identical sample, and failures are recorded without
/// aborting. The report is deterministic for a given config regardless of
/// the thread count.
inline StudyReport run_simulation_study(const StudyConfig& config) {
    config.validate();
    const ParamVector truth = make_param_vector(config.link, config.true_params, config.order);

    StudyReport report;
    report.name = config.name;
    report.link_case = config.link_case;
    report.n = config.n;
    report.replications = config.replications;
    report.base_seed = config.base_seed;
    report.labels = param_labels(config.link, config.order);
    report.truth = truth.values;
    report.outcomes.resize(static_cast<std::size_t>(config.replications));

    const bool needs_exog = link_requires_exog(config.link);
    std::optional<std::vector<double>> shared_exog;
    if (needs_exog && !config.fresh_exog_per_replication)
        shared_exog = simulate_seasonal_ar(config.exog_eta, config.exog_period,
                                           static_cast<std::size_t>(config.n),
                                           stream_seed(config.base_seed, 0xE0E0E0E0ull));

    auto run_replication = [&](int j) {
        ReplicationOutcome outcome;
        outcome.index = j;
        SimulationSpec spec;
        spec.order = config.order;
        spec.params = config.true_params;
        spec.link = config.link;
        spec.n = static_cast<std::size_t>(config.n);
        spec.seed = stream_seed(config.base_seed, static_cast<std::uint64_t>(j));
        if (needs_exog) {
            spec.exog = config.fresh_exog_per_replication
                            ? simulate_seasonal_ar(
                                  config.exog_eta, config.exog_period, spec.n,
                                  stream_seed(config.base_seed,
                                              0x100000000ull + static_cast<std::uint64_t>(j)))
                            : *shared_exog;
        }
        const SimulatedSeries sim = simulate_tvzip(spec);
        outcome.loglik_at_truth = log_likelihood(truth, sim.series, config.link);
        if (config.run_em)
            outcome.em = detail::run_one_fit(FitMethod::EM, sim.series, config.link,
                                             config.order, config.fit_options);
        if (config.run_mle)
            outcome.mle = detail::run_one_fit(FitMethod::MLE, sim.series, config.link,
                                              config.order, config.fit_options);
        return outcome;
    };

    int n_threads = config.threads > 0 ? config.threads
                                       : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, config.replications));
    if (n_threads == 1) {
        for (int j = 0; j < config.replications; ++j)
            report.outcomes[static_cast<std::size_t>(j)] = run_replication(j + 1);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(n_threads));
        for (int w = 0; w < n_threads; ++w) {
            workers.emplace_back([&, w]() {
                for (int j = w; j < config.replications; j += n_threads)
                    report.outcomes[static_cast<std::size_t>(j)] = run_replication(j + 1);
            });
        }
        for (auto& worker : workers) worker.join();
    }

    if (config.run_mle) report.mle = detail::summarize(report, /*em=*/false);
    if (config.run_em) report.em = detail::summarize(report, /*em=*/true);
    return report;
}

// ---------------------------------------------------------------------------
// Catalog of the nine study models per link case. The "sin" case uses the
// cyclic link with floor 1e-4 and a 12-step period; the "logistic" case
// drives the zero-inflation with a seasonal AR exogenous series (eta = 0.25,
// period 12). A models are order (1,0), B models (2,0), C models (1,1).
// ---------------------------------------------------------------------------

inline StudyConfig built_in_study(const std::string& model, const std::string& link_case) {
    struct Entry {
        const char* name;
        int p, q;
        double g0, g1;  // link parameters (A,B) or (d0,d1)
        double alpha0;
        double lag1, lag2;  // alpha1 and then alpha2 (B) or beta1 (C)
    };
    static const Entry sin_entries[] = {
        {"A1", 1, 0, 0.10, 0.10, 1.00, 0.40, 0.0},   {"A2", 1, 0, -0.25, -0.25, 2.00, 0.50, 0.0},
        {"A3", 1, 0, -0.35, -0.30, 1.00, 0.70, 0.0}, {"B1", 2, 0, 0.10, 0.10, 1.00, 0.20, 0.20},
        {"B2", 2, 0, -0.25, -0.25, 2.00, 0.30, 0.20}, {"B3", 2, 0, -0.35, -0.30, 1.00, 0.40, 0.30},
        {"C1", 1, 1, 0.10, 0.10, 1.00, 0.20, 0.20},  {"C2", 1, 1, -0.25, -0.25, 2.00, 0.30, 0.20},
        {"C3", 1, 1, -0.35, -0.30, 1.00, 0.40, 0.30}};
    static const Entry logistic_entries[] = {
        {"A1", 1, 0, -2.00, 0.00, 1.00, 0.40, 0.0},  {"A2", 1, 0, -1.00, -1.00, 2.00, 0.50, 0.0},
        {"A3", 1, 0, 2.00, 1.00, 1.00, 0.70, 0.0},   {"B1", 2, 0, -2.00, 0.00, 1.00, 0.20, 0.20},
        {"B2", 2, 0, -1.00, -1.00, 2.00, 0.30, 0.20}, {"B3", 2, 0, 2.00, 1.00, 1.00, 0.40, 0.30},
        {"C1", 1, 1, -2.00, 0.00, 1.00, 0.20, 0.20}, {"C2", 1, 1, -1.00, -1.00, 2.00, 0.30, 0.20},
        {"C3", 1, 1, 2.00, 1.00, 1.00, 0.40, 0.30}};

    const bool logistic = link_case == "logistic";
    if (!logistic && link_case != "sin")
        throw std::invalid_argument("study catalog: link case must be 'sin' or 'logistic'");
    const Entry* entry = nullptr;
    for (const Entry& e : logistic ? logistic_entries : sin_entries)
        if (model == e.name) entry = &e;
    if (!entry) throw std::invalid_argument("study catalog: unknown model '" + model + "'");

    StudyConfig config;
    config.name = entry->name;
    config.link_case = logistic ? "logistic" : "sin";
    config.order = {entry->p, entry->q};
    config.true_params.alpha0 = entry->alpha0;
    config.true_params.alpha = {entry->lag1};
    if (entry->p == 2) config.true_params.alpha.push_back(entry->lag2);
    if (entry->q == 1) config.true_params.beta = {entry->lag2};
    if (logistic) {
        config.link = LogisticLink{entry->g0, entry->g1};
    } else {
        config.link = SinusoidalLink{entry->g0, entry->g1, 1e-4, 12};
    }
    return config;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double value, const char* fmt = "%.4f") {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), fmt, value);
    return buffer;
}

inline std::string pad_right(std::string text, std::size_t width) {
    if (text.size() < width) text.append(width - text.size(), ' ');
    return text;
}

}  // namespace detail

/// Aligned text table: one column per parameter, rows for the true values and
/// each estimator's "mean (MADE)" pair, echoing the layout of the study
/// tables this harness reproduces.
inline std::string render_study_table(const StudyReport& report) {
    const std::size_t width = 18;
    std::string out = "Study " + report.name + " (" + report.link_case + "), N=" +
                      std::to_string(report.n) + ", m=" + std::to_string(report.replications) +
                      ", seed=" + std::to_string(report.base_seed) + "\n";
    out += detail::pad_right("", 12);
    for (const auto& label : report.labels) out += detail::pad_right(label, width);
    out += "\n";
    out += detail::pad_right("True", 12);
    for (double v : report.truth) out += detail::pad_right(detail::format_double(v), width);
    out += "\n";
    auto estimator_row = [&](const char* name, const EstimatorSummary& summary) {
        if (!summary.present) return;
        out += detail::pad_right(name, 12);
        for (std::size_t i = 0; i < report.truth.size(); ++i) {
            if (summary.n_converged > 0) {
                out += detail::pad_right(detail::format_double(summary.mean[i]) + " (" +
                                             detail::format_double(summary.made[i]) + ")",
                                         width);
            } else {
                out += detail::pad_right("-", width);
            }
        }
        out += "\n";
    };
    estimator_row("MLE", report.mle);
    estimator_row("EM", report.em);
    auto failures = [&](const char* name, const EstimatorSummary& summary) {
        if (!summary.present) return std::string{};
        return std::string(" ") + name + " " + std::to_string(summary.n_failed) + "/" +
               std::to_string(report.replications);
    };
    out += "Failures:" + failures("MLE", report.mle) + failures("EM", report.em) + "\n";
    return out;
}

/// Machine-readable companion: one row per estimator and parameter.
inline std::string render_study_csv(const StudyReport& report) {
    std::string out = "estimator,parameter,true_value,mean,made,converged,failed\n";
    auto rows = [&](const char* name, const EstimatorSummary& summary) {
        if (!summary.present) return;
        for (std::size_t i = 0; i < report.truth.size(); ++i) {
            out += std::string(name) + "," + report.labels[i] + "," +
                   detail::format_double(report.truth[i], "%.10g") + "," +
                   detail::format_double(summary.mean[i], "%.10g") + "," +
                   detail::format_double(summary.made[i], "%.10g") + "," +
                   std::to_string(summary.n_converged) + "," + std::to_string(summary.n_failed) +
                   "\n";
        }
    };
    rows("mle", report.mle);
    rows("em", report.em);
    return out;
}

}  // namespace tvzip
