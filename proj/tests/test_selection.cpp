#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tvzip/study.hpp"

using namespace tvzip;

TEST_CASE("made examples") {
    CHECK(made(std::vector<double>{0.4, 0.4, 0.4}, 0.4) == 0.0);
    CHECK(made(std::vector<double>{0.3, 0.5}, 0.4) == Catch::Approx(0.1));
    CHECK(made(std::vector<double>{0.0, 1.0}, 0.0) == Catch::Approx(0.5));
    CHECK_THROWS_AS(made(std::vector<double>{}, 0.0), std::invalid_argument);
}

TEST_CASE("information criteria") {
    const auto ic = information_criteria(-100.0, 50.0, 4);
    CHECK(ic.aic == Catch::Approx(208.0));
    const auto ic_e2 = information_criteria(-100.0, std::exp(2.0), 4);
    CHECK(ic_e2.bic == Catch::Approx(208.0));
    const auto bare = information_criteria(-100.0, 50.0, 0);
    CHECK(bare.aic == Catch::Approx(200.0));
    CHECK(bare.bic == Catch::Approx(200.0));
}

TEST_CASE("model ranking prefers lower AIC, then BIC, then fewer parameters") {
    FitResult a, b;
    a.series_hash = b.series_hash = 42;
    a.n_observations = b.n_observations = 100;
    a.loglik = b.loglik = -100.0;
    a.n_parameters = 4;
    b.n_parameters = 5;
    a.aic = 208.0;
    b.aic = 210.0;
    a.bic = 212.0;
    b.bic = 215.0;

    const auto single = compare_models({a});
    CHECK(single.order == std::vector<std::size_t>{0});

    const auto ranking = compare_models({b, a});
    CHECK(ranking.order == std::vector<std::size_t>{1, 0});

    FitResult other = a;
    other.series_hash = 43;
    CHECK_THROWS_AS(compare_models({a, other}), std::invalid_argument);
}

TEST_CASE("a cyclic-link fit beats a constant-link fit on cyclic data") {
    auto config = built_in_study("B3", "sin");
    SimulationSpec spec;
    spec.order = config.order;
    spec.params = config.true_params;
    spec.link = config.link;
    spec.n = 360;
    spec.seed = 301;
    const auto sim = simulate_tvzip(spec);

    const auto cyclic = fit_em(sim.series, SinusoidalLink{0.0, 0.0, 1e-4, 12}, config.order);
    const auto flat = fit_em(sim.series, ConstantLink{0.5, true}, config.order);
    const auto ranking = compare_models({flat, cyclic});
    CHECK(ranking.order.front() == 1);
}

TEST_CASE("single-replication study aggregates trivially") {
    auto config = built_in_study("A1", "sin");
    config.n = 120;
    config.replications = 1;
    config.base_seed = 7;
    config.run_em = false;
    const auto report = run_simulation_study(config);
    REQUIRE(report.mle.present);
    REQUIRE(report.mle.n_converged == 1);
    const auto& fit = report.outcomes[0].mle;
    for (std::size_t i = 0; i < report.truth.size(); ++i) {
        CHECK(report.mle.mean[i] == Catch::Approx(fit.estimate[i]));
        CHECK(report.mle.made[i] ==
              Catch::Approx(std::abs(fit.estimate[i] - report.truth[i])));
    }
}

TEST_CASE("study reports are deterministic, also across thread counts") {
    auto config = built_in_study("A1", "sin");
    config.n = 120;
    config.replications = 12;
    config.base_seed = 99;
    const auto first = run_simulation_study(config);
    const auto second = run_simulation_study(config);
    CHECK(render_study_table(first) == render_study_table(second));
    CHECK(render_study_csv(first) == render_study_csv(second));

    config.threads = 1;
    const auto serial = run_simulation_study(config);
    CHECK(render_study_csv(serial) == render_study_csv(first));
    for (std::size_t j = 0; j < first.outcomes.size(); ++j) {
        CHECK(first.outcomes[j].mle.estimate == serial.outcomes[j].mle.estimate);
        CHECK(first.outcomes[j].em.estimate == serial.outcomes[j].em.estimate);
    }
}

TEST_CASE("study catalog spans both link cases") {
    const auto sin_c3 = built_in_study("C3", "sin");
    CHECK(sin_c3.order.p == 1);
    CHECK(sin_c3.order.q == 1);
    CHECK(std::get<SinusoidalLink>(sin_c3.link).sin_amp == Catch::Approx(-0.35));
    CHECK(sin_c3.true_params.beta[0] == Catch::Approx(0.30));

    const auto log_c3 = built_in_study("C3", "logistic");
    CHECK(std::get<LogisticLink>(log_c3.link).intercept == Catch::Approx(2.0));
    CHECK(log_c3.true_params.alpha[0] == Catch::Approx(0.40));

    CHECK_THROWS_AS(built_in_study("Z9", "sin"), std::invalid_argument);
    CHECK_THROWS_AS(built_in_study("A1", "elliptic"), std::invalid_argument);
}

TEST_CASE("MADE shrinks with sample size and means bracket the truth") {
    auto small = built_in_study("A1", "sin");
    small.n = 120;
    small.replications = 80;
    small.base_seed = 500;
    small.run_em = false;
    auto large = small;
    large.n = 360;

    const auto report_small = run_simulation_study(small);
    const auto report_large = run_simulation_study(large);
    REQUIRE(report_small.mle.n_converged > 70);
    REQUIRE(report_large.mle.n_converged > 70);

    for (std::size_t i = 0; i < report_small.truth.size(); ++i) {
        // weak decrease with 10% slack for Monte-Carlo noise
        CHECK(report_large.mle.made[i] <= report_small.mle.made[i] * 1.10);
    }

    // mean estimates of the larger study are within 3 standard errors of truth
    for (std::size_t i = 0; i < report_large.truth.size(); ++i) {
        double sd = 0.0;
        std::vector<double> values;
        for (const auto& outcome : report_large.outcomes)
            if (outcome.mle.converged) values.push_back(outcome.mle.estimate[i]);
        for (double v : values) sd += (v - report_large.mle.mean[i]) * (v - report_large.mle.mean[i]);
        sd = std::sqrt(sd / static_cast<double>(values.size() - 1));
        const double se = sd / std::sqrt(static_cast<double>(values.size()));
        CHECK(std::abs(report_large.mle.mean[i] - report_large.truth[i]) <= 3.0 * se);
    }
}

TEST_CASE("logistic-case studies run end to end") {
    auto config = built_in_study("A2", "logistic");
    config.n = 120;
    config.replications = 20;
    config.base_seed = 901;
    config.run_em = false;
    const auto report = run_simulation_study(config);
    REQUIRE(report.mle.present);
    CHECK(report.mle.n_converged + report.mle.n_failed == 20);
    CHECK(report.mle.n_converged >= 15);
    // d0 and d1 recovered to study-level accuracy
    CHECK(std::abs(report.mle.mean[0] - (-1.0)) < 0.5);
    CHECK(std::abs(report.mle.mean[1] - (-1.0)) < 0.5);

    // shared-exog mode is also deterministic
    config.fresh_exog_per_replication = false;
    const auto shared1 = run_simulation_study(config);
    const auto shared2 = run_simulation_study(config);
    CHECK(render_study_csv(shared1) == render_study_csv(shared2));
    CHECK(render_study_csv(shared1) != render_study_csv(report));
}

TEST_CASE("every fit in a study beats the generating truth in likelihood") {
    auto config = built_in_study("B2", "sin");
    config.n = 120;
    config.replications = 15;
    config.base_seed = 77;
    const auto report = run_simulation_study(config);
    for (const auto& outcome : report.outcomes) {
        if (outcome.mle.converged)
            CHECK(outcome.mle.loglik >= outcome.loglik_at_truth - 1e-8);
        if (outcome.em.converged)
            CHECK(outcome.em.loglik >= outcome.loglik_at_truth - 1e-8);
    }
}
