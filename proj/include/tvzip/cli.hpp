#pragma once

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tvzip/csv.hpp"
#include "tvzip/estimate.hpp"
#include "tvzip/simulate.hpp"
#include "tvzip/study.hpp"

namespace tvzip::cli {

namespace detail {

inline void write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file '" + path + "'");
    file << content;
}

inline ModelOrder parse_order(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("order must be given as p,q (e.g. 1,0)");
    ModelOrder order;
    order.p = std::stoi(text.substr(0, comma));
    order.q = std::stoi(text.substr(comma + 1));
    order.validate();
    return order;
}

inline std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    if (text.empty()) return values;
    std::stringstream stream(text);
    std::string piece;
    while (std::getline(stream, piece, ','))
        values.push_back(tvzip::detail::parse_number(piece, "list entry"));
    return values;
}

inline std::vector<double> load_exog_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::invalid_argument("cannot open exog file '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(file, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        values.push_back(tvzip::detail::parse_number(line, "exog value"));
    }
    return values;
}

inline std::string format_value(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.10g", value);
    return buffer;
}

inline std::string fit_record(const FitResult& fit, const ZeroInflationLink& structural_link) {
    std::string out;
    out += "method=" + std::string(fit.method == FitMethod::EM ? "em" : "mle") + "\n";
    out += "link_family=" + link_family_name(fit.link) + "\n";
    out += "converged=" + std::to_string(fit.converged ? 1 : 0) + "\n";
    out += "at_boundary=" + std::to_string(fit.at_boundary ? 1 : 0) + "\n";
    out += "iterations=" + std::to_string(fit.iterations) + "\n";
    out += "loglik=" + format_value(fit.loglik) + "\n";
    out += "aic=" + format_value(fit.aic) + "\n";
    out += "bic=" + format_value(fit.bic) + "\n";
    out += "n=" + std::to_string(fit.n_observations) + "\n";
    out += "n_used=" + std::to_string(fit.n_used) + "\n";
    out += "k=" + std::to_string(fit.n_parameters) + "\n";
    if (const auto* c = std::get_if<ConstantLink>(&structural_link); c && !c->estimated)
        out += "omega_fixed=" + format_value(c->omega) + "\n";
    const auto labels = param_labels(structural_link, fit.order);
    for (std::size_t i = 0; i < labels.size(); ++i)
        out += labels[i] + "=" + format_value(fit.phi.values[i]) + "\n";
    return out;
}

inline std::string fitted_path_csv(const FitResult& fit, const CountSeries& data) {
    std::string out = "t,count,lambda,omega\n";
    for (std::size_t t = 1; t <= data.size(); ++t)
        out += std::to_string(t) + "," + std::to_string(data.counts[t - 1]) + "," +
               format_value(fit.fitted_lambda[t - 1]) + "," +
               format_value(fit.fitted_omega[t - 1]) + "\n";
    return out;
}

struct Candidate {
    std::string name;
    std::string link_spec;
    ModelOrder order;
};

inline std::vector<Candidate> load_candidates(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::invalid_argument("cannot open candidates file '" + path + "'");
    std::vector<Candidate> candidates;
    std::string line;
    while (std::getline(file, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::stringstream stream(line);
        Candidate candidate;
        std::string order_text;
        if (!(stream >> candidate.name >> candidate.link_spec >> order_text))
            throw std::invalid_argument("candidates file: expected 'name link p,q' per line");
        candidate.order = parse_order(order_text);
        candidates.push_back(candidate);
    }
    if (candidates.empty()) throw std::invalid_argument("candidates file: no candidates");
    return candidates;
}

/// Comparison table mirroring the real-data tables: one row per candidate in
/// ranked order, a column per parameter that occurs in any candidate, then
/// AIC and BIC.
inline std::string render_comparison_table(const std::vector<Candidate>& candidates,
                                           const std::vector<FitResult>& fits,
                                           const ModelRanking& ranking) {
    auto precedence = [](const std::string& label) {
        if (label == "omega") return 0;
        if (label == "A") return 1;
        if (label == "B") return 2;
        if (label == "d0") return 3;
        if (label == "d1") return 4;
        if (label.rfind("alpha", 0) == 0) return 10 + std::stoi(label.substr(5));
        if (label.rfind("beta", 0) == 0) return 100 + std::stoi(label.substr(4));
        return 1000;
    };
    std::map<int, std::string> columns;
    for (const auto& fit : fits)
        for (const auto& label : param_labels(fit.link, fit.order))
            columns.emplace(precedence(label), label);

    const std::size_t name_width = 12, cell_width = 12;
    auto pad = [](std::string text, std::size_t width) {
        if (text.size() < width) text.append(width - text.size(), ' ');
        return text;
    };

    std::string out = pad("model", name_width);
    for (const auto& [prec, label] : columns) out += pad(label, cell_width);
    out += pad("AIC", cell_width) + pad("BIC", cell_width) + "\n";
    for (std::size_t rank : ranking.order) {
        const auto& fit = fits[rank];
        out += pad(candidates[rank].name, name_width);
        const auto labels = param_labels(fit.link, fit.order);
        for (const auto& [prec, column] : columns) {
            std::string cell;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == column) {
                    char buffer[32];
                    std::snprintf(buffer, sizeof(buffer), "%.4f", fit.phi.values[i]);
                    cell = buffer;
                }
            out += pad(cell, cell_width);
        }
        char buffer[32];
        std::snprintf(buffer, sizeof(buffer), "%.4f", fit.aic);
        out += pad(buffer, cell_width);
        std::snprintf(buffer, sizeof(buffer), "%.4f", fit.bic);
        out += pad(buffer, cell_width);
        out += "\n";
    }
    return out;
}

/// Expands `--config file` into ordinary options: each non-comment
/// `key=value` line becomes `--key value`, with explicitly passed options
/// taking precedence over the file.
inline std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw std::invalid_argument("--config requires a file argument");
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (config_path.empty()) return args;

    std::ifstream file(config_path);
    if (!file) throw std::invalid_argument("cannot open config file '" + config_path + "'");
    std::string line;
    while (std::getline(file, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("config file: expected key=value, got '" + line + "'");
        const std::string flag = "--" + line.substr(0, eq);
        bool already_set = false;
        for (const auto& arg : args)
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) already_set = true;
        if (already_set) continue;
        args.push_back(flag);
        args.push_back(line.substr(eq + 1));
    }
    return args;
}

}  // namespace detail

/// Command-line entry point; `args` excludes the program name. Returns the
/// process exit status.
inline int run_cli(const std::vector<std::string>& args_in) {
    std::vector<std::string> args;
    try {
        args = detail::apply_config_file(args_in);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"time-varying zero-inflated Poisson INGARCH modeling"};
    app.require_subcommand(1);

    // --- simulate -----------------------------------------------------------
    auto* simulate_cmd = app.add_subcommand("simulate", "generate a sample path as CSV");
    std::string sim_order_text = "1,0", sim_link_spec, sim_alpha_text, sim_beta_text;
    double sim_alpha0 = 1.0;
    std::size_t sim_n = 0;
    std::uint64_t sim_seed = 0;
    std::string sim_exog_file, sim_out = "-";
    double sim_exog_eta = 0.25;
    int sim_exog_period = 12;
    bool sim_truth = false;
    simulate_cmd->add_option("--order", sim_order_text, "model order p,q")->required();
    simulate_cmd->add_option("--alpha0", sim_alpha0, "intercept of the mean recursion")->required();
    simulate_cmd->add_option("--alpha", sim_alpha_text, "count-lag coefficients, comma separated")
        ->required();
    simulate_cmd->add_option("--beta", sim_beta_text, "mean-lag coefficients, comma separated");
    simulate_cmd->add_option("--link", sim_link_spec, "zero-inflation link spec")->required();
    simulate_cmd->add_option("--n", sim_n, "series length")->required();
    simulate_cmd->add_option("--seed", sim_seed, "random seed")->required();
    simulate_cmd->add_option("--exog-file", sim_exog_file,
                             "file with one exogenous value per line");
    simulate_cmd->add_option("--exog-eta", sim_exog_eta,
                             "seasonal AR coefficient for a generated exogenous series");
    simulate_cmd->add_option("--exog-period", sim_exog_period,
                             "seasonal AR period for a generated exogenous series");
    simulate_cmd->add_flag("--truth", sim_truth, "include lambda_true and omega_true columns");
    simulate_cmd->add_option("--out", sim_out, "output file, - for stdout");
    simulate_cmd->callback([&]() {
        const LinkSpec link_spec = parse_link_spec(sim_link_spec);
        if (link_spec.auto_init)
            throw std::invalid_argument("simulate: link parameters must be numeric, not auto");
        SimulationSpec spec;
        spec.order = detail::parse_order(sim_order_text);
        spec.params.alpha0 = sim_alpha0;
        spec.params.alpha = detail::parse_double_list(sim_alpha_text);
        spec.params.beta = detail::parse_double_list(sim_beta_text);
        spec.link = link_spec.link;
        spec.n = sim_n;
        spec.seed = sim_seed;
        if (!sim_exog_file.empty()) {
            spec.exog = detail::load_exog_file(sim_exog_file);
        } else if (link_requires_exog(spec.link)) {
            spec.exog = simulate_seasonal_ar(sim_exog_eta, sim_exog_period, sim_n,
                                             stream_seed(sim_seed, 1));
        }
        const SimulatedSeries sim = simulate_tvzip(spec);
        detail::write_output(sim_out, render_series_csv(sim, sim_truth));
    });

    // --- fit ----------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "estimate a model from a count CSV");
    std::string fit_data, fit_link_spec, fit_order_text, fit_method = "em";
    std::string fit_time_col = "t", fit_count_col = "count", fit_exog_col;
    std::string fit_init_text, fit_out = "-", fit_fitted_out;
    fit_cmd->add_option("--data", fit_data, "count CSV file")->required();
    fit_cmd->add_option("--link", fit_link_spec, "zero-inflation link spec")->required();
    fit_cmd->add_option("--order", fit_order_text, "model order p,q")->required();
    fit_cmd->add_option("--method", fit_method, "em or mle")
        ->check(CLI::IsMember({"em", "mle"}));
    fit_cmd->add_option("--time-col", fit_time_col, "time column name");
    fit_cmd->add_option("--count-col", fit_count_col, "count column name");
    fit_cmd->add_option("--exog-col", fit_exog_col, "exogenous column name");
    fit_cmd->add_option("--init", fit_init_text,
                        "starting parameters, comma separated in layout order");
    fit_cmd->add_option("--out", fit_out, "output file, - for stdout");
    fit_cmd->add_option("--fitted-out", fit_fitted_out, "per-step fitted paths CSV");
    fit_cmd->callback([&]() {
        ColumnMapping mapping;
        mapping.time_column = fit_time_col;
        mapping.count_column = fit_count_col;
        if (!fit_exog_col.empty()) mapping.exog_column = fit_exog_col;
        const CountSeries data = load_count_csv(fit_data, mapping);
        const LinkSpec link_spec = parse_link_spec(fit_link_spec);
        const ModelOrder order = detail::parse_order(fit_order_text);

        std::optional<ParamVector> init;
        if (!fit_init_text.empty()) {
            ParamVector phi;
            phi.values = detail::parse_double_list(fit_init_text);
            phi.gamma_size = gamma_dimension(link_spec.link);
            phi.order = order;
            if (phi.size() != phi.gamma_size + 1 + order.p + order.q)
                throw std::invalid_argument("fit: --init has the wrong number of values");
            init = phi;
        } else if (!link_spec.auto_init && gamma_dimension(link_spec.link) > 0) {
            // numeric link parameters serve as the starting point
            ParamVector phi = default_initialization(data, link_spec.link, order);
            const auto gamma = gamma_values(link_spec.link);
            for (std::size_t i = 0; i < gamma.size(); ++i) phi.values[i] = gamma[i];
            init = phi;
        }

        const FitResult fit = fit_method == "em"
                                  ? fit_em(data, link_spec.link, order, init)
                                  : fit_mle(data, link_spec.link, order, init);
        detail::write_output(fit_out, detail::fit_record(fit, link_spec.link));
        if (!fit_fitted_out.empty())
            detail::write_output(fit_fitted_out, detail::fitted_path_csv(fit, data));
    });

    // --- select -------------------------------------------------------------
    auto* select_cmd = app.add_subcommand("select", "fit candidate models and rank by AIC/BIC");
    std::string sel_data, sel_candidates, sel_method = "em", sel_out = "-";
    std::string sel_time_col = "t", sel_count_col = "count", sel_exog_col;
    select_cmd->add_option("--data", sel_data, "count CSV file")->required();
    select_cmd->add_option("--candidates", sel_candidates,
                           "file with one 'name link p,q' candidate per line")
        ->required();
    select_cmd->add_option("--method", sel_method, "em or mle")
        ->check(CLI::IsMember({"em", "mle"}));
    select_cmd->add_option("--time-col", sel_time_col, "time column name");
    select_cmd->add_option("--count-col", sel_count_col, "count column name");
    select_cmd->add_option("--exog-col", sel_exog_col, "exogenous column name");
    select_cmd->add_option("--out", sel_out, "output file, - for stdout");
    select_cmd->callback([&]() {
        ColumnMapping mapping;
        mapping.time_column = sel_time_col;
        mapping.count_column = sel_count_col;
        if (!sel_exog_col.empty()) mapping.exog_column = sel_exog_col;
        const CountSeries data = load_count_csv(sel_data, mapping);
        const auto candidates = detail::load_candidates(sel_candidates);
        std::vector<FitResult> fits;
        fits.reserve(candidates.size());
        for (const auto& candidate : candidates) {
            const LinkSpec link_spec = parse_link_spec(candidate.link_spec);
            fits.push_back(sel_method == "em"
                               ? fit_em(data, link_spec.link, candidate.order)
                               : fit_mle(data, link_spec.link, candidate.order));
        }
        const ModelRanking ranking = compare_models(fits);
        detail::write_output(sel_out, detail::render_comparison_table(candidates, fits, ranking));
    });

    // --- replicate-study ----------------------------------------------------
    auto* study_cmd = app.add_subcommand("replicate-study",
                                         "run a Monte-Carlo recovery study from the catalog");
    std::string study_model, study_case = "sin", study_estimator = "both";
    int study_n = 360, study_m = 200, study_threads = 0;
    std::uint64_t study_seed = 0;
    bool study_full = false, study_shared_exog = false;
    std::string study_out = "-", study_csv;
    study_cmd->add_option("--model", study_model, "catalog model: A1..A3, B1..B3, C1..C3")
        ->required();
    study_cmd->add_option("--case", study_case, "link case: sin or logistic")
        ->check(CLI::IsMember({"sin", "logistic"}));
    study_cmd->add_option("--n", study_n, "series length");
    study_cmd->add_option("--m", study_m, "number of replications");
    study_cmd->add_flag("--full", study_full, "use 1000 replications");
    study_cmd->add_option("--estimator", study_estimator, "em, mle, or both")
        ->check(CLI::IsMember({"em", "mle", "both"}));
    study_cmd->add_option("--seed", study_seed, "base seed")->required();
    study_cmd->add_flag("--shared-exog", study_shared_exog,
                        "share one exogenous series across replications");
    study_cmd->add_option("--threads", study_threads, "worker threads (0 = auto)");
    study_cmd->add_option("--csv", study_csv, "also write a machine-readable CSV here");
    study_cmd->add_option("--out", study_out, "output file, - for stdout");
    study_cmd->callback([&]() {
        StudyConfig config = built_in_study(study_model, study_case);
        config.n = study_n;
        config.replications = study_full ? 1000 : study_m;
        config.base_seed = study_seed;
        config.run_em = study_estimator != "mle";
        config.run_mle = study_estimator != "em";
        config.fresh_exog_per_replication = !study_shared_exog;
        config.threads = study_threads;
        const StudyReport report = run_simulation_study(config);
        detail::write_output(study_out, render_study_table(report));
        if (!study_csv.empty()) detail::write_output(study_csv, render_study_csv(report));
    });

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("tvzip");
    for (const auto& arg : args) argv.push_back(arg.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace tvzip::cli
