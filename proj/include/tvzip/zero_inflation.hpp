#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tvzip {

/// Fixed or estimated constant zero-inflation probability.
/// `estimated` marks the probability as a free parameter during fitting
/// (the CLI spelling is `constant:omega=auto`).
struct ConstantLink {
    double omega = 0.5;
    bool estimated = false;
};

/// Cyclic zero-inflation omega(t) = sin_amp*sin(2*pi*t/period)
///                                + cos_amp*cos(2*pi*t/period) + level(),
/// where level() = sqrt(sin_amp^2 + cos_amp^2) + min_omega. The offset is
/// derived, never stored, so a feasible link always keeps omega(t) in
/// [min_omega, 1 - min_omega]. min_omega plays the role of the structural
/// floor and is not estimated; neither is the period.
struct SinusoidalLink {
    double sin_amp = 0.0;
    double cos_amp = 0.0;
    double min_omega = 1e-4;
    int period = 12;

    double amplitude() const { return std::hypot(sin_amp, cos_amp); }
    double level() const { return amplitude() + min_omega; }
};

/// Sinusoidal link evaluated at a coarser month index: every week t is mapped
/// to its month, and all weeks of a month share that month's omega. With no
/// explicit weeks-per-month table the 52-week year is bucketed uniformly into
/// `months` buckets.
struct PiecewiseMonthlyLink {
    double sin_amp = 0.0;
    double cos_amp = 0.0;
    double min_omega = 1e-4;
    int months = 12;
    std::vector<int> weeks_per_month;  // empty: uniform ceil(week*months/52) bucketing

    double amplitude() const { return std::hypot(sin_amp, cos_amp); }
    double level() const { return amplitude() + min_omega; }

    int month_of(double t) const {
        if (weeks_per_month.empty()) {
            const int week = static_cast<int>((static_cast<long long>(std::ceil(t)) - 1) % 52) + 1;
            int m = static_cast<int>(std::ceil(static_cast<double>(week) * months / 52.0));
            return std::min(std::max(m, 1), months);
        }
        int year_weeks = 0;
        for (int w : weeks_per_month) year_weeks += w;
        const int week = static_cast<int>((static_cast<long long>(std::ceil(t)) - 1) % year_weeks) + 1;
        int cumulative = 0;
        for (std::size_t m = 0; m < weeks_per_month.size(); ++m) {
            cumulative += weeks_per_month[m];
            if (week <= cumulative) return static_cast<int>(m) + 1;
        }
        return static_cast<int>(weeks_per_month.size());
    }
};

/// omega = 1 / (1 + exp(-(intercept + slope * V_t))) driven by an exogenous
/// series; always strictly inside (0, 1).
struct LogisticLink {
    double intercept = 0.0;
    double slope = 0.0;
};

using ZeroInflationLink =
    std::variant<ConstantLink, SinusoidalLink, PiecewiseMonthlyLink, LogisticLink>;

struct SinusoidalCheck {
    bool feasible = false;
    double level = 0.0;     // derived offset, meaningful when feasible
    std::string violation;  // names the violated bound when infeasible
};

/// Feasibility of a sinusoidal parameterization: the floor must sit in
/// (0, 1/2) and both amplitudes and their norm must stay within 1/2 - floor,
/// which pins the cycle inside [floor, 1 - floor].
inline SinusoidalCheck validate_sinusoidal(double sin_amp, double cos_amp, double min_omega) {
    if (!(min_omega > 0.0 && min_omega < 0.5))
        throw std::invalid_argument("sinusoidal link: floor must lie in (0, 1/2)");
    const double bound = 0.5 - min_omega;
    SinusoidalCheck check;
    check.level = std::hypot(sin_amp, cos_amp) + min_omega;
    if (std::abs(sin_amp) > bound) {
        check.violation = "|sin amplitude| exceeds 1/2 - floor";
    } else if (std::abs(cos_amp) > bound) {
        check.violation = "|cos amplitude| exceeds 1/2 - floor";
    } else if (std::hypot(sin_amp, cos_amp) > bound) {
        check.violation = "amplitude norm exceeds 1/2 - floor";
    } else {
        check.feasible = true;
    }
    return check;
}

namespace detail {

inline double logistic(double x) {
    double w;
    if (x >= 0.0) {
        w = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        w = e / (1.0 + e);
    }
    // keep strictly inside (0,1) so log terms stay finite
    const double lo = 1e-300;
    const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    return std::min(std::max(w, lo), hi);
}

inline void require_valid(const ConstantLink& link) {
    if (!(link.omega > 0.0 && link.omega < 1.0))
        throw std::invalid_argument("constant link: omega must lie in (0, 1)");
}

inline void require_valid(const SinusoidalLink& link) {
    if (link.period < 1) throw std::invalid_argument("sinusoidal link: period must be >= 1");
    const auto check = validate_sinusoidal(link.sin_amp, link.cos_amp, link.min_omega);
    if (!check.feasible)
        throw std::invalid_argument("sinusoidal link infeasible: " + check.violation);
}

inline void require_valid(const PiecewiseMonthlyLink& link) {
    if (link.months < 1) throw std::invalid_argument("monthly link: months must be >= 1");
    for (int w : link.weeks_per_month)
        if (w < 1) throw std::invalid_argument("monthly link: weeks-per-month entries must be >= 1");
    const auto check = validate_sinusoidal(link.sin_amp, link.cos_amp, link.min_omega);
    if (!check.feasible)
        throw std::invalid_argument("monthly link infeasible: " + check.violation);
}

inline void require_valid(const LogisticLink& link) {
    if (!std::isfinite(link.intercept) || !std::isfinite(link.slope))
        throw std::invalid_argument("logistic link: coefficients must be finite");
}

}  // namespace detail

inline void validate_link(const ZeroInflationLink& link) {
    std::visit([](const auto& l) { detail::require_valid(l); }, link);
}

inline bool link_requires_exog(const ZeroInflationLink& link) {
    return std::holds_alternative<LogisticLink>(link);
}

/// Zero-inflation probability at time t. `exog_value` is required exactly for
/// the logistic family. Fractional t is honored by the cyclic families, which
/// the feasibility sweep tests rely on.
inline double omega_at(const ZeroInflationLink& link, double t,
                       std::optional<double> exog_value = std::nullopt) {
    validate_link(link);
    if (const auto* c = std::get_if<ConstantLink>(&link)) return c->omega;
    if (const auto* s = std::get_if<SinusoidalLink>(&link)) {
        const double phase = 2.0 * std::numbers::pi * t / s->period;
        return s->sin_amp * std::sin(phase) + s->cos_amp * std::cos(phase) + s->level();
    }
    if (const auto* m = std::get_if<PiecewiseMonthlyLink>(&link)) {
        const double phase = 2.0 * std::numbers::pi * m->month_of(t) / m->months;
        return m->sin_amp * std::sin(phase) + m->cos_amp * std::cos(phase) + m->level();
    }
    const auto& lg = std::get<LogisticLink>(link);
    if (!exog_value)
        throw std::invalid_argument("logistic link: missing exogenous value at t");
    return detail::logistic(lg.intercept + lg.slope * *exog_value);
}

/// Number of link parameters that are estimated (the gamma block of the
/// composite parameter vector).
inline int gamma_dimension(const ZeroInflationLink& link) {
    if (const auto* c = std::get_if<ConstantLink>(&link)) return c->estimated ? 1 : 0;
    if (std::holds_alternative<LogisticLink>(link)) return 2;
    return 2;  // sinusoidal families estimate the two amplitudes
}

inline std::vector<double> gamma_values(const ZeroInflationLink& link) {
    if (const auto* c = std::get_if<ConstantLink>(&link))
        return c->estimated ? std::vector<double>{c->omega} : std::vector<double>{};
    if (const auto* s = std::get_if<SinusoidalLink>(&link)) return {s->sin_amp, s->cos_amp};
    if (const auto* m = std::get_if<PiecewiseMonthlyLink>(&link)) return {m->sin_amp, m->cos_amp};
    const auto& lg = std::get<LogisticLink>(link);
    return {lg.intercept, lg.slope};
}

inline std::vector<std::string> gamma_labels(const ZeroInflationLink& link) {
    if (const auto* c = std::get_if<ConstantLink>(&link))
        return c->estimated ? std::vector<std::string>{"omega"} : std::vector<std::string>{};
    if (std::holds_alternative<LogisticLink>(link)) return {"d0", "d1"};
    return {"A", "B"};
}

/// Copy of `link` with its estimated parameters replaced by `gamma`.
inline ZeroInflationLink with_gamma(ZeroInflationLink link, std::span<const double> gamma) {
    if (static_cast<int>(gamma.size()) != gamma_dimension(link))
        throw std::invalid_argument("with_gamma: wrong number of link parameters");
    if (auto* c = std::get_if<ConstantLink>(&link)) {
        if (c->estimated) c->omega = gamma[0];
    } else if (auto* s = std::get_if<SinusoidalLink>(&link)) {
        s->sin_amp = gamma[0];
        s->cos_amp = gamma[1];
    } else if (auto* m = std::get_if<PiecewiseMonthlyLink>(&link)) {
        m->sin_amp = gamma[0];
        m->cos_amp = gamma[1];
    } else {
        auto& lg = std::get<LogisticLink>(link);
        lg.intercept = gamma[0];
        lg.slope = gamma[1];
    }
    return link;
}

/// d omega_t / d gamma_i in the order of gamma_values. The floor and period
/// of the cyclic families are structural constants, so only the amplitudes
/// (plus the derived offset they induce) contribute.
inline std::vector<double> omega_gradient(const ZeroInflationLink& link, double t,
                                          std::optional<double> exog_value = std::nullopt) {
    validate_link(link);
    if (const auto* c = std::get_if<ConstantLink>(&link)) {
        return c->estimated ? std::vector<double>{1.0} : std::vector<double>{};
    }
    if (const auto* s = std::get_if<SinusoidalLink>(&link)) {
        const double phase = 2.0 * std::numbers::pi * t / s->period;
        const double r = s->amplitude();
        // level = hypot(A, B) + floor also moves with the amplitudes
        const double dA = r > 0.0 ? s->sin_amp / r : 0.0;
        const double dB = r > 0.0 ? s->cos_amp / r : 0.0;
        return {std::sin(phase) + dA, std::cos(phase) + dB};
    }
    if (const auto* m = std::get_if<PiecewiseMonthlyLink>(&link)) {
        const double phase = 2.0 * std::numbers::pi * m->month_of(t) / m->months;
        const double r = m->amplitude();
        const double dA = r > 0.0 ? m->sin_amp / r : 0.0;
        const double dB = r > 0.0 ? m->cos_amp / r : 0.0;
        return {std::sin(phase) + dA, std::cos(phase) + dB};
    }
    const auto& lg = std::get<LogisticLink>(link);
    if (!exog_value)
        throw std::invalid_argument("logistic link: missing exogenous value at t");
    const double w = detail::logistic(lg.intercept + lg.slope * *exog_value);
    return {w * (1.0 - w), *exog_value * w * (1.0 - w)};
}

// ---------------------------------------------------------------------------
// Link specification grammar:
//   constant:omega=0.2            fixed probability
//   constant:omega=auto           estimated probability
//   sin:A=0.1,B=0.1,delta=0.0001,s=12
//   sinmonthly:A=...,B=...,delta=...,s=12[,wpm=4:4:5:...]
//   logistic:d0=-2,d1=0           requires an exogenous series
// A and B (or d0 and d1) may be `auto` to request data-driven start values.
// ---------------------------------------------------------------------------

struct LinkSpec {
    ZeroInflationLink link;
    bool auto_init = false;  // estimated parameters should be initialized from data
};

namespace detail {

inline double parse_number(const std::string& text, const std::string& key) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("link spec: bad numeric value for '" + key + "'");
    }
    if (used != text.size())
        throw std::invalid_argument("link spec: bad numeric value for '" + key + "'");
    return value;
}

inline std::vector<std::pair<std::string, std::string>> parse_kv_list(const std::string& body) {
    std::vector<std::pair<std::string, std::string>> items;
    std::stringstream stream(body);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("link spec: expected key=value, got '" + item + "'");
        items.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return items;
}

}  // namespace detail

inline LinkSpec parse_link_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string family = spec.substr(0, colon);
    const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
    const auto items = detail::parse_kv_list(body);

    auto find = [&](const std::string& key) -> const std::string* {
        for (const auto& [k, v] : items)
            if (k == key) return &v;
        return nullptr;
    };
    for (const auto& [k, v] : items) {
        (void)v;
        static const char* known[] = {"omega", "A", "B", "delta", "s", "wpm", "d0", "d1"};
        bool ok = false;
        for (const char* key : known) ok = ok || (k == key);
        if (!ok) throw std::invalid_argument("link spec: unknown key '" + k + "'");
    }

    LinkSpec result;
    if (family == "constant") {
        const auto* omega = find("omega");
        if (!omega) throw std::invalid_argument("link spec: constant requires omega=");
        ConstantLink link;
        if (*omega == "auto") {
            link.estimated = true;
            result.auto_init = true;
        } else {
            link.omega = detail::parse_number(*omega, "omega");
            detail::require_valid(link);
        }
        result.link = link;
        return result;
    }

    if (family == "sin" || family == "sinmonthly") {
        const auto* delta = find("delta");
        const auto* period = find("s");
        if (!delta || !period)
            throw std::invalid_argument("link spec: " + family + " requires delta= and s=");
        double a = 0.0, b = 0.0;
        const auto* av = find("A");
        const auto* bv = find("B");
        if (!av || *av == "auto" || !bv || *bv == "auto") {
            result.auto_init = true;
            if (av && *av != "auto") a = detail::parse_number(*av, "A");
            if (bv && *bv != "auto") b = detail::parse_number(*bv, "B");
        } else {
            a = detail::parse_number(*av, "A");
            b = detail::parse_number(*bv, "B");
        }
        const double floor_value = detail::parse_number(*delta, "delta");
        const int s = static_cast<int>(detail::parse_number(*period, "s"));
        if (s < 1) throw std::invalid_argument("link spec: s must be >= 1");
        validate_sinusoidal(0.0, 0.0, floor_value);  // checks the floor range
        if (family == "sin") {
            SinusoidalLink link{a, b, floor_value, s};
            if (!result.auto_init) detail::require_valid(link);
            result.link = link;
        } else {
            PiecewiseMonthlyLink link;
            link.sin_amp = a;
            link.cos_amp = b;
            link.min_omega = floor_value;
            link.months = s;
            if (const auto* wpm = find("wpm")) {
                std::stringstream stream(*wpm);
                std::string piece;
                while (std::getline(stream, piece, ':'))
                    link.weeks_per_month.push_back(
                        static_cast<int>(detail::parse_number(piece, "wpm")));
                if (static_cast<int>(link.weeks_per_month.size()) != s)
                    throw std::invalid_argument("link spec: wpm must list one entry per month");
            }
            if (!result.auto_init) detail::require_valid(link);
            result.link = link;
        }
        return result;
    }

    if (family == "logistic") {
        LogisticLink link;
        const auto* d0 = find("d0");
        const auto* d1 = find("d1");
        if (!d0 || *d0 == "auto" || !d1 || *d1 == "auto") {
            result.auto_init = true;
            if (d0 && *d0 != "auto") link.intercept = detail::parse_number(*d0, "d0");
            if (d1 && *d1 != "auto") link.slope = detail::parse_number(*d1, "d1");
        } else {
            link.intercept = detail::parse_number(*d0, "d0");
            link.slope = detail::parse_number(*d1, "d1");
        }
        result.link = link;
        return result;
    }

    throw std::invalid_argument("link spec: unknown family '" + family + "'");
}

inline std::string link_family_name(const ZeroInflationLink& link) {
    if (std::holds_alternative<ConstantLink>(link)) return "constant";
    if (std::holds_alternative<SinusoidalLink>(link)) return "sin";
    if (std::holds_alternative<PiecewiseMonthlyLink>(link)) return "sinmonthly";
    return "logistic";
}

}  // namespace tvzip
