#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvzip/model.hpp"
#include "tvzip/simulate.hpp"

namespace tvzip {

/// Which header names hold the time index, the counts, and (optionally) the
/// exogenous covariate.
struct ColumnMapping {
    std::string time_column = "t";
    std::string count_column = "count";
    std::optional<std::string> exog_column;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream stream(line);
    std::string field;
    while (std::getline(stream, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline double parse_csv_double(const std::string& text, const std::string& what, std::size_t row) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("csv: bad " + what + " value '" + text + "' at row " +
                                    std::to_string(row));
    }
    if (used != text.size())
        throw std::invalid_argument("csv: bad " + what + " value '" + text + "' at row " +
                                    std::to_string(row));
    return value;
}

}  // namespace detail

/// Reads a comma-separated file with a mandatory header row. Counts must be
/// nonnegative integers, the time column strictly increasing, and the exog
/// column (when mapped) numeric in every row. Errors cite the offending data
/// row (1-based, header excluded).
inline CountSeries load_count_csv(const std::string& path, const ColumnMapping& mapping = {}) {
    std::ifstream file(path);
    if (!file) throw std::invalid_argument("csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(file, line)) throw std::invalid_argument("csv: empty file '" + path + "'");
    const auto header = detail::split_fields(line);

    auto column_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<long>(i);
        return -1L;
    };
    const long time_idx = column_of(mapping.time_column);
    const long count_idx = column_of(mapping.count_column);
    if (time_idx < 0)
        throw std::invalid_argument("csv: missing time column '" + mapping.time_column + "'");
    if (count_idx < 0)
        throw std::invalid_argument("csv: missing count column '" + mapping.count_column + "'");
    long exog_idx = -1;
    if (mapping.exog_column) {
        exog_idx = column_of(*mapping.exog_column);
        if (exog_idx < 0)
            throw std::invalid_argument("csv: missing exog column '" + *mapping.exog_column + "'");
    }

    CountSeries series;
    if (exog_idx >= 0) series.exog.emplace();
    double previous_time = 0.0;
    std::size_t row = 0;
    while (std::getline(file, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto fields = detail::split_fields(line);
        const std::size_t needed = static_cast<std::size_t>(
            std::max(std::max(time_idx, count_idx), exog_idx) + 1);
        if (fields.size() < needed)
            throw std::invalid_argument("csv: missing fields at row " + std::to_string(row));

        const double time = detail::parse_csv_double(fields[time_idx], "time", row);
        if (row > 1 && !(time > previous_time))
            throw std::invalid_argument("csv: time not strictly increasing at row " +
                                        std::to_string(row));
        previous_time = time;

        const double raw = detail::parse_csv_double(fields[count_idx], "count", row);
        const long count = static_cast<long>(raw);
        if (raw < 0.0 || static_cast<double>(count) != raw)
            throw std::invalid_argument("csv: count must be a nonnegative integer at row " +
                                        std::to_string(row));
        series.counts.push_back(count);
        if (exog_idx >= 0)
            series.exog->push_back(detail::parse_csv_double(fields[exog_idx], "exog", row));
    }
    if (series.counts.empty())
        throw std::invalid_argument("csv: no data rows in '" + path + "'");
    series.validate();
    return series;
}

/// Writes a simulated path as `t,count[,exog][,lambda_true,omega_true]`.
inline std::string render_series_csv(const SimulatedSeries& sim, bool include_truth) {
    std::string out = "t,count";
    if (sim.series.exog) out += ",exog";
    if (include_truth) out += ",lambda_true,omega_true";
    out += "\n";
    char buffer[96];
    for (std::size_t t = 1; t <= sim.series.size(); ++t) {
        out += std::to_string(t) + "," + std::to_string(sim.series.counts[t - 1]);
        if (sim.series.exog) {
            std::snprintf(buffer, sizeof(buffer), ",%.10g", (*sim.series.exog)[t - 1]);
            out += buffer;
        }
        if (include_truth) {
            std::snprintf(buffer, sizeof(buffer), ",%.10g,%.10g", sim.lambda[t - 1],
                          sim.omega[t - 1]);
            out += buffer;
        }
        out += "\n";
    }
    return out;
}

}  // namespace tvzip
