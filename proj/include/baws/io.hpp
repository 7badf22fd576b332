#pragma once

// CSV input (prices or losses) and CSV output (forecasts, metrics, plot data, scenario paths).

#include "baws/backtest.hpp"
#include "baws/error.hpp"
#include "baws/metrics.hpp"
#include "baws/scenarios.hpp"
#include "baws/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace baws {

/// 12 significant digits, "%.12g".
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

/// Splits one CSV record. Double-quoted fields may contain commas and doubled quotes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(detail::trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(detail::trim(field));
    return out;
}

/// Strict decimal parse of a whole field; nullopt on anything else.
inline std::optional<double> parse_number(const std::string& field) {
    const std::string s = detail::trim(field);
    if (s.empty()) return std::nullopt;
    const char* first = s.data();
    if (*first == '+') ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

enum class ValueKind { Auto, Price, Loss };

/// Which columns hold the date and the values. Empty names mean "find by header".
struct ColumnSpec {
    ValueKind kind = ValueKind::Auto;
    std::string value_column;
    std::string date_column;
};

namespace detail {

inline std::optional<std::size_t> find_column(const std::vector<std::string>& header, const std::string& name) {
    const std::string want = lower(name);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (lower(header[i]) == want) return i;
    }
    return std::nullopt;
}

struct ResolvedColumns {
    ValueKind kind;
    std::size_t value;
    std::optional<std::size_t> date;
};

inline ResolvedColumns resolve_columns(const std::vector<std::string>& header, const ColumnSpec& spec) {
    ResolvedColumns r{spec.kind, 0, std::nullopt};
    if (!spec.value_column.empty()) {
        const auto idx = find_column(header, spec.value_column);
        if (!idx) throw ConfigError("input has no column named '" + spec.value_column + "'");
        r.value = *idx;
        if (r.kind == ValueKind::Auto) {
            const std::string name = lower(spec.value_column);
            const bool priced = name.find("price") != std::string::npos || name.find("close") != std::string::npos;
            r.kind = priced ? ValueKind::Price : ValueKind::Loss;
        }
    } else {
        std::optional<std::size_t> price;
        for (const char* name : {"price", "close", "adj_close", "adj close", "adjclose"}) {
            if ((price = find_column(header, name))) break;
        }
        const auto loss = find_column(header, "loss");
        if (spec.kind == ValueKind::Price || (spec.kind == ValueKind::Auto && price)) {
            if (!price) throw ConfigError("input has no 'price' or 'close' column");
            r = {ValueKind::Price, *price, std::nullopt};
        } else if (loss) {
            r = {ValueKind::Loss, *loss, std::nullopt};
        } else if (header.size() == 1 && spec.kind != ValueKind::Price) {
            r = {ValueKind::Loss, 0, std::nullopt};
        } else {
            throw ConfigError("cannot find a 'price' or 'loss' column in the input header");
        }
    }
    if (!spec.date_column.empty()) {
        r.date = find_column(header, spec.date_column);
        if (!r.date) throw ConfigError("input has no column named '" + spec.date_column + "'");
    } else {
        r.date = find_column(header, "date");
    }
    return r;
}

}  // namespace detail

/// Reads a price or loss CSV. Prices become losses x_t = -log(P_t / P_{t-1}); the date of
/// each loss is the date of P_t. Parse errors carry the 1-based data row.
inline LossSeries parse_series_csv(std::istream& in, const ColumnSpec& spec = {}) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("input is empty; a header row is required", 0);
    const std::vector<std::string> header = split_csv_line(line);
    const auto cols = detail::resolve_columns(header, spec);

    std::vector<double> raw;
    std::vector<std::string> dates;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::blank(line)) continue;
        ++row;
        const auto fields = split_csv_line(line);
        if (cols.value >= fields.size() || (cols.date && *cols.date >= fields.size())) {
            throw ParseError("too few fields", row);
        }
        const auto v = parse_number(fields[cols.value]);
        if (!v) throw ParseError("not a number: '" + fields[cols.value] + "'", row);
        if (!std::isfinite(*v)) throw ParseError("non-finite value", row);
        if (cols.kind == ValueKind::Price && *v <= 0.0) throw ParseError("price must be positive", row);
        raw.push_back(*v);
        if (cols.date) dates.push_back(fields[*cols.date]);
    }

    LossSeries out;
    if (cols.kind == ValueKind::Price) {
        if (raw.size() < 2) throw ParseError("need at least two price rows", row);
        out.values.reserve(raw.size() - 1);
        for (std::size_t i = 1; i < raw.size(); ++i) out.values.push_back(-std::log(raw[i] / raw[i - 1]));
        if (cols.date) out.dates.assign(dates.begin() + 1, dates.end());
    } else {
        if (raw.empty()) throw ParseError("no data rows", row);
        out.values = std::move(raw);
        if (cols.date) out.dates = std::move(dates);
    }
    return out;
}

inline LossSeries load_series_csv(const std::string& path, const ColumnSpec& spec = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_series_csv(in, spec);
}

/// Prices in a named or auto-detected column.
inline LossSeries load_price_csv(const std::string& path, ColumnSpec spec = {}) {
    spec.kind = ValueKind::Price;
    return load_series_csv(path, spec);
}

/// Opens `path`, runs `write`, and raises IoError if any step fails.
inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& write) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    write(out);
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

// ---- forecasts ----

inline std::vector<std::string> backtest_columns(const ForecastTarget& target, bool with_dates) {
    std::vector<std::string> cols{"t"};
    if (with_dates) cols.emplace_back("date");
    cols.emplace_back("k_hat");
    if (std::holds_alternative<Mean>(target)) {
        cols.emplace_back("mean_hat");
    } else {
        cols.emplace_back("var_hat");
        if (std::holds_alternative<VaRES>(target)) cols.emplace_back("es_hat");
    }
    cols.emplace_back("realized_loss");
    cols.emplace_back("realized_score");
    return cols;
}

namespace detail {

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            out << '"';
            for (char c : f) out << (c == '"' ? "\"\"" : std::string(1, c));
            out << '"';
        } else {
            out << f;
        }
    }
    out << '\n';
}

inline std::size_t parse_index(const std::string& field, std::size_t row) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("not a non-negative integer: '" + field + "'", row);
    }
    return v;
}

inline double parse_field(const std::string& field, std::size_t row) {
    const auto v = parse_number(field);
    if (!v) throw ParseError("not a number: '" + field + "'", row);
    return *v;
}

}  // namespace detail

/// Dates are written when any record carries one.
inline void write_backtest_csv(std::ostream& out, const std::vector<ForecastRecord>& records,
                               const ForecastTarget& target) {
    const bool with_dates =
        std::any_of(records.begin(), records.end(), [](const ForecastRecord& r) { return !r.date.empty(); });
    detail::write_row(out, backtest_columns(target, with_dates));
    const std::size_t dim = parameter_dimension(target);
    for (const auto& r : records) {
        std::vector<std::string> f{std::to_string(r.t)};
        if (with_dates) f.push_back(r.date);
        f.push_back(std::to_string(r.k_hat));
        for (std::size_t c = 0; c < dim; ++c) f.push_back(format_number(r.theta[c]));
        f.push_back(format_number(r.realized_loss));
        f.push_back(format_number(r.realized_score));
        detail::write_row(out, f);
    }
}

inline void write_backtest_csv(const std::string& path, const std::vector<ForecastRecord>& records,
                               const ForecastTarget& target) {
    write_file(path, [&](std::ostream& out) { write_backtest_csv(out, records, target); });
}

struct BacktestTable {
    std::vector<ForecastRecord> records;
    std::size_t dimension = 1;  ///< 1 for mean or VaR, 2 for (VaR, ES)
};

inline BacktestTable read_backtest_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("forecast file is empty", 0);
    const auto header = split_csv_line(line);
    const auto need = [&](const char* name) {
        const auto idx = detail::find_column(header, name);
        if (!idx) throw ConfigError(std::string("forecast file lacks column '") + name + "'");
        return *idx;
    };
    const std::size_t t_col = need("t"), k_col = need("k_hat"), loss_col = need("realized_loss"),
                      score_col = need("realized_score");
    const auto date_col = detail::find_column(header, "date");
    std::vector<std::size_t> theta_cols;
    if (const auto m = detail::find_column(header, "mean_hat")) {
        theta_cols.push_back(*m);
    } else {
        theta_cols.push_back(need("var_hat"));
        if (const auto e = detail::find_column(header, "es_hat")) theta_cols.push_back(*e);
    }

    BacktestTable table;
    table.dimension = theta_cols.size();
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::blank(line)) continue;
        ++row;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw ParseError("field count differs from header", row);
        ForecastRecord r;
        r.t = detail::parse_index(f[t_col], row);
        if (date_col) r.date = f[*date_col];
        r.k_hat = detail::parse_index(f[k_col], row);
        r.theta = theta_cols.size() == 1 ? ParamVector(detail::parse_field(f[theta_cols[0]], row))
                                         : ParamVector(detail::parse_field(f[theta_cols[0]], row),
                                                       detail::parse_field(f[theta_cols[1]], row));
        r.realized_loss = detail::parse_field(f[loss_col], row);
        r.realized_score = detail::parse_field(f[score_col], row);
        table.records.push_back(std::move(r));
    }
    return table;
}

// ---- long-format plot data ----

struct PlotPoint {
    std::string series;
    std::size_t t;
    double value;
};

/// Selected window, forecast components and realized loss per t.
inline std::vector<PlotPoint> plot_points(const std::vector<ForecastRecord>& records, const ForecastTarget& target) {
    std::vector<PlotPoint> out;
    const auto names = backtest_columns(target, false);
    const std::size_t dim = parameter_dimension(target);
    for (const auto& r : records) {
        out.push_back({"k_hat", r.t, static_cast<double>(r.k_hat)});
        for (std::size_t c = 0; c < dim; ++c) out.push_back({names[2 + c], r.t, r.theta[c]});
        out.push_back({"realized_loss", r.t, r.realized_loss});
    }
    return out;
}

inline void write_plot_csv(std::ostream& out, const std::vector<PlotPoint>& points) {
    detail::write_row(out, {"series", "t", "value"});
    for (const auto& p : points) detail::write_row(out, {p.series, std::to_string(p.t), format_number(p.value)});
}

inline void write_plot_csv(const std::string& path, const std::vector<PlotPoint>& points) {
    write_file(path, [&](std::ostream& out) { write_plot_csv(out, points); });
}

// ---- metrics ----

inline void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
    detail::write_row(out, {"method", "scenario", "metric", "value"});
    for (const auto& r : report) detail::write_row(out, {r.method, r.scenario, r.metric, format_number(r.value)});
}

inline void write_metrics_csv(const std::string& path, const MetricsReport& report) {
    write_file(path, [&](std::ostream& out) { write_metrics_csv(out, report); });
}

inline MetricsReport read_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("metrics file is empty", 0);
    if (split_csv_line(line) != std::vector<std::string>{"method", "scenario", "metric", "value"}) {
        throw ConfigError("unexpected metrics header");
    }
    MetricsReport report;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::blank(line)) continue;
        ++row;
        const auto f = split_csv_line(line);
        if (f.size() != 4) throw ParseError("expected 4 fields", row);
        report.push_back({f[0], f[1], f[2], detail::parse_field(f[3], row)});
    }
    return report;
}

// ---- scenario paths ----

/// Columns t, loss, true_mean, true_sigma, true_var; true_var is "nan" when the path has none.
inline void write_scenario_csv(std::ostream& out, const ScenarioPath& path) {
    detail::write_row(out, {"t", "loss", "true_mean", "true_sigma", "true_var"});
    for (std::size_t i = 0; i < path.size(); ++i) {
        detail::write_row(out, {std::to_string(i + 1), format_number(path.losses[i]), format_number(path.true_mean[i]),
                                format_number(path.true_sigma[i]),
                                format_number(path.true_var.empty() ? std::nan("") : path.true_var[i])});
    }
}

inline void write_scenario_csv(const std::string& file, const ScenarioPath& path) {
    write_file(file, [&](std::ostream& out) { write_scenario_csv(out, path); });
}

}  // namespace baws
