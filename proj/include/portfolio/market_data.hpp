#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "portfolio/errors.hpp"

namespace portfolio {

/// Default sentinel for a Sortino ratio with an empty downside set.
inline constexpr double kSortinoSentinel = 1e9;

/// Converts an annualized simple risk-free rate into the per-period
/// base-2 log rate used everywhere in the engine.
inline double daily_log2_rate(double annual_rate, int periods_per_year = 252) {
    return std::log2(1.0 + annual_rate) / static_cast<double>(periods_per_year);
}

/// m assets x n periods of adjusted closing prices.
/// All prices are strictly positive; dates are strictly increasing.
struct PriceMatrix {
    std::vector<std::string> assets;
    Eigen::MatrixXd prices;  // m x n
    std::vector<std::string> dates;

    Eigen::Index asset_count() const { return prices.rows(); }
    Eigen::Index period_count() const { return prices.cols(); }
};

/// m x (n-1) grid of base-2 log returns.
struct ReturnMatrix {
    Eigen::MatrixXd values;
};

/// Per-asset trailing Sortino ratio.
struct SortinoFeature {
    Eigen::VectorXd ratios;
    Eigen::Index window = 0;
    double threshold = 0.0;  // r_A, daily base-2 log risk-free rate
};

/// Column mapping for the CSV loader. When `tickers` is empty every
/// non-date column is ingested in header order.
struct ColumnSchema {
    std::string date_column = "date";
    std::vector<std::string> tickers;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

/// Loads adjusted-close prices from a CSV with header `date,<t1>,<t2>,...`.
/// Every asset must have a price on every date; no gap filling is done.
inline PriceMatrix load_prices(const std::string& path,
                               const ColumnSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open price file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty price file: " + path);
    const auto header = detail::split_csv_line(line);
    if (header.empty() || header[0] != schema.date_column)
        throw ParseError("expected first column '" + schema.date_column +
                         "' in " + path);

    std::vector<std::string> tickers;
    std::vector<std::size_t> columns;  // CSV column index per ticker
    if (schema.tickers.empty()) {
        for (std::size_t c = 1; c < header.size(); ++c) {
            tickers.push_back(header[c]);
            columns.push_back(c);
        }
    } else {
        for (const auto& t : schema.tickers) {
            auto it = std::find(header.begin(), header.end(), t);
            if (it == header.end())
                throw ParseError("ticker '" + t + "' not found in header");
            tickers.push_back(t);
            columns.push_back(static_cast<std::size_t>(it - header.begin()));
        }
    }
    if (tickers.empty()) throw ParseError("no asset columns in " + path);

    std::vector<std::string> dates;
    std::vector<std::vector<double>> rows;  // one vector per date
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.empty() || fields[0].empty())
            throw ParseError("missing date at line " +
                             std::to_string(lineno));
        std::vector<double> prices(tickers.size());
        for (std::size_t k = 0; k < tickers.size(); ++k) {
            if (columns[k] >= fields.size() || fields[columns[k]].empty())
                throw MissingDateError("asset '" + tickers[k] +
                                       "' has no price on " + fields[0]);
            double v;
            try {
                std::size_t pos = 0;
                v = std::stod(fields[columns[k]], &pos);
                if (pos != fields[columns[k]].size())
                    throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ParseError("unparsable price '" + fields[columns[k]] +
                                 "' at line " + std::to_string(lineno));
            }
            if (!(v > 0.0))
                throw NonPositivePriceError(
                    "non-positive price for '" + tickers[k] + "' on " +
                    fields[0]);
            prices[k] = v;
        }
        if (!dates.empty() && fields[0] <= dates.back())
            throw ParseError("dates not strictly increasing at line " +
                             std::to_string(lineno));
        dates.push_back(fields[0]);
        rows.push_back(std::move(prices));
    }
    if (dates.empty()) throw ParseError("no data rows in " + path);

    PriceMatrix pm;
    pm.assets = std::move(tickers);
    pm.dates = std::move(dates);
    pm.prices.resize(static_cast<Eigen::Index>(pm.assets.size()),
                     static_cast<Eigen::Index>(pm.dates.size()));
    for (Eigen::Index t = 0; t < pm.prices.cols(); ++t)
        for (Eigen::Index i = 0; i < pm.prices.rows(); ++i)
            pm.prices(i, t) = rows[static_cast<std::size_t>(t)]
                                  [static_cast<std::size_t>(i)];
    return pm;
}

/// Writes a PriceMatrix back to the CSV schema read by load_prices.
inline void save_prices(const PriceMatrix& pm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write price file: " + path);
    out << "date";
    for (const auto& a : pm.assets) out << ',' << a;
    out << '\n';
    char buf[64];
    for (Eigen::Index t = 0; t < pm.period_count(); ++t) {
        out << pm.dates[static_cast<std::size_t>(t)];
        for (Eigen::Index i = 0; i < pm.asset_count(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", pm.prices(i, t));
            out << ',' << buf;
        }
        out << '\n';
    }
}

/// Base-2 log returns: entry (i,t) = log2(price(i,t+1) / price(i,t)).
inline ReturnMatrix log2_returns(const PriceMatrix& q) {
    if (q.period_count() < 2)
        throw TooShortError("log2_returns needs at least 2 periods");
    const Eigen::Index m = q.asset_count();
    const Eigen::Index n = q.period_count();
    ReturnMatrix r;
    r.values.resize(m, n - 1);
    for (Eigen::Index t = 0; t + 1 < n; ++t)
        r.values.col(t) =
            (q.prices.col(t + 1).array() / q.prices.col(t).array()).log2();
    return r;
}

/// Element-wise price relatives v_t / v_{t-1} for 1 <= t <= n-1.
inline Eigen::VectorXd relative_prices(const PriceMatrix& q, Eigen::Index t) {
    if (t < 1 || t >= q.period_count())
        throw IndexOutOfRangeError("relative_prices: t out of range");
    return q.prices.col(t).array() / q.prices.col(t - 1).array();
}

/// Per-asset Sortino ratio over the trailing `window` log2 returns:
/// mean excess over r_A divided by the downside deviation. Assets with
/// no returns below r_A receive the `sentinel` value.
inline SortinoFeature sortino_features(const PriceMatrix& q,
                                       Eigen::Index window, double r_A,
                                       double sentinel = kSortinoSentinel) {
    if (window < 2) throw WindowTooLongError("sortino window must be >= 2");
    const ReturnMatrix rets = log2_returns(q);
    const Eigen::Index total = rets.values.cols();
    if (window > total)
        throw WindowTooLongError("sortino window exceeds available returns");

    SortinoFeature f;
    f.window = window;
    f.threshold = r_A;
    f.ratios.resize(q.asset_count());
    for (Eigen::Index i = 0; i < q.asset_count(); ++i) {
        double sum_excess = 0.0, sum_down = 0.0;
        Eigen::Index j = 0;
        for (Eigen::Index t = total - window; t < total; ++t) {
            const double ret = rets.values(i, t);
            sum_excess += ret - r_A;
            if (ret < r_A) {
                sum_down += (ret - r_A) * (ret - r_A);
                ++j;
            }
        }
        const double mean_excess = sum_excess / static_cast<double>(window);
        if (j == 0) {
            f.ratios(i) = sentinel;
        } else {
            const double dd = std::sqrt(sum_down / static_cast<double>(j));
            f.ratios(i) = mean_excess / dd;
        }
    }
    return f;
}

}  // namespace portfolio
