#pragma once

// Matrix JSON ({"n": int, "entries": [[...], ...]}) and CSV ("i,j,value",
// 1-based, row-major) exchange formats.

#include <gaussmin/corrmat.hpp>
#include <gaussmin/error.hpp>
#include <gaussmin/interval.hpp>

#include <json.hpp>

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace gaussmin::io {

using nlohmann::json;

// Shortest decimal that round-trips.
inline std::string format_double(double x) {
    char buffer[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof buffer, "%.*g", precision, x);
        if (std::stod(buffer) == x) break;
    }
    return buffer;
}

inline json matrix_to_json(const CorrelationMatrix& m) {
    json entries = json::array();
    for (std::size_t i = 0; i < m.n(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.n(); ++j) row.push_back(m(i, j));
        entries.push_back(std::move(row));
    }
    return {{"n", m.n()}, {"entries", std::move(entries)}};
}

inline Eigen::MatrixXd entries_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("entries")) {
        throw Error(ErrorCode::invalid_argument, "matrix JSON needs \"n\" and \"entries\"");
    }
    const auto n = doc.at("n").get<std::size_t>();
    const auto& rows = doc.at("entries");
    if (!rows.is_array() || rows.size() != n) throw Error(ErrorCode::invalid_argument, "entries must have n rows");
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!rows[i].is_array() || rows[i].size() != n) {
            throw Error(ErrorCode::invalid_argument, "row " + std::to_string(i) + " must have n entries");
        }
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j].get<double>();
    }
    return m;
}

inline CorrelationMatrix matrix_from_json(const json& doc) {
    return CorrelationMatrix::from_entries(entries_from_json(doc));
}

inline void write_matrix_csv(std::ostream& os, const CorrelationMatrix& m) {
    os << "i,j,value\n";
    for (std::size_t i = 0; i < m.n(); ++i) {
        for (std::size_t j = 0; j < m.n(); ++j) os << i + 1 << ',' << j + 1 << ',' << format_double(m(i, j)) << '\n';
    }
}

inline json interval_to_json(const Interval& x) { return json::array({x.lo(), x.hi()}); }

inline json certificate_to_json(const CounterexampleCertificate& cert) {
    return {{"cosine", interval_to_json(cert.cosine_bound)},
            {"simplex", interval_to_json(cert.simplex_bound)},
            {"subdivisions", cert.subdivisions},
            {"verdict", cert.verdict}};
}

}  // namespace gaussmin::io
