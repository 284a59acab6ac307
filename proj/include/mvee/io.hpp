#ifndef MVEE_IO_HPP
#define MVEE_IO_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "mvee/errors.hpp"
#include "mvee/point_set.hpp"
#include "mvee/problem.hpp"

namespace mvee {

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto is_sep = [](char c) { return c == ',' || c == ';' || c == ' ' || c == '\t' || c == '\r'; };
    while (i < line.size()) {
        while (i < line.size() && is_sep(line[i]))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_sep(line[i]))
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline bool parse_double(std::string_view tok, double& value)
{
    if (!tok.empty() && tok.front() == '+')
        tok.remove_prefix(1);
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

} // namespace detail

/// Reads one point per row, comma- or whitespace-separated. Blank lines and
/// lines starting with '#' are skipped. The first data line is treated as a
/// header when its first token is not a number.
inline PointSet parse_points(std::istream& in, bool symmetric)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = detail::split_fields(line);
        if (fields.empty() || fields.front().front() == '#')
            continue;
        double value = 0.0;
        if (first) {
            first = false;
            if (!detail::parse_double(fields.front(), value))
                continue;
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto tok : fields) {
            if (!detail::parse_double(tok, value))
                throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) +
                                                       ": not a number: '" + std::string(tok) + "'");
            if (!std::isfinite(value))
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(lineno) + ": non-finite value");
            row.push_back(value);
        }
        if (width == 0)
            width = row.size();
        else if (row.size() != width)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                                   std::to_string(width) + " columns, got " +
                                                   std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw Error(ErrorCode::ParseError, "no points found");

    Matrix P(static_cast<Index>(width), static_cast<Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t k = 0; k < width; ++k)
            P(static_cast<Index>(k), static_cast<Index>(j)) = rows[j][k];
    return PointSet(std::move(P), symmetric);
}

inline PointSet read_points(const std::string& path, bool symmetric)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return parse_points(in, symmetric);
}

/// Writes one point per row as comma-separated values with round-trip precision.
inline void write_points(std::ostream& os, const PointSet& X)
{
    os << std::setprecision(17);
    for (Index j = 0; j < X.count(); ++j) {
        for (Index k = 0; k < X.dim(); ++k) {
            if (k > 0)
                os << ',';
            os << X.points()(k, j);
        }
        os << '\n';
    }
}

inline nlohmann::json ellipsoid_to_json(const Ellipsoid& E)
{
    nlohmann::json j;
    j["n"] = E.dim();
    j["center"] = std::vector<double>(E.center.data(), E.center.data() + E.center.size());
    nlohmann::json shape = nlohmann::json::array();
    for (Index r = 0; r < E.shape.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(E.shape.cols()));
        for (Index c = 0; c < E.shape.cols(); ++c)
            row[static_cast<std::size_t>(c)] = E.shape(r, c);
        shape.push_back(row);
    }
    j["shape"] = shape;
    j["level"] = E.level;
    j["logdet_H"] = logdet_shape(E);
    j["volume"] = volume(E);
    return j;
}

} // namespace mvee

#endif // MVEE_IO_HPP
