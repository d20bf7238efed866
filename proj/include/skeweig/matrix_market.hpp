#ifndef SKEWEIG_MATRIX_MARKET_HPP
#define SKEWEIG_MATRIX_MARKET_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "skew_matrix.hpp"

namespace skeweig {

enum class MatrixMarketSymmetry { general, symmetric, skew_symmetric };

namespace detail {

inline std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline bool blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

inline double parse_value(const std::string& token, std::size_t line_no) {
    // Fortran-style 'D' exponents appear in some older collections.
    std::string t = token;
    std::replace(t.begin(), t.end(), 'd', 'e');
    std::replace(t.begin(), t.end(), 'D', 'e');
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') throw ParseError("bad numeric value '" + token + "'", line_no);
    return v;
}

inline std::size_t parse_index(const std::string& token, std::size_t line_no) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError("bad integer '" + token + "'", line_no);
    return v;
}

}  // namespace detail

/// Reads a real coordinate Matrix Market stream and returns the fully
/// expanded matrix: symmetric files mirror (i,j,v) to (j,i,v), skew-symmetric
/// files mirror it to (j,i,-v). Indices are converted to 0-based.
inline CooMatrix read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty input", 0);
    ++line_no;

    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", line_no);
    object = detail::lowercase(object);
    format = detail::lowercase(format);
    field = detail::lowercase(field);
    symmetry = detail::lowercase(symmetry);
    if (object != "matrix") throw UnsupportedField("object '" + object + "'");
    if (format != "coordinate") throw UnsupportedField("format '" + format + "'");
    if (field != "real" && field != "integer" && field != "double")
        throw UnsupportedField("field '" + field + "'");

    MatrixMarketSymmetry sym;
    if (symmetry == "general")
        sym = MatrixMarketSymmetry::general;
    else if (symmetry == "symmetric")
        sym = MatrixMarketSymmetry::symmetric;
    else if (symmetry == "skew-symmetric")
        sym = MatrixMarketSymmetry::skew_symmetric;
    else
        throw UnsupportedField("symmetry '" + symmetry + "'");

    // Skip comments up to the size line.
    bool have_size = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (detail::blank(line)) continue;
        have_size = true;
        break;
    }
    if (!have_size) throw ParseError("missing size line", line_no);

    CooMatrix M;
    std::size_t declared = 0;
    {
        std::istringstream size(line);
        std::string r, c, z, extra;
        if (!(size >> r >> c >> z) || (size >> extra)) throw ParseError("malformed size line", line_no);
        M.rows = detail::parse_index(r, line_no);
        M.cols = detail::parse_index(c, line_no);
        declared = detail::parse_index(z, line_no);
    }
    if (sym != MatrixMarketSymmetry::general && M.rows != M.cols)
        throw ParseError("symmetric storage requires a square matrix", line_no);
    M.entries.reserve(sym == MatrixMarketSymmetry::general ? declared : 2 * declared);

    std::size_t read = 0;
    while (read < declared && std::getline(in, line)) {
        ++line_no;
        if (detail::blank(line) || line[0] == '%') continue;
        std::istringstream entry(line);
        std::string si, sj, sv, extra;
        if (!(entry >> si >> sj >> sv) || (entry >> extra))
            throw ParseError("expected 'row col value'", line_no);
        const std::size_t i = detail::parse_index(si, line_no);
        const std::size_t j = detail::parse_index(sj, line_no);
        const double v = detail::parse_value(sv, line_no);
        if (i < 1 || i > M.rows || j < 1 || j > M.cols) throw ParseError("index out of range", line_no);
        M.entries.push_back({i - 1, j - 1, v});
        if (i != j) {
            if (sym == MatrixMarketSymmetry::symmetric) M.entries.push_back({j - 1, i - 1, v});
            if (sym == MatrixMarketSymmetry::skew_symmetric) M.entries.push_back({j - 1, i - 1, -v});
        }
        ++read;
    }
    if (read != declared)
        throw ParseError("expected " + std::to_string(declared) + " entries, found " + std::to_string(read),
                         line_no);
    return M;
}

inline CooMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_matrix_market(in);
}

namespace detail {

// %.17g round-trips every finite double exactly.
inline void write_entry(std::ostream& out, std::size_t i, std::size_t j, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", i + 1, j + 1, v);
    out << buf;
}

}  // namespace detail

inline void write_matrix_market(std::ostream& out, const CooMatrix& M) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << M.rows << ' ' << M.cols << ' ' << M.entries.size() << '\n';
    for (const auto& t : M.entries) detail::write_entry(out, t.row, t.col, t.value);
}

/// Writes only the strictly lower triangle with the skew-symmetric banner.
inline void write_matrix_market(std::ostream& out, const SkewSparseMatrix& A) {
    const auto lower = A.lower_triplets();
    out << "%%MatrixMarket matrix coordinate real skew-symmetric\n";
    out << A.n() << ' ' << A.n() << ' ' << lower.size() << '\n';
    for (const auto& t : lower) detail::write_entry(out, t.row, t.col, t.value);
}

template <class Matrix>
void write_matrix_market(const std::string& path, const Matrix& M) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_matrix_market(out, M);
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace skeweig

#endif  // SKEWEIG_MATRIX_MARKET_HPP
