#ifndef IMPROPERDIM_HARNESS_DATASET_IO_HPP
#define IMPROPERDIM_HARNESS_DATASET_IO_HPP

/** @file
 * Plain-text dataset files.
 *
 *   improperdim v1 m=<m> M=<M>
 *   re(x_1) im(x_1) re(x_2) im(x_2) ... re(x_m) im(x_m)    <- snapshot 1
 *   ...                                                    <- M lines total
 *
 * Fields are separated by single spaces and written with 17 significant
 * digits in the "C" number format, so a file reads back bit-exactly.
 */

#include "improperdim/augmented_stats.hpp"

#include <charconv>
#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace improperdim {

/// Malformed or truncated dataset file.
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view dataset_magic = "improperdim v1";

namespace detail {

inline void append_field(std::string& line, double v)
{
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    line.append(buf, ptr);
}

inline std::size_t parse_header_field(std::string_view token, std::string_view key)
{
    if (token.substr(0, key.size()) != key) throw DatasetError("bad header: expected '" + std::string(key) + "'");
    token.remove_prefix(key.size());
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
        throw DatasetError("bad header value for '" + std::string(key) + "'");
    }
    return value;
}

} // namespace detail

inline void write_dataset(std::ostream& out, const DataMatrix& x)
{
    out << dataset_magic << " m=" << x.channels() << " M=" << x.snapshots() << '\n';
    const ComplexMatrix& s = x.samples();
    std::string line;
    for (Eigen::Index t = 0; t < s.cols(); ++t) {
        line.clear();
        for (Eigen::Index p = 0; p < s.rows(); ++p) {
            if (p) line += ' ';
            detail::append_field(line, s(p, t).real());
            line += ' ';
            detail::append_field(line, s(p, t).imag());
        }
        line += '\n';
        out << line;
    }
    if (!out) throw std::runtime_error("failed to write dataset");
}

inline DataMatrix read_dataset(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header)) throw DatasetError("empty dataset file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::string_view h(header);
    if (h.substr(0, dataset_magic.size()) != dataset_magic) throw DatasetError("missing 'improperdim v1' header");
    h.remove_prefix(dataset_magic.size());
    if (h.empty() || h.front() != ' ') throw DatasetError("bad header");
    h.remove_prefix(1);
    const auto space = h.find(' ');
    if (space == std::string_view::npos) throw DatasetError("bad header: expected 'm=<m> M=<M>'");
    const std::size_t m = detail::parse_header_field(h.substr(0, space), "m=");
    const std::size_t snapshots = detail::parse_header_field(h.substr(space + 1), "M=");

    ComplexMatrix s(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(snapshots));
    std::string line;
    for (std::size_t t = 0; t < snapshots; ++t) {
        if (!std::getline(in, line)) {
            throw DatasetError("expected " + std::to_string(snapshots) + " snapshot lines, found " + std::to_string(t));
        }
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t field = 0; field < 2 * m; ++field) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) {
                throw DatasetError("line " + std::to_string(t + 2) + ": bad or missing field " + std::to_string(field + 1));
            }
            p = next;
            auto& cell = s(static_cast<Eigen::Index>(field / 2), static_cast<Eigen::Index>(t));
            if (field % 2 == 0) {
                cell.real(v);
            } else {
                cell.imag(v);
            }
        }
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
        if (p != end) throw DatasetError("line " + std::to_string(t + 2) + ": too many fields");
    }
    for (std::string extra; std::getline(in, extra);) {
        if (extra.find_first_not_of(" \t\r") != std::string::npos) throw DatasetError("trailing data after snapshots");
    }
    try {
        return DataMatrix(std::move(s));
    } catch (const std::invalid_argument& e) {
        throw DatasetError(e.what());
    }
}

} // namespace improperdim

#endif // IMPROPERDIM_HARNESS_DATASET_IO_HPP
