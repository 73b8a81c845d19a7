#include "sepcp/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sepcp/error.hpp"

namespace sepcp::io {
namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

void write_doubles(std::ostream& out, const double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            auto bits = std::bit_cast<std::uint64_t>(data[i]);
            char bytes[8];
            for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
            out.write(bytes, 8);
        }
    }
}

// Reads exactly `count` doubles or throws naming the expected and actual byte counts.
void read_doubles(std::istream& in, double* data, std::size_t count, const char* what) {
    const std::size_t expected = count * sizeof(double);
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(expected));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != expected)
        throw IoError(std::string(what) + " payload truncated: expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(got));
    if constexpr (std::endian::native != std::endian::little) {
        for (std::size_t i = 0; i < count; ++i) {
            unsigned char bytes[8];
            std::memcpy(bytes, &data[i], 8);
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
            data[i] = std::bit_cast<double>(bits);
        }
    }
}

json read_header(std::istream& in, const char* magic) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(std::string(magic) + " header line missing");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw IoError(std::string(magic) + " header is not valid JSON: " + e.what());
    }
    if (!header.is_object() || header.value("magic", "") != magic)
        throw IoError(std::string("not a ") + magic + " file (bad magic)");
    if (header.value("version", 0) != 1) throw IoError(std::string("unsupported ") + magic + " version");
    if (header.value("dtype", "") != "f64-le") throw IoError(std::string("unsupported ") + magic + " dtype");
    return header;
}

std::vector<std::size_t> read_axes(const json& header) {
    try {
        auto axes = header.at("axis_sizes").get<std::vector<std::size_t>>();
        if (axes.empty()) throw IoError("axis_sizes is empty");
        for (std::size_t a : axes)
            if (a == 0) throw IoError("axis_sizes must be positive");
        return axes;
    } catch (const json::exception& e) {
        throw IoError(std::string("bad axis_sizes: ") + e.what());
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t start = 0;
        while (start < field.size() && field[start] == ' ') ++start;
        out.push_back(field.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& text, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw IoError("line " + std::to_string(line_no) + ": cannot parse number '" + text + "'");
    return v;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_f4ds(std::ostream& out, const FunctionalSeries& series) {
    const auto axes = series.grid().axis_sizes();
    json header = {{"magic", "F4DS"},
                   {"version", 1},
                   {"axis_sizes", std::vector<std::size_t>(axes.begin(), axes.end())},
                   {"n", series.length()},
                   {"dtype", "f64-le"},
                   {"order", "time-major, grid row-major"}};
    out << header.dump() << '\n';
    write_doubles(out, series.values().data(), static_cast<std::size_t>(series.values().size()));
    if (!out) throw IoError("failed writing F4DS data");
}

void write_f4ds(const std::filesystem::path& path, const FunctionalSeries& series) {
    auto out = open_out(path);
    write_f4ds(out, series);
}

FunctionalSeries read_f4ds(std::istream& in) {
    const json header = read_header(in, "F4DS");
    GridSpec grid(read_axes(header));
    std::size_t n = 0;
    try {
        n = header.at("n").get<std::size_t>();
    } catch (const json::exception& e) {
        throw IoError(std::string("bad n in F4DS header: ") + e.what());
    }
    if (header.value("order", "") != "time-major, grid row-major")
        throw IoError("unsupported F4DS element order");
    RowMatrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
    read_doubles(in, values.data(), n * grid.size(), "F4DS");
    if (in.peek() != std::char_traits<char>::eof()) throw IoError("F4DS file has trailing bytes after the payload");
    return FunctionalSeries(std::move(grid), std::move(values));
}

FunctionalSeries read_f4ds(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_f4ds(in);
}

void write_scores_csv(std::ostream& out, const ScoreMatrix& scores) {
    out << 't';
    for (std::size_t l = 1; l <= scores.dimension(); ++l) out << ",c" << l;
    out << '\n';
    for (std::size_t t = 0; t < scores.length(); ++t) {
        out << (t + 1);
        for (std::size_t l = 0; l < scores.dimension(); ++l)
            out << ',' << format_double(scores.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)));
        out << '\n';
    }
    if (!out) throw IoError("failed writing scores CSV");
}

void write_scores_csv(const std::filesystem::path& path, const ScoreMatrix& scores) {
    auto out = open_out(path);
    write_scores_csv(out, scores);
}

ScoreMatrix read_scores_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("scores CSV is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t") throw IoError("scores CSV header must be t,c1,...,cd");
    for (std::size_t l = 1; l < header.size(); ++l)
        if (header[l] != "c" + std::to_string(l))
            throw IoError("scores CSV header column " + std::to_string(l + 1) + " must be c" + std::to_string(l));
    const std::size_t d = header.size() - 1;

    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != d + 1)
            throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(d + 1) +
                          " fields, got " + std::to_string(fields.size()));
        const double t = parse_double(fields[0], line_no);
        if (t != static_cast<double>(rows + 1))
            throw IoError("line " + std::to_string(line_no) + ": time index must be " + std::to_string(rows + 1));
        for (std::size_t l = 1; l <= d; ++l) data.push_back(parse_double(fields[l], line_no));
        ++rows;
    }
    if (rows == 0) throw IoError("scores CSV has no data rows");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    for (std::size_t t = 0; t < rows; ++t)
        for (std::size_t l = 0; l < d; ++l)
            values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) = data[t * d + l];
    return ScoreMatrix::from_values(std::move(values));
}

ScoreMatrix read_scores_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_scores_csv(in);
}

void write_basis(std::ostream& out, const SeparableBasis& basis) {
    const auto axes = basis.grid().axis_sizes();
    json eigenvalues = json::array();
    std::vector<std::size_t> d;
    std::vector<bool> degenerate;
    for (const auto& b : basis.axes()) {
        eigenvalues.push_back(std::vector<double>(b.eigenvalues.data(), b.eigenvalues.data() + b.eigenvalues.size()));
        d.push_back(b.selected());
        degenerate.push_back(b.near_degenerate);
    }
    json header = {{"magic", "F4DB"},
                   {"version", 1},
                   {"axis_sizes", std::vector<std::size_t>(axes.begin(), axes.end())},
                   {"d", d},
                   {"eigenvalues", eigenvalues},
                   {"near_degenerate", degenerate},
                   {"dtype", "f64-le"},
                   {"order", "axis-major, eigenvector-major"}};
    out << header.dump() << '\n';
    for (const auto& b : basis.axes()) {
        // Eigen's column-major storage is eigenvector-major already.
        const Eigen::MatrixXd v = b.vectors;
        write_doubles(out, v.data(), static_cast<std::size_t>(v.size()));
    }
    if (!out) throw IoError("failed writing basis data");
}

void write_basis(const std::filesystem::path& path, const SeparableBasis& basis) {
    auto out = open_out(path);
    write_basis(out, basis);
}

SeparableBasis read_basis(std::istream& in) {
    const json header = read_header(in, "F4DB");
    GridSpec grid(read_axes(header));
    std::vector<std::size_t> d;
    std::vector<std::vector<double>> eigenvalues;
    std::vector<bool> degenerate;
    try {
        d = header.at("d").get<std::vector<std::size_t>>();
        eigenvalues = header.at("eigenvalues").get<std::vector<std::vector<double>>>();
        degenerate = header.value("near_degenerate", std::vector<bool>(d.size(), false));
    } catch (const json::exception& e) {
        throw IoError(std::string("bad basis header: ") + e.what());
    }
    if (d.size() != grid.rank() || eigenvalues.size() != grid.rank() || degenerate.size() != grid.rank())
        throw IoError("basis header lists do not match the grid rank");

    std::vector<DirectionalBasis> axes;
    for (std::size_t a = 0; a < grid.rank(); ++a) {
        const std::size_t m = grid.axis_size(a);
        if (d[a] < 1 || d[a] > m) throw IoError("basis component count out of range on axis " + std::to_string(a));
        if (eigenvalues[a].size() != m) throw IoError("basis spectrum length mismatch on axis " + std::to_string(a));
        DirectionalBasis b;
        b.axis = a;
        b.eigenvalues = Eigen::Map<const Eigen::VectorXd>(eigenvalues[a].data(), static_cast<Eigen::Index>(m));
        b.vectors.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d[a]));
        read_doubles(in, b.vectors.data(), m * d[a], "basis");
        b.near_degenerate = degenerate[a];
        axes.push_back(std::move(b));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw IoError("basis file has trailing bytes after the payload");
    return SeparableBasis(std::move(grid), std::move(axes));
}

SeparableBasis read_basis(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_basis(in);
}

void write_density_csv(std::ostream& out, const DensityEstimate& estimate) {
    if (estimate.kind == DensityEstimate::Kind::kde_2d) {
        out << "x,y,value\n";
        std::size_t idx = 0;
        for (double x : estimate.x)
            for (double y : estimate.y)
                out << format_double(x) << ',' << format_double(y) << ',' << format_double(estimate.values[idx++])
                    << '\n';
    } else {
        out << "x,value\n";
        for (std::size_t i = 0; i < estimate.x.size(); ++i)
            out << format_double(estimate.x[i]) << ',' << format_double(estimate.values[i]) << '\n';
    }
    if (!out) throw IoError("failed writing density CSV");
}

void write_density_csv(const std::filesystem::path& path, const DensityEstimate& estimate) {
    auto out = open_out(path);
    write_density_csv(out, estimate);
}

}  // namespace sepcp::io
