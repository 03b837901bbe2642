#include "demine/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <vector>

#include "demine/errors.hpp"
#include "demine/rng.hpp"

namespace demine {

void validate(const PairedDataset& ds) {
    if (ds.x.rows() != ds.z.rows())
        throw InputError("dataset has " + std::to_string(ds.x.rows()) + " x rows but " +
                         std::to_string(ds.z.rows()) + " z rows");
    if (ds.x.cols() == 0 || ds.z.cols() == 0) throw InputError("dataset variables need at least one column");
    if (!ds.x.allFinite() || !ds.z.allFinite()) throw InputError("dataset contains non-finite values");
}

PairedDataset select_rows(const PairedDataset& ds, std::span<const std::size_t> rows) {
    PairedDataset out;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), ds.x.cols());
    out.z.resize(static_cast<Eigen::Index>(rows.size()), ds.z.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= ds.size()) throw InputError("row index out of range");
        out.x.row(static_cast<Eigen::Index>(i)) = ds.x.row(static_cast<Eigen::Index>(rows[i]));
        out.z.row(static_cast<Eigen::Index>(i)) = ds.z.row(static_cast<Eigen::Index>(rows[i]));
    }
    out.provenance = ds.provenance;
    return out;
}

std::pair<PairedDataset, PairedDataset> split(const PairedDataset& ds, double train_fraction,
                                              std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InputError("train fraction must lie in (0, 1)");
    const std::size_t n = ds.size();
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n)
        throw InputError("too few rows (" + std::to_string(n) + ") to split at fraction " +
                         format_double(train_fraction));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto train = select_rows(ds, std::span(order).first(n_train));
    auto val = select_rows(ds, std::span(order).subspan(n_train));
    return {std::move(train), std::move(val)};
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_csv(const PairedDataset& ds, std::ostream& out) {
    validate(ds);
    for (std::size_t j = 0; j < ds.x_dim(); ++j) out << (j ? "," : "") << 'x' << j;
    for (std::size_t j = 0; j < ds.z_dim(); ++j) out << ",z" << j;
    out << '\n';
    for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.x.cols(); ++j) out << (j ? "," : "") << format_double(ds.x(i, j));
        for (Eigen::Index j = 0; j < ds.z.cols(); ++j) out << ',' << format_double(ds.z(i, j));
        out << '\n';
    }
}

void write_csv(const PairedDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    write_csv(ds, out);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

} // namespace

PairedDataset read_csv(std::istream& in, std::string provenance) {
    std::string line;
    if (!std::getline(in, line)) throw InputError(provenance + ": empty CSV");
    const auto header = split_fields(line);
    std::size_t dx = 0, dz = 0;
    for (auto raw : header) {
        const auto name = trim(raw);
        const std::string expect_x = "x" + std::to_string(dx);
        const std::string expect_z = "z" + std::to_string(dz);
        if (dz == 0 && name == expect_x)
            ++dx;
        else if (name == expect_z)
            ++dz;
        else
            throw InputError(provenance + ": unexpected header column '" + std::string(name) +
                             "' (want x0..x{dx-1},z0..z{dz-1})");
    }
    if (dx == 0 || dz == 0) throw InputError(provenance + ": header needs both x and z columns");

    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != dx + dz)
            throw InputError(provenance + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(dx + dz) + " fields, got " + std::to_string(fields.size()));
        for (auto raw : fields) {
            const auto f = trim(raw);
            double v = 0;
            auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size())
                throw InputError(provenance + ":" + std::to_string(line_no) + ": bad number '" +
                                 std::string(f) + "'");
            values.push_back(v);
        }
        ++rows;
    }
    PairedDataset ds;
    ds.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dx));
    ds.z.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dz));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < dx; ++j)
            ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * (dx + dz) + j];
        for (std::size_t j = 0; j < dz; ++j)
            ds.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * (dx + dz) + dx + j];
    }
    ds.provenance = std::move(provenance);
    validate(ds);
    return ds;
}

PairedDataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return read_csv(in, path.string());
}

} // namespace demine
