#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>

#include "demine/matrix.hpp"

namespace demine {

// n aligned sample pairs; row i of x and row i of z are one joint draw.
struct PairedDataset {
    Matrix x;
    Matrix z;
    std::string provenance;

    std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t x_dim() const { return static_cast<std::size_t>(x.cols()); }
    std::size_t z_dim() const { return static_cast<std::size_t>(z.cols()); }
};

// Throws InputError unless both sides have the same row count and finite entries.
void validate(const PairedDataset& ds);

// Rows in the given order; pairing is preserved.
PairedDataset select_rows(const PairedDataset& ds, std::span<const std::size_t> rows);

// Seeded shuffle, first round(train_fraction * n) rows become the train part.
std::pair<PairedDataset, PairedDataset> split(const PairedDataset& ds, double train_fraction,
                                              std::uint64_t seed);

// CSV with header x0..x{dx-1},z0..z{dz-1}; values use shortest round-trip
// formatting so a read-back is exact.
void write_csv(const PairedDataset& ds, std::ostream& out);
void write_csv(const PairedDataset& ds, const std::filesystem::path& path);
PairedDataset read_csv(std::istream& in, std::string provenance);
PairedDataset read_csv(const std::filesystem::path& path);

std::string format_double(double v);

} // namespace demine
