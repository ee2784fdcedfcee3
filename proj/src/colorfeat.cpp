#include "chartret/colorfeat.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "chartret/numerics.hpp"

namespace chartret {

namespace {

constexpr std::size_t kCells = 16 * 16 * 16;

struct Cell {
    std::uint64_t count = 0;
    std::uint64_t r = 0;
    std::uint64_t g = 0;
    std::uint64_t b = 0;
};

std::uint8_t mean_channel(std::uint64_t sum, std::uint64_t count) {
    return static_cast<std::uint8_t>((sum + count / 2) / count);
}

} // namespace

Palette extract_palette(const RasterImage& img, const ForegroundMask& mask) {
    if (!mask.matches(img)) throw std::invalid_argument("mask dimensions do not match the image");

    std::vector<Cell> cells(kCells);
    std::uint64_t total = 0;
    const auto data = img.data();
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const auto* p = &data[4 * i];
        if (p[3] == 0 || !mask.at(i)) continue;
        auto& cell = cells[(std::size_t{p[0]} >> 4) << 8 | (std::size_t{p[1]} >> 4) << 4 | (p[2] >> 4)];
        ++cell.count;
        cell.r += p[0];
        cell.g += p[1];
        cell.b += p[2];
        ++total;
    }
    if (total == 0) throw std::invalid_argument("no visible foreground pixels to extract colors from");

    struct Kept {
        std::size_t cell;
        std::uint64_t count;
    };
    std::vector<Kept> kept;
    std::uint64_t kept_total = 0;
    for (std::size_t c = 0; c < kCells; ++c) {
        // share >= 10% in exact integer arithmetic
        if (cells[c].count > 0 && cells[c].count * 10 >= total) {
            kept.push_back({c, cells[c].count});
            kept_total += cells[c].count;
        }
    }
    if (kept.empty()) {
        throw std::domain_error("every quantized color covers less than 10% of the foreground");
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const Kept& a, const Kept& b) { return a.count > b.count; });

    Palette palette;
    palette.reserve(kept.size());
    for (const auto& k : kept) {
        const auto& cell = cells[k.cell];
        palette.push_back({{mean_channel(cell.r, cell.count), mean_channel(cell.g, cell.count),
                            mean_channel(cell.b, cell.count)},
                           static_cast<double>(k.count) / static_cast<double>(kept_total)});
    }
    return palette;
}

ColorVector histogram_from_palette(const Palette& palette) {
    if (palette.empty()) throw std::invalid_argument("cannot build a histogram from an empty palette");
    std::array<double, kColorVectorLength> acc{};
    for (const auto& entry : palette) {
        acc[entry.color.r / 2] += entry.proportion;
        acc[kHistogramBins + entry.color.g / 2] += entry.proportion;
        acc[2 * kHistogramBins + entry.color.b / 2] += entry.proportion;
    }
    return ColorVector(acc.begin(), acc.end());
}

ColorVector histogram_vector(const RasterImage& img, const ForegroundMask& mask) {
    return histogram_from_palette(extract_palette(img, mask));
}

void check_color_vector(std::span<const float> v) {
    if (v.size() != kColorVectorLength) {
        throw std::invalid_argument("color vector must have " + std::to_string(kColorVectorLength) +
                                    " entries, got " + std::to_string(v.size()));
    }
}

double color_similarity(std::span<const float> query, std::span<const float> candidate) {
    check_color_vector(query);
    check_color_vector(candidate);
    return to_unit_interval(cosine_similarity(query, candidate));
}

} // namespace chartret
