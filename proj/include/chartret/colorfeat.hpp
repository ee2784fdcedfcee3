#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chartret/raster.hpp"

namespace chartret {

/// Colors covering less than this share of foreground pixels are dropped.
inline constexpr double kMinColorShare = 0.10;
inline constexpr std::size_t kHistogramBins = 128;
inline constexpr std::size_t kColorVectorLength = 3 * kHistogramBins;

struct PaletteEntry {
    Rgb color;
    double proportion = 0.0;
    friend bool operator==(const PaletteEntry&, const PaletteEntry&) = default;
};

/// Dominant colors with proportions summing to 1, largest share first.
using Palette = std::vector<PaletteEntry>;

/// 128-bin proportion histograms of R, G and B, concatenated in that order.
using ColorVector = std::vector<float>;

/// Quantizes foreground (mask true, alpha > 0) pixels to 4 bits per channel,
/// drops cells holding less than 10% of them, and returns the survivors as
/// their mean color with renormalized shares. Throws std::invalid_argument
/// when the mask does not match or selects no visible pixel, and
/// std::domain_error when every cell falls below the threshold.
Palette extract_palette(const RasterImage& img, const ForegroundMask& mask);

/// Histogram of a palette: channel value v lands in bin v / 2, weighted by
/// the entry's proportion.
ColorVector histogram_from_palette(const Palette& palette);

ColorVector histogram_vector(const RasterImage& img, const ForegroundMask& mask);

/// Throws std::invalid_argument if `v` is not 384 long.
void check_color_vector(std::span<const float> v);

/// Cosine of two color vectors mapped onto [0, 1].
double color_similarity(std::span<const float> query, std::span<const float> candidate);

} // namespace chartret
