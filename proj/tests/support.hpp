#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <cstdio>
#include <string>

#include <unistd.h>

#include "chartret/colorfeat.hpp"
#include "chartret/corpus.hpp"
#include "chartret/rng.hpp"
#include "chartret/taxonomy.hpp"

namespace testsupport {

using namespace chartret;

class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("chartret_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline RasterImage solid_image(std::uint32_t w, std::uint32_t h, Rgba c) { return RasterImage(w, h, c); }

/// Image whose first `n_a` pixels are `a` and the rest `b`.
inline RasterImage two_color_image(std::uint32_t w, std::uint32_t h, Rgba a, Rgba b, std::size_t n_a) {
    RasterImage img(w, h, b);
    for (std::size_t i = 0; i < n_a; ++i) {
        img.set_pixel(static_cast<std::uint32_t>(i % w), static_cast<std::uint32_t>(i / w), a);
    }
    return img;
}

inline std::vector<double> gaussian(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    return v;
}

inline EmbeddingVector unit_vector(Rng& rng, std::size_t dim) {
    auto v = gaussian(rng, dim);
    return l2_normalize(std::span<const double>(v));
}

inline AttributeSet random_attributes(Rng& rng) {
    AttributeSet a;
    a.type = static_cast<ChartType>(rng.below(enum_count<ChartType>()));
    const auto kinds = Taxonomy::defaults().applicable_attributes(a.type);
    if (kinds.color) a.color = static_cast<ColormapClass>(rng.below(3));
    if (kinds.trend) a.trend = static_cast<TrendClass>(rng.below(3));
    if (kinds.layout) a.layout = static_cast<LayoutClass>(rng.below(3));
    return a;
}

inline Palette random_palette(Rng& rng) {
    const std::size_t n = 1 + rng.below(4);
    Palette p;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = rng.uniform(0.2, 1.0);
        p.push_back({Rgb{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                         static_cast<std::uint8_t>(rng.below(256))},
                     w});
        total += w;
    }
    for (auto& e : p) e.proportion /= total;
    return p;
}

inline ChartRecord random_record(Rng& rng, std::string id, std::size_t dim) {
    ChartRecord r;
    r.id = std::move(id);
    r.image_ref = "images/" + r.id + ".png";
    r.attributes = random_attributes(rng);
    r.embedding = unit_vector(rng, dim);
    r.color_vector = histogram_from_palette(random_palette(rng));
    if (rng.chance(0.8)) r.trend_feature = unit_vector(rng, dim);
    r.source = RecordSource::synthetic;
    if (rng.chance(0.3)) r.attributes.extended["style"] = rng.chance(0.5) ? "flat" : "3d";
    if (rng.chance(0.3)) r.metadata["origin"] = "test";
    return r;
}

inline AttributeSelection random_selection(Rng& rng) {
    AttributeSelection s;
    if (rng.chance(0.4)) s.type = static_cast<ChartType>(rng.below(enum_count<ChartType>()));
    if (rng.chance(0.4)) s.color = static_cast<ColormapClass>(rng.below(3));
    if (rng.chance(0.3)) s.trend = static_cast<TrendClass>(rng.below(3));
    if (rng.chance(0.3)) s.layout = static_cast<LayoutClass>(rng.below(3));
    if (rng.chance(0.1)) s.extended = ExtendedRequirement{"style", rng.chance(0.5) ? "flat" : "3d"};
    return s;
}

inline std::string numbered(const std::string& prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%05zu", prefix.c_str(), i);
    return buf;
}

} // namespace testsupport
