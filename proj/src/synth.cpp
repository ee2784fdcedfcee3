#include "chartret/synth.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "chartret/rng.hpp"

namespace chartret {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Spec
// ---------------------------------------------------------------------------

SynthSpec SynthSpec::uniform(std::size_t count_per_type, std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    for (auto t : all_values<ChartType>()) spec.per_type[t] = count_per_type;
    return spec;
}

void SynthSpec::validate() const {
    if (dim == 0) throw std::invalid_argument("synth spec: dim must be positive");
    if (width < 16 || height < 16) throw std::invalid_argument("synth spec: images must be at least 16x16");
    if (type_weight <= 0.0) throw std::invalid_argument("synth spec: type_weight must be positive");
    if (attribute_weight < 0.0 || noise_weight < 0.0) throw std::invalid_argument("synth spec: negative weight");
    if (label_noise < 0.0 || label_noise > 1.0) throw std::invalid_argument("synth spec: label_noise outside [0, 1]");
}

SynthSpec SynthSpec::from_json_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("synth spec: ") + e.what());
    }
    SynthSpec spec;
    try {
        spec.seed = doc.value("seed", spec.seed);
        spec.dim = doc.value("dim", spec.dim);
        spec.width = doc.value("width", spec.width);
        spec.height = doc.value("height", spec.height);
        spec.queries_per_type = doc.value("queries_per_type", spec.queries_per_type);
        spec.type_weight = doc.value("type_weight", spec.type_weight);
        spec.attribute_weight = doc.value("attribute_weight", spec.attribute_weight);
        spec.noise_weight = doc.value("noise_weight", spec.noise_weight);
        spec.label_noise = doc.value("label_noise", spec.label_noise);

        std::vector<ChartType> types;
        if (doc.contains("types")) {
            for (const auto& name : doc.at("types")) types.push_back(parse_enum<ChartType>(name.get<std::string>()));
        } else {
            auto all = all_values<ChartType>();
            types.assign(all.begin(), all.end());
        }
        const auto count = doc.value("count_per_type", std::size_t{0});
        if (count > 0) {
            for (auto t : types) spec.per_type[t] = count;
        }
        if (doc.contains("per_type")) {
            for (const auto& [name, n] : doc.at("per_type").items()) {
                spec.per_type[parse_enum<ChartType>(name)] = n.get<std::size_t>();
            }
        }
        if (doc.contains("types") && spec.queries_per_type > 0) {
            // queries follow the listed types even when a type has no corpus charts
            for (auto t : types) spec.per_type.try_emplace(t, 0);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("synth spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

SynthSpec SynthSpec::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synth spec " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

std::string SynthSpec::to_json_text() const {
    json per = json::object();
    for (const auto& [t, n] : per_type) per[std::string(to_string(t))] = n;
    json doc = {{"seed", seed},
                {"dim", dim},
                {"width", width},
                {"height", height},
                {"per_type", per},
                {"queries_per_type", queries_per_type},
                {"type_weight", type_weight},
                {"attribute_weight", attribute_weight},
                {"noise_weight", noise_weight},
                {"label_noise", label_noise}};
    return doc.dump(2);
}

std::string attribute_phrase(AttributeKind kind, std::string_view label) {
    std::string words(label);
    std::replace(words.begin(), words.end(), '_', ' ');
    switch (kind) {
    case AttributeKind::type: return words + " chart";
    case AttributeKind::color: return words + " colormap";
    case AttributeKind::trend: return words + " trend";
    case AttributeKind::layout: return words + " layout";
    }
    return words;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

class Canvas {
public:
    Canvas(std::uint32_t w, std::uint32_t h, Rgba background)
        : img_(w, h, background), mask_(w, h, false) {}

    int width() const { return static_cast<int>(img_.width()); }
    int height() const { return static_cast<int>(img_.height()); }

    void plot(int x, int y, Rgba c) {
        if (x < 0 || y < 0 || x >= width() || y >= height()) return;
        img_.set_pixel(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), c);
        mask_.set(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), true);
    }

    void rect(int x0, int y0, int x1, int y1, Rgba c) {
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) plot(x, y, c);
        }
    }

    void disc(double cx, double cy, double r, Rgba c) {
        for (int y = static_cast<int>(cy - r) - 1; y <= static_cast<int>(cy + r) + 1; ++y) {
            for (int x = static_cast<int>(cx - r) - 1; x <= static_cast<int>(cx + r) + 1; ++x) {
                const double dx = x + 0.5 - cx;
                const double dy = y + 0.5 - cy;
                if (dx * dx + dy * dy <= r * r) plot(x, y, c);
            }
        }
    }

    void ring(double cx, double cy, double r, double thickness, Rgba c) {
        sector(cx, cy, r - thickness, r, 0.0, 2 * std::numbers::pi, c);
    }

    void line(double x0, double y0, double x1, double y1, int thickness, Rgba c) {
        const double len = std::hypot(x1 - x0, y1 - y0);
        const int steps = std::max(1, static_cast<int>(len * 2));
        for (int i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / steps;
            const int x = static_cast<int>(x0 + t * (x1 - x0));
            const int y = static_cast<int>(y0 + t * (y1 - y0));
            rect(x - thickness / 2, y - thickness / 2, x - thickness / 2 + thickness, y - thickness / 2 + thickness, c);
        }
    }

    /// Annular sector between angles a0 and a1 (radians, clockwise from +x).
    void sector(double cx, double cy, double r_in, double r_out, double a0, double a1, Rgba c) {
        const double two_pi = 2 * std::numbers::pi;
        for (int y = static_cast<int>(cy - r_out) - 1; y <= static_cast<int>(cy + r_out) + 1; ++y) {
            for (int x = static_cast<int>(cx - r_out) - 1; x <= static_cast<int>(cx + r_out) + 1; ++x) {
                const double dx = x + 0.5 - cx;
                const double dy = y + 0.5 - cy;
                const double r = std::hypot(dx, dy);
                if (r < r_in || r > r_out) continue;
                double a = std::atan2(dy, dx);
                if (a < 0) a += two_pi;
                double lo = std::fmod(a0, two_pi);
                if (lo < 0) lo += two_pi;
                double rel = a - lo;
                if (rel < 0) rel += two_pi;
                if (rel <= a1 - a0) plot(x, y, c);
            }
        }
    }

    RasterImage take_image() { return std::move(img_); }
    ForegroundMask take_mask() { return std::move(mask_); }

private:
    RasterImage img_;
    ForegroundMask mask_;
};

constexpr std::array<Rgba, 10> kCategorical = {{
    {31, 119, 180, 255}, {255, 127, 14, 255}, {44, 160, 44, 255},  {214, 39, 40, 255},  {148, 103, 189, 255},
    {140, 86, 75, 255},  {227, 119, 194, 255}, {127, 127, 127, 255}, {188, 189, 34, 255}, {23, 190, 207, 255},
}};

Rgba lerp(Rgba a, Rgba b, double t) {
    auto mix = [t](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(x + (y - x) * t));
    };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b), 255};
}

/// Maps a value in [0, 1] (or an element index) to a color of the colormap.
class Colormap {
public:
    Colormap(ColormapClass cls, Rng& rng) : cls_(cls) {
        offset_ = static_cast<std::size_t>(rng.below(kCategorical.size()));
        base_ = kCategorical[rng.below(kCategorical.size())];
    }

    /// Continuous maps are drawn in kLevels steps so every level keeps a visible share of the pixels.
    Rgba at(std::size_t index, double value) const {
        value = std::round(std::clamp(value, 0.0, 1.0) * (kLevels - 1)) / (kLevels - 1);
        switch (cls_) {
        case ColormapClass::categorical: return kCategorical[(offset_ + index) % kCategorical.size()];
        case ColormapClass::sequential:
            return lerp(lerp(base_, {255, 255, 255, 255}, 0.75), lerp(base_, {0, 0, 0, 255}, 0.35), value);
        case ColormapClass::diverging:
            if (value < 0.5) return lerp({33, 102, 172, 255}, {247, 247, 247, 255}, value * 2);
            return lerp({247, 247, 247, 255}, {178, 24, 43, 255}, (value - 0.5) * 2);
        }
        return base_;
    }

private:
    static constexpr double kLevels = 5;

    ColormapClass cls_;
    std::size_t offset_ = 0;
    Rgba base_;
};

std::vector<double> trend_values(std::optional<TrendClass> trend, std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(0.15, 0.95);
    if (!trend) return v;
    switch (*trend) {
    case TrendClass::increasing: std::sort(v.begin(), v.end()); break;
    case TrendClass::decreasing: std::sort(v.begin(), v.end(), std::greater<>()); break;
    case TrendClass::mixed:
        std::sort(v.begin(), v.end());
        // rise then fall: never monotone
        std::swap(v[n - 1], v[n / 2]);
        std::reverse(v.begin() + static_cast<std::ptrdiff_t>(n / 2) + 1, v.end());
        break;
    }
    return v;
}

/// Normalized rank of each value, used as the colormap coordinate.
std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t below = 0;
        for (double x : v) below += x < v[i];
        out[i] = v.size() > 1 ? static_cast<double>(below) / static_cast<double>(v.size() - 1) : 0.5;
    }
    return out;
}

void render(Canvas& c, const AttributeSet& a, Rng& rng) {
    const int w = c.width();
    const int h = c.height();
    const int m = 3;
    const double cx = w / 2.0;
    const double cy = h / 2.0;
    const double radius = std::min(w, h) / 2.0 - m;
    const Colormap cmap(a.color.value_or(ColormapClass::categorical), rng);
    const std::size_t n = 4 + static_cast<std::size_t>(rng.below(4));
    const auto values = trend_values(a.trend, n, rng);
    const auto rank = ranks(values);
    auto color = [&](std::size_t i) { return cmap.at(i, rank[i % n]); };
    const auto layout = a.layout.value_or(LayoutClass::vertical);
    const Rgba ink{40, 40, 40, 255};

    auto bars = [&](int gap, bool stacked) {
        const int slots = static_cast<int>(n);
        if (layout == LayoutClass::horizontal) {
            const int band = (h - 2 * m) / slots;
            for (int i = 0; i < slots; ++i) {
                const int len = static_cast<int>(values[i] * (w - 2 * m));
                const int y0 = m + i * band;
                if (stacked) {
                    c.rect(m, y0, m + len / 2, y0 + band - gap, color(i));
                    c.rect(m + len / 2, y0, m + len, y0 + band - gap, color(i + 1));
                } else {
                    c.rect(m, y0, m + len, y0 + band - gap, color(i));
                }
            }
            return;
        }
        const int band = (w - 2 * m) / slots;
        for (int i = 0; i < slots; ++i) {
            const int x0 = m + i * band;
            if (layout == LayoutClass::other) {
                // diverging bars around the middle baseline
                const int len = static_cast<int>((values[i] - 0.5) * (h - 2 * m));
                c.rect(x0, static_cast<int>(cy), x0 + band - gap, static_cast<int>(cy) - len, color(i));
                continue;
            }
            const int len = static_cast<int>(values[i] * (h - 2 * m));
            if (stacked) {
                c.rect(x0, h - m - len / 2, x0 + band - gap, h - m, color(i));
                c.rect(x0, h - m - len, x0 + band - gap, h - m - len / 2, color(i + 1));
            } else {
                c.rect(x0, h - m - len, x0 + band - gap, h - m, color(i));
            }
        }
    };

    auto point_y = [&](double v) { return h - m - v * (h - 2 * m); };
    auto point_x = [&](std::size_t i) { return m + (static_cast<double>(i) + 0.5) * (w - 2 * m) / static_cast<double>(n); };

    switch (a.type) {
    case ChartType::bar: bars(2, false); break;
    case ChartType::stacked_bar: bars(2, true); break;
    case ChartType::histogram: bars(0, false); break;
    case ChartType::timeline: {
        for (std::size_t i = 0; i < n; ++i) {
            const double start = values[i] * 0.6;
            if (layout == LayoutClass::horizontal) {
                const int y = m + static_cast<int>(i) * (h - 2 * m) / static_cast<int>(n);
                c.rect(m + static_cast<int>(start * w), y, m + static_cast<int>((start + 0.3) * w), y + 3, color(i));
            } else if (layout == LayoutClass::vertical) {
                const int x = m + static_cast<int>(i) * (w - 2 * m) / static_cast<int>(n);
                c.rect(x, h - m - static_cast<int>((start + 0.3) * h), x + 3, h - m - static_cast<int>(start * h), color(i));
            } else {
                c.line(m, cy, w - m, cy, 1, ink);
                c.disc(point_x(i), cy, 2 + values[i] * 3, color(i));
            }
        }
        break;
    }
    case ChartType::circular_bar: {
        const double start = layout == LayoutClass::horizontal ? 0.0
                           : layout == LayoutClass::vertical   ? -std::numbers::pi / 2
                                                               : std::numbers::pi / 4;
        const double step = radius / static_cast<double>(n + 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double r_out = radius - static_cast<double>(i) * step;
            c.sector(cx, cy, r_out - step * 0.7, r_out, start, start + values[i] * 1.6 * std::numbers::pi, color(i));
        }
        break;
    }
    case ChartType::line: {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            c.line(point_x(i), point_y(values[i]), point_x(i + 1), point_y(values[i + 1]), 2, color(0));
        }
        for (std::size_t i = 0; i < n; ++i) c.disc(point_x(i), point_y(values[i]), 2, color(i));
        break;
    }
    case ChartType::scatter: {
        for (std::size_t i = 0; i < 3 * n; ++i) {
            const std::size_t j = i % n;
            const double x = point_x(j) + rng.uniform(-4, 4);
            const double y = point_y(values[j] + rng.uniform(-0.08, 0.08));
            c.disc(x, y, 1.6, color(j));
        }
        break;
    }
    case ChartType::box_plot: {
        const double band = (w - 2.0 * m) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = point_x(i);
            const double mid = point_y(values[i]);
            c.line(x, mid - 9, x, mid + 9, 1, ink);
            c.rect(static_cast<int>(x - band / 3), static_cast<int>(mid - 5), static_cast<int>(x + band / 3),
                   static_cast<int>(mid + 5), color(i));
            c.line(x - band / 3, mid, x + band / 3, mid, 1, ink);
        }
        break;
    }
    case ChartType::heatmap: {
        const int rows = 4 + static_cast<int>(rng.below(3));
        const int cols = 5 + static_cast<int>(rng.below(3));
        for (int r = 0; r < rows; ++r) {
            for (int q = 0; q < cols; ++q) {
                const double v = rng.uniform();
                const auto col = cmap.at(static_cast<std::size_t>(v * 5), v);
                c.rect(m + q * (w - 2 * m) / cols, m + r * (h - 2 * m) / rows, m + (q + 1) * (w - 2 * m) / cols,
                       m + (r + 1) * (h - 2 * m) / rows, col);
            }
        }
        break;
    }
    case ChartType::choropleth_map: {
        for (std::size_t i = 0; i < n; ++i) {
            const double bx = rng.uniform(m + 6, w - m - 6);
            const double by = rng.uniform(m + 6, h - m - 6);
            for (int blob = 0; blob < 4; ++blob) {
                c.disc(bx + rng.uniform(-5, 5), by + rng.uniform(-4, 4), rng.uniform(3, 6), color(i));
            }
        }
        break;
    }
    case ChartType::pie:
    case ChartType::donut: {
        double total = 0.0;
        for (double v : values) total += v;
        double angle = rng.uniform(0, 2 * std::numbers::pi);
        const double inner = a.type == ChartType::donut ? radius * 0.5 : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sweep = values[i] / total * 2 * std::numbers::pi;
            c.sector(cx, cy, inner, radius, angle, angle + sweep, color(i));
            angle += sweep;
        }
        break;
    }
    case ChartType::sankey: {
        const std::size_t right = 2 + static_cast<std::size_t>(rng.below(2));
        for (std::size_t i = 0; i < n; ++i) {
            const double y0 = m + (static_cast<double>(i) + 0.5) * (h - 2.0 * m) / static_cast<double>(n);
            const std::size_t j = rng.below(right);
            const double y1 = m + (static_cast<double>(j) + 0.5) * (h - 2.0 * m) / static_cast<double>(right);
            c.rect(m, static_cast<int>(y0 - 2), m + 3, static_cast<int>(y0 + 2), ink);
            c.line(m + 3, y0, w - m - 3, y1, 1 + static_cast<int>(values[i] * 4), color(i));
            c.rect(w - m - 3, static_cast<int>(y1 - 4), w - m, static_cast<int>(y1 + 4), ink);
        }
        break;
    }
    case ChartType::star_plot: {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
            c.line(cx, cy, cx + radius * std::cos(ang), cy + radius * std::sin(ang), 1, {180, 180, 180, 255});
            pts.emplace_back(cx + radius * values[i] * std::cos(ang), cy + radius * values[i] * std::sin(ang));
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = pts[i];
            const auto& q = pts[(i + 1) % n];
            c.line(p.first, p.second, q.first, q.second, 2, color(i));
        }
        break;
    }
    case ChartType::word_cloud: {
        for (std::size_t i = 0; i < 2 * n; ++i) {
            const int ww = 6 + static_cast<int>(rng.below(14));
            const int hh = 2 + static_cast<int>(rng.below(5));
            const int x = m + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, w - 2 * m - ww))));
            const int y = m + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, h - 2 * m - hh))));
            c.rect(x, y, x + ww, y + hh, color(i));
        }
        break;
    }
    case ChartType::dendrogram: {
        const double base = h - m;
        std::vector<double> xs;
        for (std::size_t i = 0; i < n; ++i) xs.push_back(point_x(i));
        std::vector<double> tops(n, base);
        double level = base;
        while (xs.size() > 1) {
            level -= (h - 2.0 * m) / static_cast<double>(n);
            const std::size_t k = rng.below(xs.size() - 1);
            c.line(xs[k], tops[k], xs[k], level, 1, color(k));
            c.line(xs[k + 1], tops[k + 1], xs[k + 1], level, 1, color(k));
            c.line(xs[k], level, xs[k + 1], level, 1, color(k));
            xs[k] = (xs[k] + xs[k + 1]) / 2;
            tops[k] = level;
            xs.erase(xs.begin() + static_cast<std::ptrdiff_t>(k) + 1);
            tops.erase(tops.begin() + static_cast<std::ptrdiff_t>(k) + 1);
        }
        break;
    }
    case ChartType::network: {
        std::vector<std::pair<double, double>> nodes;
        for (std::size_t i = 0; i < n + 2; ++i) nodes.emplace_back(rng.uniform(m + 3, w - m - 3), rng.uniform(m + 3, h - m - 3));
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const auto& p = nodes[i];
            const auto& q = nodes[rng.below(i)];
            c.line(p.first, p.second, q.first, q.second, 1, {150, 150, 150, 255});
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) c.disc(nodes[i].first, nodes[i].second, 2.5, color(i));
        break;
    }
    case ChartType::circular_packing: {
        c.ring(cx, cy, radius, 1.2, ink);
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
            const double r = radius * (0.18 + 0.12 * values[i]);
            c.disc(cx + (radius - r - 2) * 0.6 * std::cos(ang), cy + (radius - r - 2) * 0.6 * std::sin(ang), r, color(i));
        }
        break;
    }
    }
}

AttributeSet random_attributes(ChartType type, Rng& rng) {
    AttributeSet a;
    a.type = type;
    const auto kinds = Taxonomy::defaults().applicable_attributes(type);
    if (kinds.color) a.color = static_cast<ColormapClass>(rng.below(3));
    if (kinds.trend) a.trend = static_cast<TrendClass>(rng.below(3));
    if (kinds.layout) a.layout = static_cast<LayoutClass>(rng.below(3));
    return a;
}

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double sq = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        sq += x * x;
    }
    const double norm = std::sqrt(sq);
    for (auto& x : v) x /= norm;
    return v;
}

void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

struct Centers {
    std::vector<std::vector<double>> type;
    std::vector<std::vector<double>> color;
    std::vector<std::vector<double>> trend;
    std::vector<std::vector<double>> layout;
    std::vector<std::vector<double>> trend_feature;
};

} // namespace

SynthCorpus generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    Centers centers;
    for (std::size_t i = 0; i < enum_count<ChartType>(); ++i) centers.type.push_back(random_unit(rng, spec.dim));
    for (std::size_t i = 0; i < 3; ++i) centers.color.push_back(random_unit(rng, spec.dim));
    for (std::size_t i = 0; i < 3; ++i) centers.trend.push_back(random_unit(rng, spec.dim));
    for (std::size_t i = 0; i < 3; ++i) centers.layout.push_back(random_unit(rng, spec.dim));
    for (std::size_t i = 0; i < 3; ++i) centers.trend_feature.push_back(random_unit(rng, spec.dim));

    SynthCorpus out;
    out.fixture = MockFixture(spec.dim);
    for (auto t : all_values<ChartType>()) {
        out.fixture.add_text(attribute_phrase(AttributeKind::type, to_string(t)), centers.type[static_cast<std::size_t>(t)]);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        out.fixture.add_text(attribute_phrase(AttributeKind::color, to_string(static_cast<ColormapClass>(i))), centers.color[i]);
        out.fixture.add_text(attribute_phrase(AttributeKind::trend, to_string(static_cast<TrendClass>(i))), centers.trend[i]);
        out.fixture.add_text(attribute_phrase(AttributeKind::layout, to_string(static_cast<LayoutClass>(i))), centers.layout[i]);
    }

    std::set<std::string> digests;
    auto make_chart = [&](const std::string& id, ChartType type) {
        const auto attrs = random_attributes(type, rng);
        std::optional<RasterImage> image;
        std::optional<ForegroundMask> mask;
        for (int attempt = 0; attempt < 64 && !image; ++attempt) {
            const Rgba bg = rng.chance(0.5) ? Rgba{255, 255, 255, 255} : Rgba{245, 245, 240, 255};
            Canvas canvas(spec.width, spec.height, bg);
            render(canvas, attrs, rng);
            auto candidate_mask = canvas.take_mask();
            auto candidate = canvas.take_image();
            if (candidate_mask.count() == 0) continue;
            if (digests.insert(image_digest(candidate)).second) {
                image = std::move(candidate);
                mask = std::move(candidate_mask);
            }
        }
        if (!image) throw std::runtime_error("could not render a distinct image for " + id);

        std::vector<double> emb(spec.dim, 0.0);
        axpy(emb, spec.type_weight, centers.type[static_cast<std::size_t>(type)]);
        if (attrs.color) axpy(emb, spec.attribute_weight, centers.color[static_cast<std::size_t>(*attrs.color)]);
        if (attrs.trend) axpy(emb, spec.attribute_weight, centers.trend[static_cast<std::size_t>(*attrs.trend)]);
        if (attrs.layout) axpy(emb, spec.attribute_weight, centers.layout[static_cast<std::size_t>(*attrs.layout)]);
        axpy(emb, spec.noise_weight, random_unit(rng, spec.dim));

        std::vector<double> trend(spec.dim, 0.0);
        if (attrs.trend) axpy(trend, 1.0, centers.trend_feature[static_cast<std::size_t>(*attrs.trend)]);
        axpy(trend, 0.3, random_unit(rng, spec.dim));

        FixtureImage entry;
        entry.embedding = std::move(emb);
        entry.trend_feature = std::move(trend);
        entry.mask_rle = mask->to_rle();
        for (auto kind : {AttributeKind::type, AttributeKind::color, AttributeKind::trend, AttributeKind::layout}) {
            const auto truth = attrs.label(kind);
            if (!truth) continue;
            Classification cls{std::string(*truth), 0.9};
            if (spec.label_noise > 0.0 && rng.chance(spec.label_noise)) {
                const auto labels = labels_of(kind);
                const auto truth_index = static_cast<std::size_t>(
                    std::find(labels.begin(), labels.end(), *truth) - labels.begin());
                const auto shift = 1 + rng.below(labels.size() - 1);
                cls = {std::string(labels[(truth_index + shift) % labels.size()]), 0.6};
            }
            entry.classify[kind] = std::move(cls);
        }
        out.fixture.add_image(id, *image, std::move(entry));
        return SynthChart{id, std::move(*image), attrs};
    };

    auto id_for = [](std::string_view prefix, ChartType t, std::size_t i) {
        std::ostringstream s;
        s << prefix << to_string(t) << '_' << std::setfill('0') << std::setw(4) << i;
        return s.str();
    };

    for (const auto& [type, count] : spec.per_type) {
        for (std::size_t i = 0; i < count; ++i) out.corpus.push_back(make_chart(id_for("", type, i), type));
    }
    for (const auto& [type, count] : spec.per_type) {
        for (std::size_t i = 0; i < spec.queries_per_type; ++i) out.queries.push_back(make_chart(id_for("q_", type, i), type));
    }
    return out;
}

void write_synthetic(const SynthCorpus& synth, const SynthSpec& spec, const fs::path& out) {
    auto write_set = [](const std::vector<SynthChart>& charts, const fs::path& dir) {
        fs::create_directories(dir);
        std::vector<LabelRow> rows;
        for (const auto& c : charts) {
            save_png(c.image, dir / (c.id + ".png"));
            rows.push_back({c.id, c.attributes});
        }
        write_labels_csv(dir / "labels.csv", rows);
    };
    write_set(synth.corpus, out / "corpus");
    write_set(synth.queries, out / "queries");
    synth.fixture.save(out / "fixture.json");
    std::ofstream spec_out(out / "spec.json", std::ios::trunc);
    if (!spec_out) throw std::runtime_error("cannot write " + (out / "spec.json").string());
    spec_out << spec.to_json_text() << '\n';
}

} // namespace chartret
