#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chartret {

enum class ChartType {
    bar,
    stacked_bar,
    circular_bar,
    donut,
    pie,
    sankey,
    timeline,
    box_plot,
    histogram,
    heatmap,
    line,
    star_plot,
    choropleth_map,
    scatter,
    word_cloud,
    dendrogram,
    network,
    circular_packing,
};

enum class ColormapClass { categorical, sequential, diverging };
enum class TrendClass { increasing, decreasing, mixed };
enum class LayoutClass { horizontal, vertical, other };

/// The four primary attribute kinds. Only color/trend/layout are optional.
enum class AttributeKind { type, color, trend, layout };

/// Name table for each enum; the index of a name is the enum's value.
template <class E>
struct EnumNames;

template <>
struct EnumNames<ChartType> {
    static constexpr std::string_view what = "chart type";
    static constexpr std::array<std::string_view, 18> names = {
        "bar",     "stacked_bar", "circular_bar", "donut",          "pie",     "sankey",
        "timeline", "box_plot",   "histogram",    "heatmap",        "line",    "star_plot",
        "choropleth_map", "scatter", "word_cloud", "dendrogram",    "network", "circular_packing",
    };
};

template <>
struct EnumNames<ColormapClass> {
    static constexpr std::string_view what = "colormap class";
    static constexpr std::array<std::string_view, 3> names = {"categorical", "sequential", "diverging"};
};

template <>
struct EnumNames<TrendClass> {
    static constexpr std::string_view what = "trend class";
    static constexpr std::array<std::string_view, 3> names = {"increasing", "decreasing", "mixed"};
};

template <>
struct EnumNames<LayoutClass> {
    static constexpr std::string_view what = "layout class";
    static constexpr std::array<std::string_view, 3> names = {"horizontal", "vertical", "other"};
};

template <>
struct EnumNames<AttributeKind> {
    static constexpr std::string_view what = "attribute kind";
    static constexpr std::array<std::string_view, 4> names = {"type", "color", "trend", "layout"};
};

template <class E>
constexpr std::size_t enum_count() {
    return EnumNames<E>::names.size();
}

template <class E>
constexpr std::string_view to_string(E value) {
    return EnumNames<E>::names[static_cast<std::size_t>(value)];
}

template <class E>
constexpr std::optional<E> try_parse(std::string_view text) {
    const auto& names = EnumNames<E>::names;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == text) return static_cast<E>(i);
    }
    return std::nullopt;
}

/// Throws std::invalid_argument on unknown names.
template <class E>
E parse_enum(std::string_view text) {
    if (auto v = try_parse<E>(text)) return *v;
    throw std::invalid_argument("unknown " + std::string(EnumNames<E>::what) + " '" +
                                std::string(text) + "'");
}

template <class E>
constexpr std::array<E, EnumNames<E>::names.size()> all_values() {
    std::array<E, EnumNames<E>::names.size()> out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<E>(i);
    return out;
}

/// Labels of every class of a primary attribute kind, in enum order.
std::vector<std::string_view> labels_of(AttributeKind kind);

/// Subset of {color, trend, layout}. Type is always present and not tracked here.
struct AttributeKinds {
    bool color = false;
    bool trend = false;
    bool layout = false;

    bool contains(AttributeKind kind) const;
    friend bool operator==(const AttributeKinds&, const AttributeKinds&) = default;
};

/// Disentangled labels of one chart: primary attributes plus extended
/// annotations keyed by classifier name.
struct AttributeSet {
    ChartType type = ChartType::bar;
    std::optional<ColormapClass> color;
    std::optional<TrendClass> trend;
    std::optional<LayoutClass> layout;
    std::map<std::string, std::string> extended;

    /// Label of a primary kind, or nullopt when absent.
    std::optional<std::string_view> label(AttributeKind kind) const;
    /// Sets a primary kind from its label; throws on unknown labels.
    void set_label(AttributeKind kind, std::string_view label);

    friend bool operator==(const AttributeSet&, const AttributeSet&) = default;
};

/// A user-defined zero-shot classifier: m >= 2 distinct labels and the
/// label index the user picked as their intent.
struct ExtendedClassifierSpec {
    std::string name;
    std::vector<std::string> labels;
    std::size_t selected_index = 0;

    /// Throws std::invalid_argument when the name or labels are malformed.
    void validate() const;

    friend bool operator==(const ExtendedClassifierSpec&, const ExtendedClassifierSpec&) = default;
};

struct ExtendedRequirement {
    std::string classifier;
    std::string label;
    friend bool operator==(const ExtendedRequirement&, const ExtendedRequirement&) = default;
};

/// The user's intent attributes. Empty fields do not constrain.
struct AttributeSelection {
    std::optional<ChartType> type;
    std::optional<ColormapClass> color;
    std::optional<TrendClass> trend;
    std::optional<LayoutClass> layout;
    std::optional<ExtendedRequirement> extended;

    bool empty() const;
    bool has(AttributeKind kind) const;
    void set_label(AttributeKind kind, std::string_view label);

    friend bool operator==(const AttributeSelection&, const AttributeSelection&) = default;
};

/// True iff every non-empty field of `sel` equals the corresponding field of `a`.
bool attribute_match(const AttributeSet& a, const AttributeSelection& sel);

/// Which optional attributes each chart type carries. Immutable once built.
class Taxonomy {
public:
    /// Compiled-in applicability table.
    static const Taxonomy& defaults();

    /// Reads `{ "<chart type>": ["color", "trend", ...], ... }`. Types not
    /// listed keep their default entry.
    static Taxonomy from_json_text(std::string_view text);
    static Taxonomy load(const std::filesystem::path& path);

    AttributeKinds applicable_attributes(ChartType type) const;

    /// Throws std::invalid_argument unless optional attributes are present
    /// exactly when applicable to the chart type.
    void validate(const AttributeSet& attributes) const;

private:
    Taxonomy();

    std::array<AttributeKinds, 18> table_;
};

} // namespace chartret
