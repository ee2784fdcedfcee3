#include "chartret/taxonomy.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace chartret {

std::vector<std::string_view> labels_of(AttributeKind kind) {
    auto collect = [](const auto& names) {
        return std::vector<std::string_view>(names.begin(), names.end());
    };
    switch (kind) {
    case AttributeKind::type: return collect(EnumNames<ChartType>::names);
    case AttributeKind::color: return collect(EnumNames<ColormapClass>::names);
    case AttributeKind::trend: return collect(EnumNames<TrendClass>::names);
    case AttributeKind::layout: return collect(EnumNames<LayoutClass>::names);
    }
    return {};
}

bool AttributeKinds::contains(AttributeKind kind) const {
    switch (kind) {
    case AttributeKind::type: return true;
    case AttributeKind::color: return color;
    case AttributeKind::trend: return trend;
    case AttributeKind::layout: return layout;
    }
    return false;
}

std::optional<std::string_view> AttributeSet::label(AttributeKind kind) const {
    switch (kind) {
    case AttributeKind::type: return to_string(type);
    case AttributeKind::color:
        if (color) return to_string(*color);
        break;
    case AttributeKind::trend:
        if (trend) return to_string(*trend);
        break;
    case AttributeKind::layout:
        if (layout) return to_string(*layout);
        break;
    }
    return std::nullopt;
}

void AttributeSet::set_label(AttributeKind kind, std::string_view label) {
    switch (kind) {
    case AttributeKind::type: type = parse_enum<ChartType>(label); break;
    case AttributeKind::color: color = parse_enum<ColormapClass>(label); break;
    case AttributeKind::trend: trend = parse_enum<TrendClass>(label); break;
    case AttributeKind::layout: layout = parse_enum<LayoutClass>(label); break;
    }
}

void ExtendedClassifierSpec::validate() const {
    if (name.empty()) throw std::invalid_argument("extended classifier needs a name");
    if (labels.size() < 2) {
        throw std::invalid_argument("extended classifier '" + name + "' needs at least 2 labels");
    }
    std::set<std::string_view> seen;
    for (const auto& label : labels) {
        if (label.empty()) {
            throw std::invalid_argument("extended classifier '" + name + "' has an empty label");
        }
        if (!seen.insert(label).second) {
            throw std::invalid_argument("extended classifier '" + name + "' repeats label '" +
                                        label + "'");
        }
    }
    if (selected_index >= labels.size()) {
        throw std::invalid_argument("extended classifier '" + name + "' selects index " +
                                    std::to_string(selected_index) + " of " +
                                    std::to_string(labels.size()) + " labels");
    }
}

bool AttributeSelection::empty() const {
    return !type && !color && !trend && !layout && !extended;
}

bool AttributeSelection::has(AttributeKind kind) const {
    switch (kind) {
    case AttributeKind::type: return type.has_value();
    case AttributeKind::color: return color.has_value();
    case AttributeKind::trend: return trend.has_value();
    case AttributeKind::layout: return layout.has_value();
    }
    return false;
}

void AttributeSelection::set_label(AttributeKind kind, std::string_view label) {
    switch (kind) {
    case AttributeKind::type: type = parse_enum<ChartType>(label); break;
    case AttributeKind::color: color = parse_enum<ColormapClass>(label); break;
    case AttributeKind::trend: trend = parse_enum<TrendClass>(label); break;
    case AttributeKind::layout: layout = parse_enum<LayoutClass>(label); break;
    }
}

bool attribute_match(const AttributeSet& a, const AttributeSelection& sel) {
    if (sel.type && a.type != *sel.type) return false;
    if (sel.color && a.color != sel.color) return false;
    if (sel.trend && a.trend != sel.trend) return false;
    if (sel.layout && a.layout != sel.layout) return false;
    if (sel.extended) {
        auto it = a.extended.find(sel.extended->classifier);
        if (it == a.extended.end() || it->second != sel.extended->label) return false;
    }
    return true;
}

Taxonomy::Taxonomy() {
    constexpr AttributeKinds all{true, true, true};
    constexpr AttributeKinds color_trend{true, true, false};
    constexpr AttributeKinds color_only{true, false, false};
    for (auto t : all_values<ChartType>()) {
        AttributeKinds kinds = color_only;
        switch (t) {
        case ChartType::bar:
        case ChartType::stacked_bar:
        case ChartType::circular_bar:
        case ChartType::histogram:
        case ChartType::timeline: kinds = all; break;
        case ChartType::line:
        case ChartType::scatter:
        case ChartType::box_plot: kinds = color_trend; break;
        default: break;
        }
        table_[static_cast<std::size_t>(t)] = kinds;
    }
}

const Taxonomy& Taxonomy::defaults() {
    static const Taxonomy instance;
    return instance;
}

Taxonomy Taxonomy::from_json_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("taxonomy config: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("taxonomy config must be a JSON object");

    Taxonomy taxonomy;
    for (const auto& [key, value] : doc.items()) {
        auto type = parse_enum<ChartType>(key);
        if (!value.is_array()) {
            throw std::invalid_argument("taxonomy config: entry for '" + key + "' must be a list");
        }
        AttributeKinds kinds;
        for (const auto& item : value) {
            if (!item.is_string()) {
                throw std::invalid_argument("taxonomy config: kinds for '" + key + "' must be strings");
            }
            switch (parse_enum<AttributeKind>(item.get<std::string>())) {
            case AttributeKind::type: break; // always implied
            case AttributeKind::color: kinds.color = true; break;
            case AttributeKind::trend: kinds.trend = true; break;
            case AttributeKind::layout: kinds.layout = true; break;
            }
        }
        taxonomy.table_[static_cast<std::size_t>(type)] = kinds;
    }
    return taxonomy;
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open taxonomy config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

AttributeKinds Taxonomy::applicable_attributes(ChartType type) const {
    return table_[static_cast<std::size_t>(type)];
}

void Taxonomy::validate(const AttributeSet& attributes) const {
    const auto kinds = applicable_attributes(attributes.type);
    auto check = [&](AttributeKind kind, bool present) {
        if (present == kinds.contains(kind)) return;
        throw std::invalid_argument(
            std::string(to_string(kind)) + " is " + (present ? "not applicable to" : "required for") +
            " chart type " + std::string(to_string(attributes.type)));
    };
    check(AttributeKind::color, attributes.color.has_value());
    check(AttributeKind::trend, attributes.trend.has_value());
    check(AttributeKind::layout, attributes.layout.has_value());
}

} // namespace chartret
