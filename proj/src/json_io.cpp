#include "chartret/json_io.hpp"

namespace chartret {

using nlohmann::json;

namespace {

template <class E>
void put_optional(json& j, std::string_view key, const std::optional<E>& v) {
    j[std::string(key)] = v ? json(std::string(to_string(*v))) : json(nullptr);
}

template <class E>
void get_optional(const json& j, std::string_view key, std::optional<E>& out) {
    out.reset();
    auto it = j.find(std::string(key));
    if (it == j.end() || it->is_null()) return;
    out = parse_enum<E>(it->get<std::string>());
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional_number(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

} // namespace

void to_json(json& j, const AttributeSet& a) {
    j = json::object();
    j["type"] = std::string(to_string(a.type));
    put_optional(j, "color", a.color);
    put_optional(j, "trend", a.trend);
    put_optional(j, "layout", a.layout);
    j["extended"] = a.extended;
}

void from_json(const json& j, AttributeSet& a) {
    a.type = parse_enum<ChartType>(j.at("type").get<std::string>());
    get_optional(j, "color", a.color);
    get_optional(j, "trend", a.trend);
    get_optional(j, "layout", a.layout);
    a.extended.clear();
    if (auto it = j.find("extended"); it != j.end() && !it->is_null()) {
        a.extended = it->get<std::map<std::string, std::string>>();
    }
}

void to_json(json& j, const AttributeSelection& s) {
    j = json::object();
    put_optional(j, "type", s.type);
    put_optional(j, "color", s.color);
    put_optional(j, "trend", s.trend);
    put_optional(j, "layout", s.layout);
    j["extended"] = s.extended ? json{{"classifier", s.extended->classifier}, {"label", s.extended->label}}
                               : json(nullptr);
}

void from_json(const json& j, AttributeSelection& s) {
    if (!j.is_object()) throw std::invalid_argument("attribute selection must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key != "type" && key != "color" && key != "trend" && key != "layout" && key != "extended") {
            throw std::invalid_argument("unknown attribute '" + key + "' in selection");
        }
    }
    get_optional(j, "type", s.type);
    get_optional(j, "color", s.color);
    get_optional(j, "trend", s.trend);
    get_optional(j, "layout", s.layout);
    s.extended.reset();
    if (auto it = j.find("extended"); it != j.end() && !it->is_null()) {
        s.extended = ExtendedRequirement{it->at("classifier").get<std::string>(), it->at("label").get<std::string>()};
    }
}

void to_json(json& j, const ExtendedClassifierSpec& s) {
    j = json{{"name", s.name}, {"labels", s.labels}, {"selected_index", s.selected_index}};
}

void from_json(const json& j, ExtendedClassifierSpec& s) {
    s.name = j.at("name").get<std::string>();
    s.labels = j.at("labels").get<std::vector<std::string>>();
    s.selected_index = j.value("selected_index", std::size_t{0});
}

void to_json(json& j, const PaletteEntry& e) {
    j = json{{"rgb", {e.color.r, e.color.g, e.color.b}}, {"proportion", e.proportion}};
}

void from_json(const json& j, PaletteEntry& e) {
    const auto rgb = j.at("rgb").get<std::array<int, 3>>();
    e.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]), static_cast<std::uint8_t>(rgb[2])};
    e.proportion = j.at("proportion").get<double>();
}

void to_json(json& j, const ScoreBreakdown& s) {
    j = json{{"s_global", s.s_global},
             {"s_trend", optional_number(s.s_trend)},
             {"s_color", optional_number(s.s_color)},
             {"s_extended", optional_number(s.s_extended)},
             {"s_intent", s.s_intent},
             {"s_match", s.s_match},
             {"total", s.total}};
}

void from_json(const json& j, ScoreBreakdown& s) {
    s.s_global = j.at("s_global").get<double>();
    s.s_trend = read_optional_number(j, "s_trend");
    s.s_color = read_optional_number(j, "s_color");
    s.s_extended = read_optional_number(j, "s_extended");
    s.s_intent = j.at("s_intent").get<double>();
    s.s_match = j.at("s_match").get<double>();
    s.total = j.at("total").get<double>();
}

void to_json(json& j, const ScoringWeights& w) {
    j = json{{"nu", w.nu}, {"mu", w.mu}, {"aggregation", std::string(to_string(w.aggregation))}};
}

void to_json(json& j, const AnnotationResult& a) {
    json confidence = json::object();
    for (const auto& [kind, c] : a.confidence) confidence[std::string(to_string(kind))] = c;
    j = json{{"attributes", a.attributes},
             {"confidence", confidence},
             {"extended_confidence", a.extended_confidence},
             {"palette", a.palette},
             {"mask", {{"width", a.mask.width()}, {"height", a.mask.height()}, {"mask_rle", a.mask.to_rle()}}}};
}

void to_json(json& j, const CorpusStats& s) {
    json types = json::object();
    for (auto t : all_values<ChartType>()) types[std::string(to_string(t))] = s.per_type[static_cast<std::size_t>(t)];
    json attrs = json::object();
    for (const auto& [kind, counts] : s.per_attribute) attrs[std::string(to_string(kind))] = counts;
    j = json{{"records", s.records}, {"types", types}, {"attributes", attrs}, {"extended", s.extended}};
}

void to_json(json& j, const ConfusionCounts& c) {
    j = json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
}

void to_json(json& j, const EvalReport& r) {
    json f1 = json::object();
    for (const auto& [kind, per_k] : r.f1) {
        json row = json::object();
        for (const auto& [k, cell] : per_k) {
            row[std::to_string(k)] = {{"f1", cell.f1}, {"counts", cell.counts}, {"undefined", cell.undefined}};
        }
        f1[std::string(to_string(kind))] = std::move(row);
    }
    json queries = json::array();
    for (const auto& q : r.queries) {
        json counts = json::object();
        for (const auto& [kind, per_k] : q.counts) {
            json row = json::object();
            for (const auto& [k, c] : per_k) row[std::to_string(k)] = c;
            counts[std::string(to_string(kind))] = std::move(row);
        }
        queries.push_back({{"id", q.id}, {"ranked_ids", q.ranked_ids}, {"counts", counts}});
    }
    j = json{{"protocol", r.protocol},     {"corpus", r.corpus}, {"provider", r.provider},
             {"k_values", r.k_values},     {"f1", f1},           {"queries", queries},
             {"warnings", r.warnings}};
    if (r.annotation) {
        json acc = json::object();
        for (const auto& [kind, cell] : *r.annotation) {
            acc[std::string(to_string(kind))] = {
                {"correct", cell.correct}, {"total", cell.total}, {"accuracy", cell.accuracy}};
        }
        j["annotation_accuracy"] = std::move(acc);
    }
}

json ranked_result_json(const RankedResult& result, std::string_view image_url_prefix) {
    json items = json::array();
    for (std::size_t i = 0; i < result.items.size(); ++i) {
        const auto& item = result.items[i];
        items.push_back({{"rank", i + 1},
                         {"id", item.record.id},
                         {"image_ref", item.record.image_ref},
                         {"image_url", std::string(image_url_prefix) + item.record.id},
                         {"attributes", item.record.attributes},
                         {"source", std::string(to_string(item.record.source))},
                         {"metadata", item.record.metadata},
                         {"scores", item.scores}});
    }
    return json{{"candidates", result.candidates}, {"results", items}};
}

} // namespace chartret
