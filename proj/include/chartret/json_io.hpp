#pragma once

#include <string_view>

#include <json.hpp>

#include "chartret/annotation.hpp"
#include "chartret/corpus.hpp"
#include "chartret/harness.hpp"
#include "chartret/retrieval.hpp"

namespace chartret {

// AttributeSet: {"type": "bar", "color": "categorical", "trend": null, ..., "extended": {...}}
void to_json(nlohmann::json& j, const AttributeSet& a);
void from_json(const nlohmann::json& j, AttributeSet& a);

// AttributeSelection: same keys, all optional; "extended": {"classifier": ..., "label": ...}
void to_json(nlohmann::json& j, const AttributeSelection& s);
void from_json(const nlohmann::json& j, AttributeSelection& s);

// {"name": ..., "labels": [...], "selected_index": 0}
void to_json(nlohmann::json& j, const ExtendedClassifierSpec& s);
void from_json(const nlohmann::json& j, ExtendedClassifierSpec& s);

void to_json(nlohmann::json& j, const PaletteEntry& e);
void from_json(const nlohmann::json& j, PaletteEntry& e);

void to_json(nlohmann::json& j, const ScoreBreakdown& s);
void from_json(const nlohmann::json& j, ScoreBreakdown& s);

void to_json(nlohmann::json& j, const ScoringWeights& w);

void to_json(nlohmann::json& j, const AnnotationResult& a);
void to_json(nlohmann::json& j, const CorpusStats& s);
void to_json(nlohmann::json& j, const ConfusionCounts& c);
void to_json(nlohmann::json& j, const EvalReport& r);

/// Ranked results with per-item id, image URL, attributes and scores.
nlohmann::json ranked_result_json(const RankedResult& result, std::string_view image_url_prefix = "");

} // namespace chartret
