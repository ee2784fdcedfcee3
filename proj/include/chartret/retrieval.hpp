#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chartret/colorfeat.hpp"
#include "chartret/corpus.hpp"
#include "chartret/embedding.hpp"
#include "chartret/taxonomy.hpp"

namespace chartret {

/// How the trend, color and extended sub-scores combine into the intent score.
enum class IntentAggregation {
    mean, ///< mean of the components present; stays in [0, 1]
    sum,  ///< literal sum of the components present
};

template <>
struct EnumNames<IntentAggregation> {
    static constexpr std::string_view what = "intent aggregation";
    static constexpr std::array<std::string_view, 2> names = {"mean", "sum"};
};

struct ScoringWeights {
    double nu = 1.0; ///< weight of the intent-attribute score
    double mu = 5.0; ///< weight of the feature-matching score
    IntentAggregation aggregation = IntentAggregation::mean;
};

struct RetrievalRequest {
    RasterImage query{1, 1};
    AttributeSelection intent;
    std::optional<std::string> prompt;
    std::optional<ExtendedClassifierSpec> extended;
    std::size_t k = 5;

    /// Throws std::invalid_argument when k == 0, the prompt is blank or the
    /// extended spec is malformed.
    void validate() const;
};

/// Per-candidate score components. Sub-scores the request did not activate
/// are empty.
struct ScoreBreakdown {
    double s_global = 0.0; ///< query vs candidate image feature
    std::optional<double> s_trend;
    std::optional<double> s_color;
    std::optional<double> s_extended;
    double s_intent = 0.0; ///< aggregate of trend/color/extended, 0 if none
    double s_match = 0.0;  ///< fused (or image-only) query feature vs candidate
    double total = 0.0;

    friend bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

struct RankedItem {
    ChartRecord record;
    ScoreBreakdown scores;
};

/// Descending by total, ties by ascending id.
struct RankedResult {
    std::vector<RankedItem> items;
    std::size_t candidates = 0; ///< records that passed the filter
};

/// s_global * exp(nu * s_intent + mu * s_match).
double overall_score(double s_global, double s_intent, double s_match, const ScoringWeights& weights);

/// Combines present intent components; 0 when there are none.
double intent_score(std::optional<double> s_trend, std::optional<double> s_color, std::optional<double> s_extended,
                    IntentAggregation aggregation);

/// Records matching the selection, in corpus order.
std::vector<const ChartRecord*> filter_candidates(const CorpusSnapshot& snapshot, const AttributeSelection& sel);

struct QueryFeatures {
    EmbeddingVector image;                ///< image feature of the query
    std::optional<EmbeddingVector> fused; ///< present when the request has a prompt
    std::optional<ColorVector> color;     ///< present when color is selected
    std::optional<EmbeddingVector> trend; ///< present when trend is selected
};

/// Scores one candidate. `candidate_logits` must be supplied exactly when the
/// request carries an extended classifier. Throws ZeroNormError on zero-norm
/// features.
ScoreBreakdown score_candidate(const QueryFeatures& query, const ChartRecord& candidate, const RetrievalRequest& req,
                               const ScoringWeights& weights, const ZeroShotResult* candidate_logits = nullptr);

/// Loads the image of a candidate (for zero-shot scoring at query time).
using ImageLoader = std::function<RasterImage(const CorpusSnapshot&, const ChartRecord&)>;

/// Reads the record's image_ref from disk, relative to the snapshot directory.
RasterImage load_record_image(const CorpusSnapshot& snapshot, const ChartRecord& record);

struct RetrieverOptions {
    /// Worker threads for candidate scoring; 0 picks hardware concurrency.
    std::size_t threads = 1;
    ImageLoader image_loader = load_record_image;
};

/// Stage 2: filter the corpus by the intent attributes, score every
/// survivor and return the top k.
class Retriever {
public:
    explicit Retriever(const Provider& provider, RetrieverOptions options = {});

    QueryFeatures prepare_query_features(const RetrievalRequest& req) const;

    RankedResult retrieve(const CorpusSnapshot& snapshot, const RetrievalRequest& req,
                          const ScoringWeights& weights = {}) const;

    /// Same as retrieve() with query features computed by the caller.
    RankedResult retrieve(const CorpusSnapshot& snapshot, const RetrievalRequest& req, const QueryFeatures& query,
                          const ScoringWeights& weights) const;

private:
    const Provider& provider_;
    RetrieverOptions options_;
};

} // namespace chartret
