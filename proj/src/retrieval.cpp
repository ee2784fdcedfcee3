#include "chartret/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "chartret/errors.hpp"
#include "chartret/numerics.hpp"

namespace chartret {

void RetrievalRequest::validate() const {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    if (prompt && normalize_text(*prompt).empty()) throw std::invalid_argument("intent prompt is blank");
    if (extended) extended->validate();
}

double overall_score(double s_global, double s_intent, double s_match, const ScoringWeights& weights) {
    return s_global * std::exp(weights.nu * s_intent + weights.mu * s_match);
}

double intent_score(std::optional<double> s_trend, std::optional<double> s_color, std::optional<double> s_extended,
                    IntentAggregation aggregation) {
    double sum = 0.0;
    int present = 0;
    for (const auto& s : {s_trend, s_color, s_extended}) {
        if (s) {
            sum += *s;
            ++present;
        }
    }
    if (present == 0) return 0.0;
    return aggregation == IntentAggregation::mean ? sum / present : sum;
}

std::vector<const ChartRecord*> filter_candidates(const CorpusSnapshot& snapshot, const AttributeSelection& sel) {
    std::vector<const ChartRecord*> out;
    for (const auto& r : snapshot.records()) {
        if (attribute_match(r.attributes, sel)) out.push_back(&r);
    }
    return out;
}

ScoreBreakdown score_candidate(const QueryFeatures& query, const ChartRecord& candidate, const RetrievalRequest& req,
                               const ScoringWeights& weights, const ZeroShotResult* candidate_logits) {
    ScoreBreakdown s;
    s.s_global = to_unit_interval(cosine_similarity(query.image, candidate.embedding));

    if (req.intent.trend) {
        if (!query.trend) throw std::invalid_argument("trend is selected but the query has no trend feature");
        // Precomputed records may lack a trend feature; they simply get no trend term.
        if (candidate.trend_feature) {
            s.s_trend = to_unit_interval(cosine_similarity(*query.trend, *candidate.trend_feature));
        }
    }
    if (req.intent.color) {
        if (!query.color) throw std::invalid_argument("color is selected but the query has no color vector");
        s.s_color = color_similarity(*query.color, candidate.color_vector);
    }
    if (req.extended) {
        if (!candidate_logits) throw std::invalid_argument("extended classifier requires candidate logits");
        s.s_extended = softmax_select(candidate_logits->logits, req.extended->selected_index);
    }
    s.s_intent = intent_score(s.s_trend, s.s_color, s.s_extended, weights.aggregation);

    const auto& matcher = query.fused ? *query.fused : query.image;
    s.s_match = to_unit_interval(cosine_similarity(matcher, candidate.embedding));
    s.total = overall_score(s.s_global, s.s_intent, s.s_match, weights);
    return s;
}

RasterImage load_record_image(const CorpusSnapshot& snapshot, const ChartRecord& record) {
    return load_image(snapshot.resolve_image(record));
}

Retriever::Retriever(const Provider& provider, RetrieverOptions options)
    : provider_(provider), options_(std::move(options)) {
    if (!options_.image_loader) options_.image_loader = load_record_image;
}

QueryFeatures Retriever::prepare_query_features(const RetrievalRequest& req) const {
    req.validate();
    QueryFeatures q;
    q.image = provider_.embed_image(req.query);
    if (req.prompt) q.fused = fuse(q.image, provider_.embed_text(*req.prompt));
    if (req.intent.color) q.color = histogram_vector(req.query, provider_.segment(req.query));
    if (req.intent.trend) q.trend = provider_.trend_feature(req.query);
    return q;
}

RankedResult Retriever::retrieve(const CorpusSnapshot& snapshot, const RetrievalRequest& req,
                                 const ScoringWeights& weights) const {
    return retrieve(snapshot, req, prepare_query_features(req), weights);
}

RankedResult Retriever::retrieve(const CorpusSnapshot& snapshot, const RetrievalRequest& req,
                                 const QueryFeatures& query, const ScoringWeights& weights) const {
    req.validate();
    if (query.image.size() != snapshot.dim()) {
        throw std::invalid_argument("query feature dim " + std::to_string(query.image.size()) +
                                    " does not match corpus dim " + std::to_string(snapshot.dim()));
    }
    const auto candidates = filter_candidates(snapshot, req.intent);

    RankedResult result;
    result.candidates = candidates.size();
    if (candidates.empty()) return result;

    std::vector<ScoreBreakdown> scores(candidates.size());
    auto score_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& cand = *candidates[i];
            std::optional<ZeroShotResult> logits;
            if (req.extended) {
                logits = provider_.zero_shot_logits(options_.image_loader(snapshot, cand), req.extended->labels);
            }
            scores[i] = score_candidate(query, cand, req, weights, logits ? &*logits : nullptr);
        }
    };

    std::size_t threads = options_.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options_.threads;
    threads = std::min(threads, candidates.size());
    if (threads <= 1) {
        score_range(0, candidates.size());
    } else {
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> workers;
        const std::size_t chunk = (candidates.size() + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(candidates.size(), begin + chunk);
            workers.emplace_back([&, t, begin, end] {
                try {
                    score_range(begin, end);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a].total != scores[b].total) return scores[a].total > scores[b].total;
        return candidates[a]->id < candidates[b]->id;
    };
    const std::size_t keep = std::min(req.k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), better);

    result.items.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        result.items.push_back({*candidates[order[i]], scores[order[i]]});
    }
    return result;
}

} // namespace chartret
