#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chartret/annotation.hpp"
#include "chartret/corpus.hpp"
#include "chartret/numerics.hpp"
#include "chartret/retrieval.hpp"

namespace chartret {

/// A query chart with ground-truth primary attributes.
struct LabeledQuery {
    std::string id;
    RasterImage image;
    AttributeSet truth;
};

/// `labels_csv` rows; each image is `<images_dir>/<id>.png|.jpg|.jpeg`.
std::vector<LabeledQuery> load_labeled_queries(const std::filesystem::path& labels_csv,
                                               const std::filesystem::path& images_dir,
                                               const Taxonomy& taxonomy = Taxonomy::defaults());

struct F1Cell {
    ConfusionCounts counts;
    double f1 = 0.0;
    bool undefined = false; ///< 2tp + fp + fn was 0; f1 reported as 0
};

struct QueryEval {
    std::string id;
    std::vector<std::string> ranked_ids; ///< top max(K) ids
    /// kind -> K -> counts; kinds the query lacks are omitted
    std::map<AttributeKind, std::map<std::size_t, ConfusionCounts>> counts;
};

struct AccuracyCell {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0.0; ///< correct / total, 0 when total is 0
};

/// Top-K F1 per primary attribute and K, micro-averaged over queries.
struct EvalReport {
    std::string protocol;
    std::string corpus;   ///< corpus descriptor
    std::string provider; ///< provider descriptor
    std::vector<std::size_t> k_values;
    std::map<AttributeKind, std::map<std::size_t, F1Cell>> f1;
    std::vector<QueryEval> queries;
    std::optional<std::map<AttributeKind, AccuracyCell>> annotation;
    std::vector<std::string> warnings;
};

inline constexpr std::string_view kRetrievalProtocol =
    "Each query is retrieved with no intent attributes and no prompt. For every attribute the query "
    "carries and every K: tp = top-K results sharing the query's label, fp = retrieved - tp, "
    "fn = min(K, corpus charts sharing the label) - tp. Counts are summed over queries, then "
    "F1 = 2tp / (2tp + fp + fn).";

struct EvalOptions {
    std::vector<std::size_t> k_values = {3, 5, 10};
    ScoringWeights weights;
    std::string corpus_descriptor;
    std::string provider_descriptor;
};

EvalReport evaluate_retrieval(const Retriever& retriever, const CorpusSnapshot& snapshot,
                              std::span<const LabeledQuery> queries, const EvalOptions& options = {});

/// Fraction of queries whose annotated primary attribute equals the truth,
/// per kind, over queries whose truth carries that kind.
std::map<AttributeKind, AccuracyCell> evaluate_annotation(const Annotator& annotator,
                                                          std::span<const LabeledQuery> queries);

/// Accuracy over already-annotated pairs (predicted, truth).
std::map<AttributeKind, AccuracyCell> annotation_accuracy(std::span<const AttributeSet> predicted,
                                                          std::span<const AttributeSet> truth);

std::string format_eval_table(const EvalReport& report);

/// Parses "3,5,10". Throws std::invalid_argument on empty or zero entries.
std::vector<std::size_t> parse_k_list(std::string_view text);

} // namespace chartret
