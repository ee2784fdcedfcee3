#include "chartret/harness.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "chartret/errors.hpp"

namespace chartret {

namespace fs = std::filesystem;

namespace {

constexpr std::array<AttributeKind, 4> kEvalKinds = {AttributeKind::type, AttributeKind::trend,
                                                     AttributeKind::layout, AttributeKind::color};

} // namespace

std::vector<LabeledQuery> load_labeled_queries(const fs::path& labels_csv, const fs::path& images_dir,
                                               const Taxonomy& taxonomy) {
    std::vector<LabeledQuery> out;
    for (auto& row : read_labels_csv(labels_csv, taxonomy)) {
        fs::path found;
        for (const char* ext : {".png", ".jpg", ".jpeg"}) {
            auto candidate = images_dir / (row.id + ext);
            if (fs::exists(candidate)) {
                found = candidate;
                break;
            }
        }
        if (found.empty()) throw std::invalid_argument("no image for query '" + row.id + "' in " + images_dir.string());
        out.push_back({row.id, load_image(found), std::move(row.attributes)});
    }
    return out;
}

EvalReport evaluate_retrieval(const Retriever& retriever, const CorpusSnapshot& snapshot,
                              std::span<const LabeledQuery> queries, const EvalOptions& options) {
    if (options.k_values.empty()) throw std::invalid_argument("evaluate_retrieval: no K values");
    for (auto k : options.k_values) {
        if (k == 0) throw std::invalid_argument("evaluate_retrieval: K must be positive");
    }
    const std::size_t max_k = *std::max_element(options.k_values.begin(), options.k_values.end());

    // Corpus charts per (kind, label), for the recall denominator.
    std::map<AttributeKind, std::unordered_map<std::string, std::size_t>> relevant;
    for (const auto& r : snapshot.records()) {
        for (auto kind : kEvalKinds) {
            if (auto label = r.attributes.label(kind)) ++relevant[kind][std::string(*label)];
        }
    }

    EvalReport report;
    report.protocol = std::string(kRetrievalProtocol);
    report.corpus = options.corpus_descriptor;
    report.provider = options.provider_descriptor;
    report.k_values = options.k_values;
    std::sort(report.k_values.begin(), report.k_values.end());
    report.k_values.erase(std::unique(report.k_values.begin(), report.k_values.end()), report.k_values.end());

    std::map<AttributeKind, std::map<std::size_t, ConfusionCounts>> totals;
    for (const auto& query : queries) {
        RetrievalRequest request;
        request.query = query.image;
        request.k = max_k;
        const auto ranked = retriever.retrieve(snapshot, request, options.weights);

        QueryEval qe;
        qe.id = query.id;
        for (const auto& item : ranked.items) qe.ranked_ids.push_back(item.record.id);

        for (auto kind : kEvalKinds) {
            const auto truth = query.truth.label(kind);
            if (!truth) continue;
            const auto rel_it = relevant[kind].find(std::string(*truth));
            const std::size_t n_relevant = rel_it == relevant[kind].end() ? 0 : rel_it->second;
            for (auto k : report.k_values) {
                const std::size_t retrieved = std::min(k, ranked.items.size());
                std::size_t tp = 0;
                for (std::size_t i = 0; i < retrieved; ++i) {
                    if (ranked.items[i].record.attributes.label(kind) == truth) ++tp;
                }
                ConfusionCounts c;
                c.tp = tp;
                c.fp = retrieved - tp;
                c.fn = std::min(k, n_relevant) - tp;
                qe.counts[kind][k] = c;
                totals[kind][k] += c;
            }
        }
        report.queries.push_back(std::move(qe));
    }

    for (auto kind : kEvalKinds) {
        for (auto k : report.k_values) {
            F1Cell cell;
            cell.counts = totals[kind][k];
            try {
                cell.f1 = f1_score(cell.counts);
            } catch (const UndefinedF1Error&) {
                cell.undefined = true;
                cell.f1 = 0.0;
                report.warnings.push_back("F1 for " + std::string(to_string(kind)) + "@" + std::to_string(k) +
                                          " is undefined (no retrieved or relevant charts); reported as 0");
            }
            report.f1[kind][k] = cell;
        }
    }
    return report;
}

std::map<AttributeKind, AccuracyCell> annotation_accuracy(std::span<const AttributeSet> predicted,
                                                          std::span<const AttributeSet> truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("annotation_accuracy: size mismatch");
    std::map<AttributeKind, AccuracyCell> out;
    for (auto kind : kEvalKinds) out[kind];
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (auto kind : kEvalKinds) {
            const auto expected = truth[i].label(kind);
            if (!expected) continue;
            auto& cell = out[kind];
            ++cell.total;
            if (predicted[i].label(kind) == expected) ++cell.correct;
        }
    }
    for (auto& [kind, cell] : out) {
        cell.accuracy = cell.total == 0 ? 0.0 : static_cast<double>(cell.correct) / static_cast<double>(cell.total);
    }
    return out;
}

std::map<AttributeKind, AccuracyCell> evaluate_annotation(const Annotator& annotator,
                                                          std::span<const LabeledQuery> queries) {
    std::vector<AttributeSet> predicted;
    std::vector<AttributeSet> truth;
    for (const auto& q : queries) {
        predicted.push_back(annotator.annotate(q.image).attributes);
        truth.push_back(q.truth);
    }
    return annotation_accuracy(predicted, truth);
}

std::string format_eval_table(const EvalReport& report) {
    std::ostringstream out;
    out << "# " << report.protocol << '\n';
    if (!report.corpus.empty()) out << "# corpus: " << report.corpus << '\n';
    if (!report.provider.empty()) out << "# provider: " << report.provider << '\n';
    out << "# queries: " << report.queries.size() << "\n\n";
    out << std::left << std::setw(8) << "Top-K";
    for (auto kind : kEvalKinds) out << std::right << std::setw(10) << to_string(kind);
    out << '\n';
    out << std::fixed << std::setprecision(4);
    for (auto k : report.k_values) {
        out << std::left << std::setw(8) << k;
        for (auto kind : kEvalKinds) {
            auto it = report.f1.find(kind);
            double f1 = it == report.f1.end() ? 0.0 : it->second.at(k).f1;
            out << std::right << std::setw(10) << f1;
        }
        out << '\n';
    }
    if (report.annotation) {
        out << "\nannotation accuracy:";
        for (const auto& [kind, cell] : *report.annotation) {
            out << ' ' << to_string(kind) << '=' << cell.accuracy << " (" << cell.correct << '/' << cell.total << ')';
        }
        out << '\n';
    }
    for (const auto& w : report.warnings) out << "warning: " << w << '\n';
    return out.str();
}

std::vector<std::size_t> parse_k_list(std::string_view text) {
    std::vector<std::size_t> out;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) {
        std::size_t pos = 0;
        unsigned long long k = 0;
        try {
            k = std::stoull(item, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad K value '" + item + "'");
        }
        if (pos != item.size() || k == 0) throw std::invalid_argument("bad K value '" + item + "'");
        out.push_back(static_cast<std::size_t>(k));
    }
    if (out.empty()) throw std::invalid_argument("empty K list");
    return out;
}

} // namespace chartret
