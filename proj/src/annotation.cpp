#include "chartret/annotation.hpp"

#include <set>
#include <stdexcept>
#include <utility>

#include "chartret/errors.hpp"
#include "chartret/numerics.hpp"

namespace chartret {

const std::string& argmax_label(const ZeroShotResult& z, std::span<const std::string> labels) {
    if (labels.empty() || z.logits.empty()) throw std::invalid_argument("argmax_label: no labels");
    if (labels.size() != z.logits.size()) {
        throw std::invalid_argument("argmax_label: " + std::to_string(z.logits.size()) + " logits for " +
                                    std::to_string(labels.size()) + " labels");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < z.logits.size(); ++i) {
        if (z.logits[i] > z.logits[best]) best = i;
    }
    return labels[best];
}

namespace {

template <class F>
auto run_stage(std::string_view stage, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const ProviderError& e) {
        throw StageError(std::string(stage), e.what());
    }
}

} // namespace

AnnotationResult Annotator::annotate(const RasterImage& img, std::span<const ExtendedClassifierSpec> extended) const {
    std::set<std::string_view> names;
    for (const auto& spec : extended) {
        spec.validate();
        if (!names.insert(spec.name).second) {
            throw std::invalid_argument("extended classifier '" + spec.name + "' given twice");
        }
    }

    auto mask = run_stage("segment", [&] { return provider_.segment(img); });

    AnnotationResult result{{}, {}, {}, std::move(mask), {}};
    auto classify = [&](AttributeKind kind) {
        auto c = run_stage("classify:" + std::string(to_string(kind)),
                           [&] { return provider_.classify_primary(img, kind); });
        result.attributes.set_label(kind, c.label);
        result.confidence[kind] = c.confidence;
    };

    classify(AttributeKind::type);
    const auto applicable = taxonomy_.applicable_attributes(result.attributes.type);
    for (auto kind : {AttributeKind::color, AttributeKind::trend, AttributeKind::layout}) {
        if (applicable.contains(kind)) classify(kind);
    }

    try {
        result.palette = extract_palette(img, result.mask);
    } catch (const std::exception& e) {
        throw StageError("palette", e.what());
    }

    for (const auto& spec : extended) {
        auto z = run_stage("zero_shot:" + spec.name, [&] { return provider_.zero_shot_logits(img, spec.labels); });
        const auto& label = argmax_label(z, spec.labels);
        const auto index = static_cast<std::size_t>(&label - spec.labels.data());
        result.attributes.extended[spec.name] = label;
        result.extended_confidence[spec.name] = softmax_select(z.logits, index);
    }
    return result;
}

} // namespace chartret
