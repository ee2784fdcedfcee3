#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

#include "chartret/colorfeat.hpp"
#include "chartret/embedding.hpp"
#include "chartret/taxonomy.hpp"

namespace chartret {

struct AnnotationResult {
    AttributeSet attributes;
    std::map<AttributeKind, double> confidence;
    /// Per extended classifier: softmax probability of the chosen label.
    std::map<std::string, double> extended_confidence;
    ForegroundMask mask;
    Palette palette;
};

/// Label with the largest logit; the lowest index wins ties.
const std::string& argmax_label(const ZeroShotResult& z, std::span<const std::string> labels);

/// Stage 1: segment the chart, classify its type, then only the attributes
/// applicable to that type, extract the palette and run the user's extended
/// classifiers. Provider failures surface as StageError naming the stage.
class Annotator {
public:
    Annotator(const Provider& provider, const Taxonomy& taxonomy = Taxonomy::defaults())
        : provider_(provider), taxonomy_(taxonomy) {}

    AnnotationResult annotate(const RasterImage& img,
                              std::span<const ExtendedClassifierSpec> extended = {}) const;

    const Taxonomy& taxonomy() const noexcept { return taxonomy_; }

private:
    const Provider& provider_;
    const Taxonomy& taxonomy_;
};

} // namespace chartret
