#include "chartret/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>

#include "chartret/errors.hpp"

namespace chartret {

namespace {

template <class T>
EmbeddingVector normalize_impl(std::span<const T> v) {
    if (v.empty()) throw std::invalid_argument("cannot normalize an empty vector");
    double sq = 0.0;
    for (T x : v) {
        if (!std::isfinite(static_cast<double>(x))) throw ProviderError("embedding has non-finite values");
        sq += static_cast<double>(x) * static_cast<double>(x);
    }
    if (sq == 0.0) throw ZeroNormError("cannot normalize a zero vector");
    const double norm = std::sqrt(sq);
    EmbeddingVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
    return out;
}

} // namespace

EmbeddingVector l2_normalize(std::span<const double> v) { return normalize_impl(v); }
EmbeddingVector l2_normalize(std::span<const float> v) { return normalize_impl(v); }

EmbeddingVector fuse(std::span<const float> image_feature, std::span<const float> text_feature) {
    if (image_feature.size() != text_feature.size()) {
        throw std::invalid_argument("fuse: dimension mismatch (" + std::to_string(image_feature.size()) +
                                    " vs " + std::to_string(text_feature.size()) + ")");
    }
    EmbeddingVector out(image_feature.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<float>((static_cast<double>(image_feature[i]) + text_feature[i]) / 2.0);
    }
    return out;
}

std::string normalize_text(std::string_view text) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    auto first = std::find_if_not(text.begin(), text.end(), is_space);
    auto last = std::find_if_not(text.rbegin(), text.rend(), is_space).base();
    std::string out;
    if (first < last) out.assign(first, last);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

Provider::Provider(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("provider dimension must be positive");
}

EmbeddingVector Provider::checked_embedding(std::vector<double> raw, std::string_view what) const {
    if (raw.size() != dim_) {
        throw ProviderError(std::string(what) + ": provider returned dimension " +
                            std::to_string(raw.size()) + ", session expects " + std::to_string(dim_));
    }
    try {
        return l2_normalize(std::span<const double>(raw));
    } catch (const ZeroNormError&) {
        throw ProviderError(std::string(what) + ": provider returned a zero vector");
    }
}

EmbeddingVector Provider::embed_image(const RasterImage& img) const {
    return checked_embedding(do_embed_image(img), "embed_image");
}

EmbeddingVector Provider::embed_text(std::string_view prompt) const {
    auto key = normalize_text(prompt);
    if (key.empty()) throw std::invalid_argument("embed_text: prompt is empty");
    return checked_embedding(do_embed_text(key), "embed_text");
}

ZeroShotResult Provider::zero_shot_logits(const RasterImage& img, std::span<const std::string> labels) const {
    if (labels.size() < 2) throw std::invalid_argument("zero_shot_logits: need at least 2 labels");
    std::set<std::string_view> seen;
    for (const auto& l : labels) {
        if (l.empty()) throw std::invalid_argument("zero_shot_logits: empty label");
        if (!seen.insert(l).second) throw std::invalid_argument("zero_shot_logits: duplicate label '" + l + "'");
    }
    ZeroShotResult result{do_zero_shot(img, labels)};
    if (result.logits.size() != labels.size()) {
        throw ProviderError("zero_shot_logits: provider returned " + std::to_string(result.logits.size()) +
                            " logits for " + std::to_string(labels.size()) + " labels");
    }
    for (double y : result.logits) {
        if (!std::isfinite(y)) throw ProviderError("zero_shot_logits: non-finite logit");
    }
    return result;
}

Classification Provider::classify_primary(const RasterImage& img, AttributeKind kind) const {
    auto result = do_classify(img, kind);
    const auto labels = labels_of(kind);
    if (std::find(labels.begin(), labels.end(), result.label) == labels.end()) {
        throw ProviderError("classify " + std::string(to_string(kind)) + ": label '" + result.label +
                            "' is not in the taxonomy");
    }
    if (!(result.confidence >= 0.0 && result.confidence <= 1.0)) {
        throw ProviderError("classify " + std::string(to_string(kind)) + ": confidence outside [0, 1]");
    }
    return result;
}

EmbeddingVector Provider::trend_feature(const RasterImage& img) const {
    return checked_embedding(do_trend_feature(img), "trend_feature");
}

ForegroundMask Provider::segment(const RasterImage& img) const {
    auto mask = do_segment(img);
    if (!mask.matches(img)) {
        throw ProviderError("segment: mask is " + std::to_string(mask.width()) + "x" +
                            std::to_string(mask.height()) + ", image is " + std::to_string(img.width()) +
                            "x" + std::to_string(img.height()));
    }
    return mask;
}

void ProviderDescriptor::validate() const {
    if (dim == 0) throw std::invalid_argument("provider dim must be positive");
    if (kind == ProviderKind::remote) {
        if (!endpoint || endpoint->empty()) throw std::invalid_argument("remote provider requires an endpoint");
        if (fixture) throw std::invalid_argument("fixtures apply to the mock provider only");
    }
}

} // namespace chartret
