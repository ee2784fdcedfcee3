#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chartret/raster.hpp"
#include "chartret/taxonomy.hpp"

namespace chartret {

inline constexpr std::size_t kDefaultEmbeddingDim = 512;

/// Provider-produced feature. Unit norm when returned by a Provider.
using EmbeddingVector = std::vector<float>;

struct ZeroShotResult {
    std::vector<double> logits; ///< aligned with the label list
};

struct Classification {
    std::string label;
    double confidence = 0.0;
};

/// Returns `v / |v|` rounded to float. Throws ZeroNormError / ProviderError
/// on zero or non-finite input.
EmbeddingVector l2_normalize(std::span<const double> v);
EmbeddingVector l2_normalize(std::span<const float> v);

/// Elementwise mean of an image feature and a text feature. Not renormalized.
EmbeddingVector fuse(std::span<const float> image_feature, std::span<const float> text_feature);

/// Lowercased, whitespace-trimmed text used for keying prompts.
std::string normalize_text(std::string_view text);

/// Supplier of every learned function the engine needs. Public calls check
/// the contract (dimensions, unit norm, label closure) and throw
/// ProviderError on violations, so every backend behaves the same.
class Provider {
public:
    virtual ~Provider() = default;

    std::size_t dim() const noexcept { return dim_; }

    EmbeddingVector embed_image(const RasterImage& img) const;
    /// Throws std::invalid_argument on blank text.
    EmbeddingVector embed_text(std::string_view prompt) const;
    /// Needs at least 2 distinct labels.
    ZeroShotResult zero_shot_logits(const RasterImage& img, std::span<const std::string> labels) const;
    Classification classify_primary(const RasterImage& img, AttributeKind kind) const;
    EmbeddingVector trend_feature(const RasterImage& img) const;
    ForegroundMask segment(const RasterImage& img) const;

protected:
    explicit Provider(std::size_t dim);

    virtual std::vector<double> do_embed_image(const RasterImage& img) const = 0;
    virtual std::vector<double> do_embed_text(const std::string& normalized_text) const = 0;
    virtual std::vector<double> do_zero_shot(const RasterImage& img,
                                             std::span<const std::string> labels) const = 0;
    virtual Classification do_classify(const RasterImage& img, AttributeKind kind) const = 0;
    virtual std::vector<double> do_trend_feature(const RasterImage& img) const = 0;
    virtual ForegroundMask do_segment(const RasterImage& img) const = 0;

private:
    EmbeddingVector checked_embedding(std::vector<double> raw, std::string_view what) const;

    std::size_t dim_;
};

enum class ProviderKind { mock, remote };

template <>
struct EnumNames<ProviderKind> {
    static constexpr std::string_view what = "provider kind";
    static constexpr std::array<std::string_view, 2> names = {"mock", "remote"};
};

struct ProviderDescriptor {
    ProviderKind kind = ProviderKind::mock;
    std::optional<std::string> endpoint; ///< required for remote
    std::size_t dim = kDefaultEmbeddingDim;
    std::optional<std::string> fixture; ///< mock only

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

/// Builds a mock provider in-process or an HTTP client for a remote one.
/// Defined in the networking library.
std::unique_ptr<Provider> make_provider(const ProviderDescriptor& descriptor);

} // namespace chartret
