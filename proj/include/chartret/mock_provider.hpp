#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chartret/embedding.hpp"

namespace chartret {

/// Fixture record for one image, matched by the digest of its pixels.
struct FixtureImage {
    std::string digest; ///< image_digest() of the image
    std::optional<std::vector<double>> embedding;
    std::optional<std::vector<double>> trend_feature;
    std::map<AttributeKind, Classification> classify;
    std::optional<std::vector<std::uint32_t>> mask_rle;
};

/// Lookup table behind the mock provider. Stored as JSON:
///
///   { "dim": 512,
///     "images": { "<key>": { "digest": "<sha256 hex>", "embedding": [...],
///                            "trend_feature": [...],
///                            "classify": { "type": {"label": "bar", "confidence": 0.99} },
///                            "mask_rle": [...] } },
///     "texts": { "<prompt>": [...] } }
///
/// Text keys are normalized (trimmed, lowercased) on insertion.
class MockFixture {
public:
    MockFixture() = default;
    explicit MockFixture(std::size_t dim) : dim_(dim) {}

    static MockFixture from_json_text(std::string_view text);
    static MockFixture load(const std::filesystem::path& path);
    std::string to_json_text() const;
    void save(const std::filesystem::path& path) const;

    std::size_t dim() const noexcept { return dim_; }

    /// Registers `entry` under `key`, stamping it with the digest of `img`.
    void add_image(const std::string& key, const RasterImage& img, FixtureImage entry);
    void add_image(const std::string& key, FixtureImage entry);
    void add_text(std::string_view text, std::vector<double> vector);

    const FixtureImage* find_image(std::string_view key) const;
    const FixtureImage* find_by_digest(std::string_view digest) const;
    const std::vector<double>* find_text(std::string_view normalized_text) const;

    const std::map<std::string, FixtureImage>& images() const noexcept { return images_; }
    const std::map<std::string, std::vector<double>>& texts() const noexcept { return texts_; }

private:
    void check_vector(const std::vector<double>& v, std::string_view what) const;

    std::size_t dim_ = 0;
    std::map<std::string, FixtureImage> images_;
    std::map<std::string, std::string> key_by_digest_;
    std::map<std::string, std::vector<double>> texts_;
};

/// SHA-256 over `tag`, a zero byte, then `bytes`. Every hash-derived mock
/// output is seeded from one of these digests.
std::array<std::uint8_t, 32> tagged_digest(std::string_view tag, std::span<const std::uint8_t> bytes);

/// Standard-normal vector of length `dim` drawn from Rng::from_digest(tagged_digest(...)).
std::vector<double> hash_gaussian(std::string_view tag, std::span<const std::uint8_t> bytes, std::size_t dim);

/// Zero-shot logits of the mock are this multiple of the image/text cosine.
inline constexpr double kZeroShotLogitScale = 100.0;

/// Deterministic provider: fixture lookups first, hash-seeded fallbacks
/// otherwise. Stateless after construction and safe to share across threads.
class MockProvider final : public Provider {
public:
    explicit MockProvider(std::size_t dim = kDefaultEmbeddingDim);
    explicit MockProvider(MockFixture fixture);

    const MockFixture& fixture() const noexcept { return fixture_; }

protected:
    std::vector<double> do_embed_image(const RasterImage& img) const override;
    std::vector<double> do_embed_text(const std::string& normalized_text) const override;
    std::vector<double> do_zero_shot(const RasterImage& img, std::span<const std::string> labels) const override;
    Classification do_classify(const RasterImage& img, AttributeKind kind) const override;
    std::vector<double> do_trend_feature(const RasterImage& img) const override;
    ForegroundMask do_segment(const RasterImage& img) const override;

private:
    const FixtureImage* lookup(const RasterImage& img) const;

    MockFixture fixture_;
};

} // namespace chartret
