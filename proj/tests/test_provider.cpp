#include <doctest.h>

#include <random>

#include "chartret/errors.hpp"
#include "chartret/mock_provider.hpp"
#include "chartret/numerics.hpp"
#include "support.hpp"

using namespace chartret;

namespace {

/// Hash-seeded Gaussian recomputed from first principles: SHA-256 of
/// tag, NUL, payload; seed from its first 8 bytes (LE); 53-bit uniforms;
/// Box-Muller cosine branch.
std::vector<double> oracle_gaussian(const std::string& tag, std::span<const std::uint8_t> payload, std::size_t dim) {
    std::vector<std::uint8_t> buf(tag.begin(), tag.end());
    buf.push_back(0);
    buf.insert(buf.end(), payload.begin(), payload.end());
    const auto d = sha256(buf);
    std::uint64_t seed = 0;
    for (int i = 7; i >= 0; --i) seed = (seed << 8) | d[static_cast<std::size_t>(i)];
    std::mt19937_64 eng(seed);
    auto u = [&] { return static_cast<double>(eng() >> 11) / 9007199254740992.0; };
    std::vector<double> v(dim);
    for (auto& x : v) {
        const double u1 = 1.0 - u();
        const double u2 = u();
        x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    return v;
}

std::vector<double> basis(std::size_t dim, std::size_t i) {
    std::vector<double> v(dim, 0.0);
    v[i] = 1.0;
    return v;
}

RasterImage pattern(std::uint8_t seed) {
    RasterImage img(6, 5);
    for (std::uint32_t y = 0; y < 5; ++y) {
        for (std::uint32_t x = 0; x < 6; ++x) {
            img.set_pixel(x, y, {static_cast<std::uint8_t>(seed + x * 7), static_cast<std::uint8_t>(y * 31), seed, 255});
        }
    }
    return img;
}

/// Provider that breaks the contract in configurable ways.
class RogueProvider final : public Provider {
public:
    enum class Fault { none, wrong_dim, zero, nan, bad_label, bad_confidence, mask_size, logit_count };
    explicit RogueProvider(Fault f) : Provider(8), fault_(f) {}

protected:
    std::vector<double> vec() const {
        if (fault_ == Fault::wrong_dim) return std::vector<double>(7, 1.0);
        if (fault_ == Fault::zero) return std::vector<double>(8, 0.0);
        if (fault_ == Fault::nan) return std::vector<double>(8, std::nan(""));
        return std::vector<double>(8, 2.0);
    }
    std::vector<double> do_embed_image(const RasterImage&) const override { return vec(); }
    std::vector<double> do_embed_text(const std::string&) const override { return vec(); }
    std::vector<double> do_zero_shot(const RasterImage&, std::span<const std::string> labels) const override {
        return std::vector<double>(labels.size() + (fault_ == Fault::logit_count ? 1 : 0), 0.0);
    }
    Classification do_classify(const RasterImage&, AttributeKind) const override {
        if (fault_ == Fault::bad_label) return {"barchart", 0.9};
        if (fault_ == Fault::bad_confidence) return {"bar", 1.5};
        return {"bar", 0.9};
    }
    std::vector<double> do_trend_feature(const RasterImage&) const override { return vec(); }
    ForegroundMask do_segment(const RasterImage& img) const override {
        if (fault_ == Fault::mask_size) return ForegroundMask(img.width() + 1, img.height(), true);
        return ForegroundMask(img.width(), img.height(), true);
    }

private:
    Fault fault_;
};

} // namespace

TEST_CASE("mock fallback embeddings follow the hash oracle") {
    const MockProvider mock(64);
    const auto img = pattern(3);
    const auto e = mock.embed_image(img);
    const auto expected = l2_normalize(std::span<const double>(oracle_gaussian("image", canonical_bytes(img), 64)));
    CHECK(e == expected);
    CHECK(mock.embed_image(img) == e);

    const auto t = mock.trend_feature(img);
    CHECK(t == l2_normalize(std::span<const double>(oracle_gaussian("trend", canonical_bytes(img), 64))));
    CHECK(t != e);

    const std::string text = "fancy style";
    const auto te = mock.embed_text("  Fancy Style ");
    CHECK(te == l2_normalize(std::span<const double>(
                    oracle_gaussian("text", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), 64))));
    CHECK(mock.embed_text("fancy style") == te);
    CHECK_THROWS_AS(mock.embed_text("   "), std::invalid_argument);
}

TEST_CASE("embeddings are unit length") {
    const MockProvider mock;
    CHECK(mock.dim() == 512);
    for (std::uint8_t s = 0; s < 20; ++s) {
        const auto e = mock.embed_image(pattern(s));
        double sq = 0.0;
        for (float x : e) sq += static_cast<double>(x) * x;
        CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-6);
    }
}

TEST_CASE("mock fixture lookups") {
    MockFixture fx(4);
    FixtureImage entry;
    entry.embedding = std::vector<double>{0, 3, 0, 4};
    entry.classify[AttributeKind::type] = {"bar", 0.99};
    entry.mask_rle = std::vector<std::uint32_t>{0, 10, 20};
    const auto bar_a = pattern(1);
    fx.add_image("bar_A", bar_a, entry);
    fx.add_text("Fancy Style", {1, 0, 0, 0});
    const MockProvider mock(fx);

    CHECK(mock.embed_image(bar_a) == EmbeddingVector{0, 0.6f, 0, 0.8f});
    CHECK(mock.embed_text("fancy style") == EmbeddingVector{1, 0, 0, 0});
    const auto c = mock.classify_primary(bar_a, AttributeKind::type);
    CHECK(c.label == "bar");
    CHECK(c.confidence == 0.99);
    const auto mask = mock.segment(bar_a);
    CHECK(mask.count() == 10);
    CHECK(mask.to_rle() == std::vector<std::uint32_t>{0, 10, 20});
    CHECK(mock.segment(pattern(2)).count() == 30);
    // fixture without a trend feature falls back to the hash
    CHECK(mock.trend_feature(bar_a) ==
          l2_normalize(std::span<const double>(oracle_gaussian("trend", canonical_bytes(bar_a), 4))));
}

TEST_CASE("unfixtured classification is hash-derived with confidence 0.5") {
    const MockProvider mock(16);
    for (std::uint8_t s = 0; s < 10; ++s) {
        const auto img = pattern(s);
        for (auto kind : all_values<AttributeKind>()) {
            const auto c = mock.classify_primary(img, kind);
            const auto labels = labels_of(kind);
            const std::string tag = "classify:" + std::string(to_string(kind));
            std::vector<std::uint8_t> buf(tag.begin(), tag.end());
            buf.push_back(0);
            const auto bytes = canonical_bytes(img);
            buf.insert(buf.end(), bytes.begin(), bytes.end());
            const auto d = sha256(buf);
            std::uint64_t seed = 0;
            for (int i = 7; i >= 0; --i) seed = (seed << 8) | d[static_cast<std::size_t>(i)];
            std::mt19937_64 eng(seed);
            CHECK(c.label == labels[eng() % labels.size()]);
            CHECK(c.confidence == 0.5);
        }
    }
}

TEST_CASE("fixture validation and JSON round trip") {
    MockFixture fx(3);
    FixtureImage e;
    e.embedding = std::vector<double>{1, 2, 3};
    e.trend_feature = std::vector<double>{0, 0, 1};
    e.classify[AttributeKind::trend] = {"mixed", 0.7};
    fx.add_image("k1", pattern(9), e);
    fx.add_text("increasing trend", {0.5, 0.5, 0});

    CHECK_THROWS_AS(fx.add_image("k1", pattern(10), e), std::invalid_argument);
    CHECK_THROWS_AS(fx.add_image("k2", pattern(9), e), std::invalid_argument);
    FixtureImage bad = e;
    bad.embedding = std::vector<double>{1, 2};
    CHECK_THROWS_AS(fx.add_image("k3", pattern(11), bad), std::invalid_argument);
    CHECK_THROWS_AS(fx.add_text("x", {1, 2}), std::invalid_argument);

    const auto back = MockFixture::from_json_text(fx.to_json_text());
    CHECK(back.to_json_text() == fx.to_json_text());
    CHECK(back.dim() == 3);
    REQUIRE(back.find_image("k1") != nullptr);
    CHECK(back.find_image("k1")->classify.at(AttributeKind::trend).label == "mixed");
    CHECK(back.find_by_digest(image_digest(pattern(9))) != nullptr);
    REQUIRE(back.find_text("increasing trend") != nullptr);

    CHECK_THROWS_AS(MockFixture::from_json_text("{"), std::invalid_argument);
    CHECK_THROWS_AS(MockFixture::from_json_text(R"({"dim": 2, "texts": {"a": [1, 2, 3]}})"), std::invalid_argument);
}

TEST_CASE("fusion") {
    const EmbeddingVector a{1, 0}, b{0, 1}, c{-1, 0};
    CHECK(fuse(a, b) == EmbeddingVector{0.5f, 0.5f});
    CHECK(fuse(a, b) == fuse(b, a));
    CHECK(fuse(a, a) == a);
    const auto z = fuse(a, c);
    CHECK(z == EmbeddingVector{0, 0});
    CHECK_THROWS_AS(cosine_similarity(std::span<const float>(z), std::span<const float>(a)), ZeroNormError);
    CHECK_THROWS_AS(fuse(a, EmbeddingVector{1, 0, 0}), std::invalid_argument);
}

TEST_CASE("zero-shot logits") {
    const std::size_t dim = 8;
    MockFixture fx(dim);
    FixtureImage bar3d;
    bar3d.embedding = basis(dim, 0);
    const auto img = pattern(40);
    fx.add_image("bar3d", img, bar3d);
    fx.add_text("3D style", basis(dim, 0));
    fx.add_text("Flat style", basis(dim, 1));
    fx.add_text("Sketch style", basis(dim, 2));
    const MockProvider mock(fx);

    const std::vector<std::string> labels{"Flat style", "3D style", "Sketch style"};
    const auto z = mock.zero_shot_logits(img, labels);
    REQUIRE(z.logits.size() == 3);
    CHECK(std::max_element(z.logits.begin(), z.logits.end()) - z.logits.begin() == 1);
    CHECK(z.logits[1] == doctest::Approx(kZeroShotLogitScale));

    const std::vector<std::string> sym{"Flat style", "Sketch style"};
    CHECK(softmax_select(mock.zero_shot_logits(img, sym).logits, 0) == doctest::Approx(0.5));

    const std::vector<std::string> dup{"a", "a"};
    CHECK_THROWS_AS(mock.zero_shot_logits(img, dup), std::invalid_argument);
    const std::vector<std::string> one{"a"};
    CHECK_THROWS_AS(mock.zero_shot_logits(img, one), std::invalid_argument);
}

TEST_CASE("contract violations surface as provider errors") {
    using F = RogueProvider::Fault;
    const auto img = pattern(1);
    CHECK_NOTHROW(RogueProvider(F::none).embed_image(img));
    CHECK_THROWS_AS(RogueProvider(F::wrong_dim).embed_image(img), ProviderError);
    CHECK_THROWS_AS(RogueProvider(F::zero).trend_feature(img), ProviderError);
    CHECK_THROWS_AS(RogueProvider(F::nan).embed_text("x"), ProviderError);
    CHECK_THROWS_AS(RogueProvider(F::bad_label).classify_primary(img, AttributeKind::type), ProviderError);
    CHECK_THROWS_AS(RogueProvider(F::bad_confidence).classify_primary(img, AttributeKind::type), ProviderError);
    CHECK_THROWS_AS(RogueProvider(F::mask_size).segment(img), ProviderError);
    const std::vector<std::string> labels{"a", "b"};
    CHECK_THROWS_AS(RogueProvider(F::logit_count).zero_shot_logits(img, labels), ProviderError);
}

TEST_CASE("provider descriptors") {
    ProviderDescriptor remote{ProviderKind::remote, std::nullopt, 512, std::nullopt};
    CHECK_THROWS_AS(remote.validate(), std::invalid_argument);
    remote.endpoint = "http://127.0.0.1:1";
    CHECK_NOTHROW(remote.validate());
    remote.fixture = "f.json";
    CHECK_THROWS_AS(remote.validate(), std::invalid_argument);

    testsupport::TempDir dir("desc");
    MockFixture fx(16);
    fx.add_text("hello", basis(16, 3));
    fx.save(dir / "fx.json");
    const auto p = make_provider({ProviderKind::mock, std::nullopt, 16, (dir / "fx.json").string()});
    CHECK(p->dim() == 16);
    CHECK(p->embed_text("hello") == l2_normalize(std::span<const double>(basis(16, 3))));
    CHECK_THROWS_AS(make_provider({ProviderKind::mock, std::nullopt, 32, (dir / "fx.json").string()}),
                    std::invalid_argument);
    CHECK(make_provider({})->dim() == 512);
}
