#include <doctest.h>

#include "chartret/annotation.hpp"
#include "chartret/errors.hpp"
#include "chartret/mock_provider.hpp"
#include "support.hpp"

using namespace chartret;

namespace {

constexpr std::size_t kDim = 8;

std::vector<double> basis(std::size_t i) {
    std::vector<double> v(kDim, 0.0);
    v[i] = 1.0;
    return v;
}

RasterImage bar_image() { return testsupport::two_color_image(10, 10, {31, 119, 180, 255}, {255, 255, 255, 255}, 60); }
RasterImage heatmap_image() { return testsupport::two_color_image(10, 10, {200, 80, 20, 255}, {250, 220, 150, 255}, 50); }

MockProvider fixture_provider() {
    MockFixture fx(kDim);
    FixtureImage bar;
    bar.embedding = basis(0);
    bar.classify[AttributeKind::type] = {"bar", 0.99};
    bar.classify[AttributeKind::color] = {"categorical", 0.95};
    bar.classify[AttributeKind::trend] = {"increasing", 0.9};
    bar.classify[AttributeKind::layout] = {"horizontal", 0.97};
    fx.add_image("bar_A", bar_image(), bar);

    FixtureImage heat;
    heat.classify[AttributeKind::type] = {"heatmap", 0.98};
    heat.classify[AttributeKind::color] = {"sequential", 0.9};
    // answers the annotator must never ask for
    heat.classify[AttributeKind::trend] = {"mixed", 0.9};
    heat.classify[AttributeKind::layout] = {"other", 0.9};
    fx.add_image("heat", heatmap_image(), heat);

    fx.add_text("3D style", basis(0));
    fx.add_text("Flat style", basis(1));
    fx.add_text("Sketch style", basis(2));
    return MockProvider(std::move(fx));
}

class FailingProvider final : public Provider {
public:
    explicit FailingProvider(std::string fail_at) : Provider(4), fail_at_(std::move(fail_at)) {}

protected:
    std::vector<double> do_embed_image(const RasterImage&) const override { return {1, 0, 0, 0}; }
    std::vector<double> do_embed_text(const std::string&) const override { return {1, 0, 0, 0}; }
    std::vector<double> do_zero_shot(const RasterImage&, std::span<const std::string> labels) const override {
        if (fail_at_ == "zero_shot") throw ProviderError("backend down");
        return std::vector<double>(labels.size(), 0.0);
    }
    Classification do_classify(const RasterImage&, AttributeKind kind) const override {
        if (fail_at_ == "classify:" + std::string(to_string(kind))) throw ProviderError("backend down");
        if (kind == AttributeKind::type) return {"bar", 1.0};
        return {std::string(labels_of(kind)[0]), 1.0};
    }
    std::vector<double> do_trend_feature(const RasterImage&) const override { return {1, 0, 0, 0}; }
    ForegroundMask do_segment(const RasterImage& img) const override {
        if (fail_at_ == "segment") throw ProviderError("backend down");
        return ForegroundMask(img.width(), img.height(), fail_at_ != "palette");
    }

private:
    std::string fail_at_;
};

} // namespace

TEST_CASE("annotating the walkthrough bar chart") {
    const auto mock = fixture_provider();
    const Annotator annotator(mock);
    const auto r = annotator.annotate(bar_image());
    CHECK(r.attributes == AttributeSet{ChartType::bar, ColormapClass::categorical, TrendClass::increasing,
                                       LayoutClass::horizontal, {}});
    CHECK(r.confidence.at(AttributeKind::type) == 0.99);
    CHECK(r.confidence.at(AttributeKind::layout) == 0.97);
    REQUIRE(r.palette.size() == 2);
    CHECK(r.palette[0].color == Rgb{31, 119, 180});
    CHECK(r.palette[0].proportion == doctest::Approx(0.6));
}

TEST_CASE("heatmaps carry no trend or layout") {
    const auto mock = fixture_provider();
    const auto r = Annotator(mock).annotate(heatmap_image());
    CHECK(r.attributes.type == ChartType::heatmap);
    CHECK(r.attributes.color == ColormapClass::sequential);
    CHECK_FALSE(r.attributes.trend.has_value());
    CHECK_FALSE(r.attributes.layout.has_value());
    CHECK(r.confidence.count(AttributeKind::trend) == 0);
}

TEST_CASE("extended classifiers store results under their name") {
    const auto mock = fixture_provider();
    const std::vector<ExtendedClassifierSpec> specs{{"style", {"3D style", "Flat style", "Sketch style"}, 0}};
    const auto r = Annotator(mock).annotate(bar_image(), specs);
    CHECK(r.attributes.extended.at("style") == "3D style");
    CHECK(r.extended_confidence.at("style") > 0.99);

    const std::vector<ExtendedClassifierSpec> twice{{"s", {"a", "b"}, 0}, {"s", {"c", "d"}, 0}};
    CHECK_THROWS_AS(Annotator(mock).annotate(bar_image(), twice), std::invalid_argument);
    const std::vector<ExtendedClassifierSpec> bad{{"s", {"a"}, 0}};
    CHECK_THROWS_AS(Annotator(mock).annotate(bar_image(), bad), std::invalid_argument);
}

TEST_CASE("argmax label") {
    const std::vector<std::string> ab{"a", "b"};
    CHECK(argmax_label({{2, 0}}, ab) == "a");
    CHECK(argmax_label({{0, 0}}, ab) == "a");
    const std::vector<std::string> abc{"a", "b", "c"};
    CHECK(argmax_label({{-1, 3, 2}}, abc) == "b");
    CHECK(argmax_label({{-1 + 100, 3 + 100, 2 + 100}}, abc) == "b");
    CHECK_THROWS_AS(argmax_label({{1, 2}}, abc), std::invalid_argument);
}

TEST_CASE("annotation never emits inapplicable kinds and is deterministic") {
    const MockProvider mock(16);
    const Annotator annotator(mock);
    Rng rng(31);
    for (int i = 0; i < 60; ++i) {
        const auto img = testsupport::two_color_image(8, 8,
                                                      {static_cast<std::uint8_t>(rng.below(256)), 10, 10, 255},
                                                      {10, static_cast<std::uint8_t>(rng.below(256)), 10, 255}, 20);
        const auto a = annotator.annotate(img);
        const auto kinds = Taxonomy::defaults().applicable_attributes(a.attributes.type);
        CHECK(a.attributes.color.has_value() == kinds.color);
        CHECK(a.attributes.trend.has_value() == kinds.trend);
        CHECK(a.attributes.layout.has_value() == kinds.layout);
        CHECK_NOTHROW(Taxonomy::defaults().validate(a.attributes));
        const auto b = annotator.annotate(img);
        CHECK(a.attributes == b.attributes);
        CHECK(a.palette == b.palette);
        CHECK(a.mask == b.mask);
    }
}

TEST_CASE("stage failures name the stage") {
    const auto img = bar_image();
    const std::vector<ExtendedClassifierSpec> specs{{"style", {"x", "y"}, 0}};
    for (const std::string stage : {"segment", "classify:type", "classify:trend", "zero_shot", "palette"}) {
        CAPTURE(stage);
        const FailingProvider p(stage);
        try {
            Annotator(p).annotate(img, specs);
            FAIL("expected a stage error");
        } catch (const StageError& e) {
            const std::string expected = stage == "zero_shot" ? "zero_shot:style" : stage;
            CHECK(e.stage() == expected);
        }
    }
    CHECK_NOTHROW(Annotator(FailingProvider("none")).annotate(img, specs));
}
