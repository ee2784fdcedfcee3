#include <doctest.h>

#include <set>

#include "chartret/annotation.hpp"
#include "chartret/synth.hpp"
#include "support.hpp"

using namespace chartret;

TEST_CASE("uniform spec covers every type") {
    auto spec = SynthSpec::uniform(2, 3);
    spec.dim = 16;
    const auto synth = generate_synthetic(spec);
    CHECK(synth.corpus.size() == 36);
    CHECK(synth.queries.empty());
    std::map<ChartType, int> per_type;
    std::set<std::string> ids;
    for (const auto& c : synth.corpus) {
        ++per_type[c.attributes.type];
        ids.insert(c.id);
        CHECK_NOTHROW(Taxonomy::defaults().validate(c.attributes));
        CHECK(c.image.width() == spec.width);
        CHECK(c.image.height() == spec.height);
    }
    CHECK(ids.size() == 36);
    for (auto t : all_values<ChartType>()) CHECK(per_type[t] == 2);
    CHECK(synth.corpus.front().id == "bar_0000");
    CHECK(synth.fixture.images().size() == 36);
}

TEST_CASE("fixed seed reproduces the corpus") {
    auto spec = SynthSpec::uniform(1, 11);
    spec.dim = 8;
    spec.queries_per_type = 1;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    REQUIRE(a.corpus.size() == b.corpus.size());
    for (std::size_t i = 0; i < a.corpus.size(); ++i) {
        CHECK(a.corpus[i].id == b.corpus[i].id);
        CHECK(a.corpus[i].image == b.corpus[i].image);
        CHECK(a.corpus[i].attributes == b.corpus[i].attributes);
    }
    CHECK(a.fixture.to_json_text() == b.fixture.to_json_text());

    spec.seed = 12;
    const auto c = generate_synthetic(spec);
    CHECK(c.fixture.to_json_text() != a.fixture.to_json_text());
}

TEST_CASE("spec JSON") {
    const auto spec = SynthSpec::from_json_text(
        R"({"seed": 5, "dim": 32, "types": ["bar", "pie"], "count_per_type": 3, "per_type": {"pie": 1},
            "queries_per_type": 2, "label_noise": 0.1})");
    CHECK(spec.seed == 5);
    CHECK(spec.dim == 32);
    CHECK(spec.per_type == std::map<ChartType, std::size_t>{{ChartType::bar, 3}, {ChartType::pie, 1}});
    CHECK(spec.queries_per_type == 2);
    CHECK(spec.label_noise == 0.1);
    const auto again = SynthSpec::from_json_text(spec.to_json_text());
    CHECK(again.per_type == spec.per_type);
    CHECK(again.to_json_text() == spec.to_json_text());

    const auto synth = generate_synthetic(spec);
    CHECK(synth.corpus.size() == 4);
    CHECK(synth.queries.size() == 4);
    CHECK(synth.queries.front().id == "q_bar_0000");

    CHECK_THROWS_AS(SynthSpec::from_json_text("{"), std::invalid_argument);
    CHECK_THROWS_AS(SynthSpec::from_json_text(R"({"types": ["radar"]})"), std::invalid_argument);
    CHECK_THROWS_AS(SynthSpec::from_json_text(R"({"dim": 0})"), std::invalid_argument);
    CHECK_THROWS_AS(SynthSpec::from_json_text(R"({"label_noise": 2})"), std::invalid_argument);
    CHECK_THROWS_AS(SynthSpec::from_json_text(R"({"width": 4})"), std::invalid_argument);
}

TEST_CASE("phrases") {
    CHECK(attribute_phrase(AttributeKind::type, "box_plot") == "box plot chart");
    CHECK(attribute_phrase(AttributeKind::trend, "increasing") == "increasing trend");
    CHECK(attribute_phrase(AttributeKind::color, "diverging") == "diverging colormap");
    CHECK(attribute_phrase(AttributeKind::layout, "horizontal") == "horizontal layout");
}

TEST_CASE("annotating synthetic charts recovers their labels") {
    auto spec = SynthSpec::uniform(1, 13);
    spec.dim = 16;
    const auto synth = generate_synthetic(spec);
    const MockProvider mock(synth.fixture);
    const Annotator annotator(mock);
    for (const auto& c : synth.corpus) {
        CAPTURE(c.id);
        const auto result = annotator.annotate(c.image);
        CHECK(result.attributes == c.attributes);
        CHECK(result.mask.count() > 0);
        CHECK(result.mask.count() < std::size_t{c.image.width()} * c.image.height());
    }
}

TEST_CASE("label noise flips some classifier answers") {
    auto spec = SynthSpec::uniform(3, 14);
    spec.dim = 8;
    spec.label_noise = 1.0;
    const auto synth = generate_synthetic(spec);
    const MockProvider mock(synth.fixture);
    for (const auto& c : synth.corpus) {
        const auto cls = mock.classify_primary(c.image, AttributeKind::type);
        CHECK(cls.label != to_string(c.attributes.type));
        CHECK(cls.confidence == 0.6);
    }
}

TEST_CASE("written corpus reloads") {
    testsupport::TempDir dir;
    auto spec = SynthSpec::uniform(0, 15);
    spec.dim = 8;
    spec.per_type = {{ChartType::line, 2}, {ChartType::donut, 1}};
    spec.queries_per_type = 1;
    const auto synth = generate_synthetic(spec);
    write_synthetic(synth, spec, dir.path());
    const auto rows = read_labels_csv(dir.path() / "corpus" / "labels.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].id == synth.corpus[0].id);
    CHECK(rows[0].attributes == synth.corpus[0].attributes);
    CHECK(load_image(dir.path() / "corpus" / (rows[2].id + ".png")) == synth.corpus[2].image);
    CHECK(MockFixture::load(dir.path() / "fixture.json").to_json_text() == synth.fixture.to_json_text());
    CHECK(SynthSpec::load(dir.path() / "spec.json").to_json_text() == spec.to_json_text());
    CHECK(list_images(dir.path() / "queries").size() == 2);
}
