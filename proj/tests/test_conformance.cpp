#include <doctest.h>

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "chartret/errors.hpp"
#include "chartret/mock_provider.hpp"
#include "chartret/provider_server.hpp"
#include "chartret/remote_provider.hpp"
#include "chartret/synth.hpp"
#include "support.hpp"

using namespace chartret;

namespace {

struct Probe {
    RasterImage image;
    std::vector<std::string> labels;
};

std::vector<Probe> probes(const SynthCorpus& synth) {
    std::vector<Probe> out;
    for (const auto& c : synth.corpus) out.push_back({c.image, {"flat style", "3D style", "hand drawn"}});
    out.push_back({testsupport::solid_image(7, 5, {10, 200, 30, 255}), {"a", "b"}});
    out.push_back({testsupport::two_color_image(9, 9, {255, 0, 0, 255}, {0, 0, 255, 128}, 40), {"x", "y", "z"}});
    return out;
}

void check_close(const EmbeddingVector& a, const EmbeddingVector& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(double(a[i]) - double(b[i])) <= 1e-6);
}

/// Every provider call of `candidate` must agree with `reference`.
void contract_suite(const Provider& candidate, const Provider& reference, const std::vector<Probe>& inputs) {
    REQUIRE(candidate.dim() == reference.dim());
    for (const auto& p : inputs) {
        const auto e = candidate.embed_image(p.image);
        check_close(e, reference.embed_image(p.image));
        double norm = 0;
        for (float x : e) norm += double(x) * x;
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));

        check_close(candidate.trend_feature(p.image), reference.trend_feature(p.image));

        const auto z = candidate.zero_shot_logits(p.image, p.labels);
        const auto zr = reference.zero_shot_logits(p.image, p.labels);
        REQUIRE(z.logits.size() == p.labels.size());
        for (std::size_t i = 0; i < z.logits.size(); ++i) CHECK(std::abs(z.logits[i] - zr.logits[i]) <= 1e-4);

        for (auto kind : all_values<AttributeKind>()) {
            const auto c = candidate.classify_primary(p.image, kind);
            const auto cr = reference.classify_primary(p.image, kind);
            CHECK(c.label == cr.label);
            CHECK(c.confidence == doctest::Approx(cr.confidence).epsilon(1e-12));
        }
        CHECK(candidate.segment(p.image) == reference.segment(p.image));
    }
    for (const char* prompt : {"bar chart", "  Increasing Trend ", "something unseen"}) {
        check_close(candidate.embed_text(prompt), reference.embed_text(prompt));
    }
    CHECK_THROWS_AS(candidate.embed_text("   "), std::invalid_argument);
    const std::vector<std::string> one{"only"};
    CHECK_THROWS_AS(candidate.zero_shot_logits(inputs.front().image, one), std::invalid_argument);
}

SynthCorpus small_synth() {
    auto spec = SynthSpec::uniform(0, 31);
    spec.dim = 24;
    spec.per_type = {{ChartType::bar, 2}, {ChartType::heatmap, 1}, {ChartType::line, 1}};
    return generate_synthetic(spec);
}

} // namespace

TEST_CASE("in-process mock satisfies the contract") {
    const auto synth = small_synth();
    const MockProvider mock(synth.fixture);
    contract_suite(mock, mock, probes(synth));
}

TEST_CASE("remote provider over the wire matches the in-process mock") {
    const auto synth = small_synth();
    const MockProvider mock(synth.fixture);
    ProviderServer server(mock);
    server.start();
    CHECK(RemoteProvider::probe_dim(server.endpoint()) == 24);
    const RemoteProvider remote(server.endpoint(), 24);
    contract_suite(remote, mock, probes(synth));

    ProviderDescriptor d;
    d.kind = ProviderKind::remote;
    d.endpoint = server.endpoint();
    d.dim = 24;
    const auto made = make_provider(d);
    check_close(made->embed_text("pie chart"), mock.embed_text("pie chart"));
    server.stop();
}

TEST_CASE("remote provider errors") {
    const MockProvider mock(16);
    ProviderServer server(mock);
    server.start();
    const auto img = testsupport::solid_image(4, 4, {1, 2, 3, 255});

    SUBCASE("dimension mismatch") {
        const RemoteProvider wrong(server.endpoint(), 32);
        CHECK_THROWS_AS(wrong.embed_image(img), ProviderError);
        CHECK_THROWS_AS(wrong.embed_text("bar chart"), ProviderError);
        CHECK_THROWS_AS(wrong.trend_feature(img), ProviderError);
    }
    SUBCASE("unreachable endpoint") {
        const RemoteProvider gone("http://127.0.0.1:1", 16, std::chrono::milliseconds(500));
        CHECK_THROWS_AS(gone.embed_image(img), ProviderError);
        CHECK_THROWS_AS(RemoteProvider::probe_dim("http://127.0.0.1:1", std::chrono::milliseconds(500)), ProviderError);
    }
    SUBCASE("server-side validation") {
        httplib::Client cli(server.endpoint());
        auto bad_json = cli.Post("/embed/image", "{", "application/json");
        REQUIRE(bad_json);
        CHECK(bad_json->status == 400);
        auto bad_png = cli.Post("/embed/image", R"({"png_base64": "AAAA"})", "application/json");
        REQUIRE(bad_png);
        CHECK(bad_png->status == 400);
        auto bad_kind = cli.Post("/classify",
                                 nlohmann::json{{"png_base64", base64_encode(encode_png(img))}, {"kind", "shape"}}.dump(),
                                 "application/json");
        REQUIRE(bad_kind);
        CHECK(bad_kind->status == 400);
        auto health = cli.Get("/health");
        REQUIRE(health);
        CHECK(nlohmann::json::parse(health->body).at("dim") == 16);
    }
    server.stop();
}

TEST_CASE("external provider endpoint" * doctest::skip(std::getenv("CHARTRET_CONFORMANCE_ENDPOINT") == nullptr)) {
    const std::string endpoint = std::getenv("CHARTRET_CONFORMANCE_ENDPOINT");
    const auto dim = RemoteProvider::probe_dim(endpoint);
    const RemoteProvider remote(endpoint, dim);
    const auto img = testsupport::solid_image(32, 32, {30, 60, 90, 255});
    const auto e = remote.embed_image(img);
    CHECK(e.size() == dim);
    CHECK(remote.embed_image(img) == e);
    const std::vector<std::string> labels{"bar chart", "pie chart"};
    CHECK(remote.zero_shot_logits(img, labels).logits.size() == 2);
    CHECK(remote.segment(img).width() == 32);
}
