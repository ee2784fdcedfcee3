#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "chartret/corpus.hpp"
#include "chartret/mock_provider.hpp"

namespace chartret {

/// Parameters of a synthetic labeled corpus. JSON form:
///
///   { "seed": 7, "dim": 512, "width": 64, "height": 48,
///     "count_per_type": 2,              // applies to "types" (default: all 18)
///     "types": ["bar", "line"],
///     "per_type": { "bar": 5 },         // overrides count_per_type
///     "queries_per_type": 1,
///     "type_weight": 1.0, "attribute_weight": 0.35, "noise_weight": 0.25,
///     "label_noise": 0.0 }
struct SynthSpec {
    std::uint64_t seed = 7;
    std::size_t dim = kDefaultEmbeddingDim;
    std::uint32_t width = 64;
    std::uint32_t height = 48;
    std::map<ChartType, std::size_t> per_type;
    std::size_t queries_per_type = 0;
    double type_weight = 1.0;
    double attribute_weight = 0.35;
    double noise_weight = 0.25;
    /// Probability that a fixture classifier answer is wrong.
    double label_noise = 0.0;

    static SynthSpec from_json_text(std::string_view text);
    static SynthSpec load(const std::filesystem::path& path);
    std::string to_json_text() const;
    void validate() const;

    /// Same count for every chart type.
    static SynthSpec uniform(std::size_t count_per_type, std::uint64_t seed = 7);
};

struct SynthChart {
    std::string id;
    RasterImage image;
    AttributeSet attributes;
};

/// Rendered charts plus a mock fixture in which charts sharing attributes
/// get nearby embeddings, trend features cluster by trend, the classifier
/// answers match the labels (up to label_noise), and masks mark the drawn
/// pixels. Text prompts such as "bar chart", "increasing trend" or
/// "categorical colormap" map onto the matching cluster centers.
struct SynthCorpus {
    std::vector<SynthChart> corpus;
    std::vector<SynthChart> queries;
    MockFixture fixture;
};

SynthCorpus generate_synthetic(const SynthSpec& spec);

/// Writes `out/corpus/<id>.png`, `out/corpus/labels.csv`, `out/queries/...`,
/// `out/fixture.json` and `out/spec.json`.
void write_synthetic(const SynthCorpus& synth, const SynthSpec& spec, const std::filesystem::path& out);

/// Prompt phrase for an attribute label, e.g. "box plot chart", "mixed trend".
std::string attribute_phrase(AttributeKind kind, std::string_view label);

} // namespace chartret
