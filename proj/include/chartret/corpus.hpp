#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chartret/colorfeat.hpp"
#include "chartret/embedding.hpp"
#include "chartret/taxonomy.hpp"

namespace chartret {

enum class RecordSource { beagle, manual, synthetic };

template <>
struct EnumNames<RecordSource> {
    static constexpr std::string_view what = "record source";
    static constexpr std::array<std::string_view, 3> names = {"beagle", "manual", "synthetic"};
};

/// One chart of the corpus with its precomputed retrieval features.
struct ChartRecord {
    std::string id;
    std::string image_ref; ///< path (relative to the snapshot directory) or URL
    AttributeSet attributes;
    EmbeddingVector embedding;                  ///< image feature of the chart
    ColorVector color_vector;                   ///< 384 palette-histogram bins
    std::optional<EmbeddingVector> trend_feature;
    RecordSource source = RecordSource::manual;
    std::map<std::string, std::string> metadata;

    friend bool operator==(const ChartRecord&, const ChartRecord&) = default;
};

/// Read-only view of the corpus. Share it as shared_ptr<const CorpusSnapshot>;
/// ingestion produces a new snapshot instead of mutating one.
class CorpusSnapshot {
public:
    /// Validates every record and rejects duplicate ids.
    CorpusSnapshot(std::size_t dim, std::vector<ChartRecord> records, std::int64_t created,
                   std::filesystem::path base_dir = {}, const Taxonomy& taxonomy = Taxonomy::defaults());

    std::size_t dim() const noexcept { return dim_; }
    std::int64_t created() const noexcept { return created_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::vector<ChartRecord>& records() const noexcept { return records_; }
    const std::array<std::size_t, 18>& type_counts() const noexcept { return type_counts_; }

    /// Directory relative image_refs are resolved against.
    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
    std::filesystem::path resolve_image(const ChartRecord& record) const;

    const ChartRecord* find(std::string_view id) const;

private:
    std::size_t dim_;
    std::vector<ChartRecord> records_;
    std::int64_t created_;
    std::filesystem::path base_dir_;
    std::array<std::size_t, 18> type_counts_{};
    std::unordered_map<std::string, std::size_t> index_;
};

using SnapshotPtr = std::shared_ptr<const CorpusSnapshot>;

/// Throws std::invalid_argument describing the first broken record invariant.
void validate_record(const ChartRecord& record, std::size_t dim, const Taxonomy& taxonomy);

/// Inputs for ingesting one chart image.
struct ImageIngest {
    std::string id;
    std::string image_ref;
    /// Ground-truth primary attributes. When absent the annotator's output is used.
    std::optional<AttributeSet> labels;
    RecordSource source = RecordSource::manual;
    std::map<std::string, std::string> metadata;
    std::vector<ExtendedClassifierSpec> extended;
};

/// Accumulates records for a new snapshot. Starting from an existing
/// snapshot copies its record list; the original stays untouched.
class CorpusBuilder {
public:
    explicit CorpusBuilder(std::size_t dim, const Taxonomy& taxonomy = Taxonomy::defaults());
    explicit CorpusBuilder(const CorpusSnapshot& base, const Taxonomy& taxonomy = Taxonomy::defaults());

    /// Adds a precomputed record. Throws DuplicateIdError or std::invalid_argument.
    const ChartRecord& add(ChartRecord record);

    /// Annotates the image, encodes it and derives its color vector and
    /// trend feature, then adds the record.
    const ChartRecord& ingest(const RasterImage& img, ImageIngest request, const Provider& provider);

    bool contains(std::string_view id) const { return ids_.count(std::string(id)) > 0; }
    std::size_t size() const noexcept { return records_.size(); }
    std::size_t dim() const noexcept { return dim_; }

    SnapshotPtr build(std::int64_t created, std::filesystem::path base_dir = {}) const;

private:
    std::size_t dim_;
    const Taxonomy& taxonomy_;
    std::vector<ChartRecord> records_;
    std::unordered_set<std::string> ids_;
};

inline constexpr int kSnapshotFormatVersion = 1;
inline constexpr std::string_view kManifestFile = "manifest.jsonl";
inline constexpr std::string_view kFeaturesFile = "features.bin";

/// Writes `dir/manifest.jsonl` (header line, then one JSON record per line)
/// and `dir/features.bin` (little-endian float32: embedding, color vector,
/// trend feature per record, in manifest order).
void save_snapshot(const CorpusSnapshot& snapshot, const std::filesystem::path& dir);

/// Throws SnapshotFormatError on version mismatch, truncation or corruption.
SnapshotPtr load_snapshot(const std::filesystem::path& dir, const Taxonomy& taxonomy = Taxonomy::defaults());

struct CorpusStats {
    std::size_t records = 0;
    std::array<std::size_t, 18> per_type{};
    /// kind -> label -> count; "n/a" counts charts without that attribute.
    std::map<AttributeKind, std::map<std::string, std::size_t>> per_attribute;
    /// classifier -> label -> count
    std::map<std::string, std::map<std::string, std::size_t>> extended;
};

CorpusStats corpus_stats(const CorpusSnapshot& snapshot);
std::string format_stats_table(const CorpusStats& stats);

/// Row of a labels file: `id,type,color,trend,layout` with empty cells for
/// absent attributes and a header line.
struct LabelRow {
    std::string id;
    AttributeSet attributes;
};

std::vector<LabelRow> read_labels_csv(const std::filesystem::path& path,
                                      const Taxonomy& taxonomy = Taxonomy::defaults());
void write_labels_csv(const std::filesystem::path& path, const std::vector<LabelRow>& rows);

/// Image files (.png/.jpg/.jpeg) in `dir` sorted by file name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Ingests every image of `images_dir` (id = file stem). Rows of `labels`
/// override annotated attributes; a label row without an image is an error.
/// image_refs are written relative to `snapshot_dir`.
void ingest_directory(CorpusBuilder& builder, const std::filesystem::path& images_dir,
                      const std::vector<LabelRow>* labels, const Provider& provider,
                      const std::filesystem::path& snapshot_dir, RecordSource source);

} // namespace chartret
