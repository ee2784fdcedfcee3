#include "chartret/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "chartret/annotation.hpp"
#include "chartret/errors.hpp"
#include "chartret/json_io.hpp"

namespace chartret {

using nlohmann::json;

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Records and snapshots
// ---------------------------------------------------------------------------

namespace {

void check_features(std::span<const float> v, std::size_t expected, std::string_view what, const std::string& id) {
    if (v.size() != expected) {
        throw std::invalid_argument("record '" + id + "': " + std::string(what) + " has " +
                                    std::to_string(v.size()) + " values, expected " + std::to_string(expected));
    }
    for (float x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("record '" + id + "': " + std::string(what) + " has non-finite values");
        }
    }
}

} // namespace

void validate_record(const ChartRecord& record, std::size_t dim, const Taxonomy& taxonomy) {
    if (record.id.empty()) throw std::invalid_argument("record id is empty");
    if (record.id.find_first_of("\r\n") != std::string::npos) {
        throw std::invalid_argument("record id contains a line break");
    }
    check_features(record.embedding, dim, "embedding", record.id);
    check_features(record.color_vector, kColorVectorLength, "color_vector", record.id);
    if (record.trend_feature) check_features(*record.trend_feature, dim, "trend_feature", record.id);
    try {
        taxonomy.validate(record.attributes);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("record '" + record.id + "': " + e.what());
    }
}

CorpusSnapshot::CorpusSnapshot(std::size_t dim, std::vector<ChartRecord> records, std::int64_t created,
                               fs::path base_dir, const Taxonomy& taxonomy)
    : dim_(dim), records_(std::move(records)), created_(created), base_dir_(std::move(base_dir)) {
    if (dim_ == 0) throw std::invalid_argument("snapshot dim must be positive");
    index_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        validate_record(r, dim_, taxonomy);
        if (!index_.emplace(r.id, i).second) throw DuplicateIdError("duplicate chart id '" + r.id + "'");
        ++type_counts_[static_cast<std::size_t>(r.attributes.type)];
    }
}

fs::path CorpusSnapshot::resolve_image(const ChartRecord& record) const {
    fs::path ref(record.image_ref);
    if (ref.is_absolute() || base_dir_.empty()) return ref;
    return (base_dir_ / ref).lexically_normal();
}

const ChartRecord* CorpusSnapshot::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &records_[it->second];
}

CorpusBuilder::CorpusBuilder(std::size_t dim, const Taxonomy& taxonomy) : dim_(dim), taxonomy_(taxonomy) {
    if (dim == 0) throw std::invalid_argument("corpus dim must be positive");
}

CorpusBuilder::CorpusBuilder(const CorpusSnapshot& base, const Taxonomy& taxonomy)
    : dim_(base.dim()), taxonomy_(taxonomy), records_(base.records()) {
    for (const auto& r : records_) ids_.insert(r.id);
}

const ChartRecord& CorpusBuilder::add(ChartRecord record) {
    if (ids_.count(record.id)) throw DuplicateIdError("duplicate chart id '" + record.id + "'");
    validate_record(record, dim_, taxonomy_);
    ids_.insert(record.id);
    records_.push_back(std::move(record));
    return records_.back();
}

const ChartRecord& CorpusBuilder::ingest(const RasterImage& img, ImageIngest request, const Provider& provider) {
    if (ids_.count(request.id)) throw DuplicateIdError("duplicate chart id '" + request.id + "'");
    if (provider.dim() != dim_) {
        throw std::invalid_argument("provider dim " + std::to_string(provider.dim()) + " does not match corpus dim " +
                                    std::to_string(dim_));
    }
    Annotator annotator(provider, taxonomy_);
    auto annotation = annotator.annotate(img, request.extended);

    ChartRecord record;
    record.id = std::move(request.id);
    record.image_ref = std::move(request.image_ref);
    record.attributes = annotation.attributes;
    if (request.labels) {
        auto extended = std::move(record.attributes.extended);
        record.attributes = *request.labels;
        record.attributes.extended.merge(extended);
    }
    record.embedding = provider.embed_image(img);
    record.color_vector = histogram_from_palette(annotation.palette);
    record.trend_feature = provider.trend_feature(img);
    record.source = request.source;
    record.metadata = std::move(request.metadata);
    return add(std::move(record));
}

SnapshotPtr CorpusBuilder::build(std::int64_t created, fs::path base_dir) const {
    return std::make_shared<const CorpusSnapshot>(dim_, records_, created, std::move(base_dir), taxonomy_);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kManifestFormat = "chartret-snapshot";

void append_floats(std::vector<std::uint8_t>& out, std::span<const float> values) {
    for (float f : values) {
        auto bits = std::bit_cast<std::uint32_t>(f);
        for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(bits >> s));
    }
}

std::vector<float> read_floats(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t count) {
    std::vector<float> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto* p = &bytes[offset + 4 * i];
        std::uint32_t bits = std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
                             std::uint32_t{p[3]} << 24;
        out[i] = std::bit_cast<float>(bits);
    }
    return out;
}

} // namespace

void save_snapshot(const CorpusSnapshot& snapshot, const fs::path& dir) {
    fs::create_directories(dir);

    std::vector<std::uint8_t> features;
    std::ostringstream manifest;
    std::size_t expected_bytes = 0;
    for (const auto& r : snapshot.records()) {
        expected_bytes += 4 * (r.embedding.size() + r.color_vector.size() + (r.trend_feature ? r.trend_feature->size() : 0));
    }
    features.reserve(expected_bytes);

    json header = {{"format", kManifestFormat},
                   {"version", kSnapshotFormatVersion},
                   {"dim", snapshot.dim()},
                   {"created", snapshot.created()},
                   {"records", snapshot.size()},
                   {"feature_bytes", expected_bytes}};
    manifest << header.dump() << '\n';

    for (const auto& r : snapshot.records()) {
        const std::size_t offset = features.size();
        append_floats(features, r.embedding);
        append_floats(features, r.color_vector);
        if (r.trend_feature) append_floats(features, *r.trend_feature);
        json line = {{"id", r.id},
                     {"image_ref", r.image_ref},
                     {"attributes", r.attributes},
                     {"source", to_string(r.source)},
                     {"metadata", r.metadata},
                     {"features",
                      {{"offset", offset},
                       {"embedding", r.embedding.size()},
                       {"color", r.color_vector.size()},
                       {"trend", r.trend_feature ? r.trend_feature->size() : 0}}}};
        manifest << line.dump() << '\n';
    }

    // Features first so a manifest never points at a missing feature file.
    write_file_bytes(dir / kFeaturesFile, features);
    const auto text = manifest.str();
    write_file_bytes(dir / kManifestFile,
                     std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

SnapshotPtr load_snapshot(const fs::path& dir, const Taxonomy& taxonomy) {
    std::ifstream in(dir / kManifestFile);
    if (!in) throw SnapshotFormatError("cannot open " + (dir / kManifestFile).string());

    std::vector<std::uint8_t> features;
    try {
        features = read_file_bytes(dir / kFeaturesFile);
    } catch (const std::runtime_error& e) {
        throw SnapshotFormatError(e.what());
    }

    std::string line;
    if (!std::getline(in, line)) throw SnapshotFormatError("manifest is empty");
    std::size_t dim = 0;
    std::size_t declared_records = 0;
    std::int64_t created = 0;
    try {
        auto header = json::parse(line);
        if (header.at("format").get<std::string>() != kManifestFormat) {
            throw SnapshotFormatError("manifest has an unknown format tag");
        }
        const int version = header.at("version").get<int>();
        if (version != kSnapshotFormatVersion) {
            throw SnapshotFormatError("snapshot version " + std::to_string(version) + " is not supported (expected " +
                                      std::to_string(kSnapshotFormatVersion) + ")");
        }
        dim = header.at("dim").get<std::size_t>();
        declared_records = header.at("records").get<std::size_t>();
        created = header.at("created").get<std::int64_t>();
        if (header.at("feature_bytes").get<std::size_t>() != features.size()) {
            throw SnapshotFormatError("feature file has " + std::to_string(features.size()) +
                                      " bytes, manifest declares " +
                                      std::to_string(header.at("feature_bytes").get<std::size_t>()));
        }
    } catch (const json::exception& e) {
        throw SnapshotFormatError(std::string("manifest header: ") + e.what());
    }

    std::vector<ChartRecord> records;
    records.reserve(declared_records);
    std::size_t cursor = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto doc = json::parse(line);
            ChartRecord r;
            r.id = doc.at("id").get<std::string>();
            r.image_ref = doc.at("image_ref").get<std::string>();
            r.attributes = doc.at("attributes").get<AttributeSet>();
            r.source = parse_enum<RecordSource>(doc.at("source").get<std::string>());
            r.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
            const auto& f = doc.at("features");
            const auto offset = f.at("offset").get<std::size_t>();
            const auto n_embed = f.at("embedding").get<std::size_t>();
            const auto n_color = f.at("color").get<std::size_t>();
            const auto n_trend = f.at("trend").get<std::size_t>();
            if (offset != cursor) throw SnapshotFormatError("feature offsets are not contiguous");
            const std::size_t bytes = 4 * (n_embed + n_color + n_trend);
            if (cursor + bytes > features.size()) throw SnapshotFormatError("feature file is truncated");
            r.embedding = read_floats(features, cursor, n_embed);
            r.color_vector = read_floats(features, cursor + 4 * n_embed, n_color);
            if (n_trend > 0) r.trend_feature = read_floats(features, cursor + 4 * (n_embed + n_color), n_trend);
            cursor += bytes;
            records.push_back(std::move(r));
        } catch (const SnapshotFormatError& e) {
            throw SnapshotFormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
        } catch (const std::exception& e) {
            throw SnapshotFormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (records.size() != declared_records) {
        throw SnapshotFormatError("manifest declares " + std::to_string(declared_records) + " records, found " +
                                  std::to_string(records.size()));
    }
    if (cursor != features.size()) throw SnapshotFormatError("feature file has trailing bytes");

    try {
        return std::make_shared<const CorpusSnapshot>(dim, std::move(records), created, dir, taxonomy);
    } catch (const std::invalid_argument& e) {
        throw SnapshotFormatError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Stats
// ---------------------------------------------------------------------------

CorpusStats corpus_stats(const CorpusSnapshot& snapshot) {
    CorpusStats stats;
    stats.records = snapshot.size();
    stats.per_type = snapshot.type_counts();
    for (auto kind : {AttributeKind::color, AttributeKind::trend, AttributeKind::layout}) {
        auto& counts = stats.per_attribute[kind];
        for (auto label : labels_of(kind)) counts[std::string(label)] = 0;
        counts["n/a"] = 0;
    }
    for (const auto& r : snapshot.records()) {
        for (auto kind : {AttributeKind::color, AttributeKind::trend, AttributeKind::layout}) {
            auto label = r.attributes.label(kind);
            ++stats.per_attribute[kind][label ? std::string(*label) : "n/a"];
        }
        for (const auto& [name, label] : r.attributes.extended) ++stats.extended[name][label];
    }
    return stats;
}

std::string format_stats_table(const CorpusStats& stats) {
    std::ostringstream out;
    out << std::left << std::setw(18) << "type" << std::right << std::setw(8) << "count" << '\n';
    for (auto t : all_values<ChartType>()) {
        out << std::left << std::setw(18) << to_string(t) << std::right << std::setw(8)
            << stats.per_type[static_cast<std::size_t>(t)] << '\n';
    }
    out << std::left << std::setw(18) << "total" << std::right << std::setw(8) << stats.records << '\n';
    for (const auto& [kind, counts] : stats.per_attribute) {
        out << '\n' << to_string(kind) << ":";
        for (const auto& [label, n] : counts) out << ' ' << label << '=' << n;
    }
    for (const auto& [name, counts] : stats.extended) {
        out << '\n' << name << ":";
        for (const auto& [label, n] : counts) out << " \"" << label << "\"=" << n;
    }
    out << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Labels files and directory ingestion
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

constexpr std::array<std::string_view, 5> kLabelColumns = {"id", "type", "color", "trend", "layout"};

} // namespace

std::vector<LabelRow> read_labels_csv(const fs::path& path, const Taxonomy& taxonomy) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open labels file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path.string() + ": empty labels file");
    auto header = split_csv_line(line);
    if (header.size() != kLabelColumns.size() || !std::equal(header.begin(), header.end(), kLabelColumns.begin())) {
        throw std::invalid_argument(path.string() + ": header must be id,type,color,trend,layout");
    }

    std::vector<LabelRow> rows;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        auto where = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != kLabelColumns.size()) throw std::invalid_argument(where + ": expected 5 cells");
        LabelRow row;
        row.id = cells[0];
        if (row.id.empty()) throw std::invalid_argument(where + ": empty id");
        if (!seen.insert(row.id).second) throw std::invalid_argument(where + ": duplicate id '" + row.id + "'");
        try {
            row.attributes.set_label(AttributeKind::type, cells[1]);
            if (!cells[2].empty()) row.attributes.set_label(AttributeKind::color, cells[2]);
            if (!cells[3].empty()) row.attributes.set_label(AttributeKind::trend, cells[3]);
            if (!cells[4].empty()) row.attributes.set_label(AttributeKind::layout, cells[4]);
            taxonomy.validate(row.attributes);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + ": " + e.what());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_labels_csv(const fs::path& path, const std::vector<LabelRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "id,type,color,trend,layout\n";
    for (const auto& row : rows) {
        out << row.id;
        for (auto kind : {AttributeKind::type, AttributeKind::color, AttributeKind::trend, AttributeKind::layout}) {
            out << ',' << row.attributes.label(kind).value_or("");
        }
        out << '\n';
    }
}

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return out;
}

void ingest_directory(CorpusBuilder& builder, const fs::path& images_dir, const std::vector<LabelRow>* labels,
                      const Provider& provider, const fs::path& snapshot_dir, RecordSource source) {
    std::unordered_map<std::string, const LabelRow*> by_id;
    if (labels) {
        for (const auto& row : *labels) by_id.emplace(row.id, &row);
    }
    const auto images = list_images(images_dir);
    std::unordered_set<std::string> stems;
    for (const auto& path : images) stems.insert(path.stem().string());
    for (const auto& [id, row] : by_id) {
        if (!stems.count(id)) throw std::invalid_argument("label row '" + id + "' has no image in " + images_dir.string());
    }
    const auto base = fs::weakly_canonical(snapshot_dir);
    for (const auto& path : images) {
        ImageIngest request;
        request.id = path.stem().string();
        request.image_ref = fs::weakly_canonical(path).lexically_relative(base).generic_string();
        if (request.image_ref.empty()) request.image_ref = fs::absolute(path).generic_string();
        request.source = source;
        if (auto it = by_id.find(request.id); it != by_id.end()) request.labels = it->second->attributes;
        builder.ingest(load_image(path), std::move(request), provider);
    }
}

} // namespace chartret
