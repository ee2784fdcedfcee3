#include "chartret/mock_provider.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "chartret/errors.hpp"
#include "chartret/numerics.hpp"
#include "chartret/rng.hpp"

namespace chartret {

using nlohmann::json;

// ---------------------------------------------------------------------------
// MockFixture
// ---------------------------------------------------------------------------

void MockFixture::check_vector(const std::vector<double>& v, std::string_view what) const {
    if (v.size() != dim_) {
        throw std::invalid_argument("fixture " + std::string(what) + " has dimension " +
                                    std::to_string(v.size()) + ", fixture dim is " + std::to_string(dim_));
    }
}

void MockFixture::add_image(const std::string& key, const RasterImage& img, FixtureImage entry) {
    entry.digest = image_digest(img);
    add_image(key, std::move(entry));
}

void MockFixture::add_image(const std::string& key, FixtureImage entry) {
    if (key.empty()) throw std::invalid_argument("fixture image key is empty");
    if (entry.digest.empty()) throw std::invalid_argument("fixture image '" + key + "' has no digest");
    if (entry.embedding) check_vector(*entry.embedding, key + ".embedding");
    if (entry.trend_feature) check_vector(*entry.trend_feature, key + ".trend_feature");
    if (images_.count(key)) throw std::invalid_argument("duplicate fixture image key '" + key + "'");
    auto [it, fresh] = key_by_digest_.emplace(entry.digest, key);
    if (!fresh) {
        throw std::invalid_argument("fixture images '" + it->second + "' and '" + key +
                                    "' have identical pixels");
    }
    images_.emplace(key, std::move(entry));
}

void MockFixture::add_text(std::string_view text, std::vector<double> vector) {
    auto key = normalize_text(text);
    if (key.empty()) throw std::invalid_argument("fixture text key is empty");
    check_vector(vector, "text '" + key + "'");
    texts_[key] = std::move(vector);
}

const FixtureImage* MockFixture::find_image(std::string_view key) const {
    auto it = images_.find(std::string(key));
    return it == images_.end() ? nullptr : &it->second;
}

const FixtureImage* MockFixture::find_by_digest(std::string_view digest) const {
    auto it = key_by_digest_.find(std::string(digest));
    return it == key_by_digest_.end() ? nullptr : &images_.at(it->second);
}

const std::vector<double>* MockFixture::find_text(std::string_view normalized_text) const {
    auto it = texts_.find(std::string(normalized_text));
    return it == texts_.end() ? nullptr : &it->second;
}

MockFixture MockFixture::from_json_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("fixture: ") + e.what());
    }
    try {
        MockFixture fixture(doc.at("dim").get<std::size_t>());
        if (fixture.dim_ == 0) throw std::invalid_argument("fixture: dim must be positive");
        if (doc.contains("images")) {
            for (const auto& [key, value] : doc.at("images").items()) {
                FixtureImage entry;
                entry.digest = value.at("digest").get<std::string>();
                if (value.contains("embedding")) entry.embedding = value.at("embedding").get<std::vector<double>>();
                if (value.contains("trend_feature")) {
                    entry.trend_feature = value.at("trend_feature").get<std::vector<double>>();
                }
                if (value.contains("classify")) {
                    for (const auto& [kind, cls] : value.at("classify").items()) {
                        entry.classify[parse_enum<AttributeKind>(kind)] = {
                            cls.at("label").get<std::string>(), cls.at("confidence").get<double>()};
                    }
                }
                if (value.contains("mask_rle")) {
                    entry.mask_rle = value.at("mask_rle").get<std::vector<std::uint32_t>>();
                }
                fixture.add_image(key, std::move(entry));
            }
        }
        if (doc.contains("texts")) {
            for (const auto& [key, value] : doc.at("texts").items()) {
                fixture.add_text(key, value.get<std::vector<double>>());
            }
        }
        return fixture;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("fixture: ") + e.what());
    }
}

MockFixture MockFixture::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

std::string MockFixture::to_json_text() const {
    json doc;
    doc["dim"] = dim_;
    json images = json::object();
    for (const auto& [key, entry] : images_) {
        json e;
        e["digest"] = entry.digest;
        if (entry.embedding) e["embedding"] = *entry.embedding;
        if (entry.trend_feature) e["trend_feature"] = *entry.trend_feature;
        if (!entry.classify.empty()) {
            json cls = json::object();
            for (const auto& [kind, c] : entry.classify) {
                cls[std::string(to_string(kind))] = {{"label", c.label}, {"confidence", c.confidence}};
            }
            e["classify"] = std::move(cls);
        }
        if (entry.mask_rle) e["mask_rle"] = *entry.mask_rle;
        images[key] = std::move(e);
    }
    doc["images"] = std::move(images);
    doc["texts"] = texts_;
    return doc.dump();
}

void MockFixture::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write fixture " + path.string());
    out << to_json_text() << '\n';
}

// ---------------------------------------------------------------------------
// Hash fallbacks
// ---------------------------------------------------------------------------

std::array<std::uint8_t, 32> tagged_digest(std::string_view tag, std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> buf(tag.begin(), tag.end());
    buf.push_back(0);
    buf.insert(buf.end(), bytes.begin(), bytes.end());
    return sha256(buf);
}

std::vector<double> hash_gaussian(std::string_view tag, std::span<const std::uint8_t> bytes, std::size_t dim) {
    auto rng = Rng::from_digest(tagged_digest(tag, bytes));
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    return v;
}

// ---------------------------------------------------------------------------
// MockProvider
// ---------------------------------------------------------------------------

MockProvider::MockProvider(std::size_t dim) : Provider(dim), fixture_(dim) {}

MockProvider::MockProvider(MockFixture fixture) : Provider(fixture.dim()), fixture_(std::move(fixture)) {}

const FixtureImage* MockProvider::lookup(const RasterImage& img) const {
    if (fixture_.images().empty()) return nullptr;
    return fixture_.find_by_digest(image_digest(img));
}

std::vector<double> MockProvider::do_embed_image(const RasterImage& img) const {
    if (const auto* entry = lookup(img); entry && entry->embedding) return *entry->embedding;
    return hash_gaussian("image", canonical_bytes(img), dim());
}

std::vector<double> MockProvider::do_embed_text(const std::string& normalized_text) const {
    if (const auto* v = fixture_.find_text(normalized_text)) return *v;
    const auto* p = reinterpret_cast<const std::uint8_t*>(normalized_text.data());
    return hash_gaussian("text", std::span(p, normalized_text.size()), dim());
}

std::vector<double> MockProvider::do_zero_shot(const RasterImage& img, std::span<const std::string> labels) const {
    const auto image_feature = embed_image(img);
    std::vector<double> logits;
    logits.reserve(labels.size());
    for (const auto& label : labels) {
        const auto text_feature = embed_text(label);
        logits.push_back(kZeroShotLogitScale * cosine_similarity(image_feature, text_feature));
    }
    return logits;
}

Classification MockProvider::do_classify(const RasterImage& img, AttributeKind kind) const {
    if (const auto* entry = lookup(img)) {
        if (auto it = entry->classify.find(kind); it != entry->classify.end()) return it->second;
    }
    const auto labels = labels_of(kind);
    auto rng = Rng::from_digest(tagged_digest("classify:" + std::string(to_string(kind)), canonical_bytes(img)));
    return {std::string(labels[rng.next() % labels.size()]), 0.5};
}

std::vector<double> MockProvider::do_trend_feature(const RasterImage& img) const {
    if (const auto* entry = lookup(img); entry && entry->trend_feature) return *entry->trend_feature;
    return hash_gaussian("trend", canonical_bytes(img), dim());
}

ForegroundMask MockProvider::do_segment(const RasterImage& img) const {
    if (const auto* entry = lookup(img); entry && entry->mask_rle) {
        return ForegroundMask::from_rle(img.width(), img.height(), *entry->mask_rle);
    }
    return ForegroundMask(img.width(), img.height(), true);
}

} // namespace chartret
