#include "chartret/remote_provider.hpp"

#include <httplib.h>
#include <json.hpp>

#include "chartret/errors.hpp"
#include "chartret/mock_provider.hpp"

namespace chartret {

using nlohmann::json;

namespace {

json image_payload(const RasterImage& img) {
    return json{{"png_base64", base64_encode(encode_png(img))}};
}

json parse_reply(const std::string& body, const std::string& path) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw ProviderError(path + ": malformed reply: " + e.what());
    }
}

template <class T>
T field(const json& j, const char* key, const std::string& path) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ProviderError(path + ": reply field '" + key + "': " + e.what());
    }
}

std::vector<double> vector_reply(const json& reply, const std::string& path) {
    auto values = field<std::vector<double>>(reply, "values", path);
    const auto dim = field<std::size_t>(reply, "dim", path);
    if (dim != values.size()) {
        throw ProviderError(path + ": reply says dim " + std::to_string(dim) + " but carries " +
                            std::to_string(values.size()) + " values");
    }
    return values;
}

httplib::Client make_client(const std::string& endpoint, std::chrono::milliseconds timeout) {
    httplib::Client client(endpoint);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    return client;
}

} // namespace

RemoteProvider::RemoteProvider(std::string endpoint, std::size_t dim, std::chrono::milliseconds timeout)
    : Provider(dim), endpoint_(std::move(endpoint)), timeout_(timeout) {
    if (endpoint_.empty()) throw std::invalid_argument("remote provider requires an endpoint");
    while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
}

std::size_t RemoteProvider::probe_dim(const std::string& endpoint, std::chrono::milliseconds timeout) {
    auto client = make_client(endpoint, timeout);
    auto res = client.Get("/health");
    if (!res) throw ProviderError("/health: " + httplib::to_string(res.error()) + " (" + endpoint + ")");
    if (res->status != 200) throw ProviderError("/health: HTTP " + std::to_string(res->status));
    return field<std::size_t>(parse_reply(res->body, "/health"), "dim", "/health");
}

std::string RemoteProvider::post(const std::string& path, const std::string& body) const {
    auto client = make_client(endpoint_, timeout_);
    auto res = client.Post(path, body, "application/json");
    if (!res) throw ProviderError(path + ": " + httplib::to_string(res.error()) + " (" + endpoint_ + ")");
    if (res->status < 200 || res->status >= 300) {
        throw ProviderError(path + ": HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    return res->body;
}

std::vector<double> RemoteProvider::do_embed_image(const RasterImage& img) const {
    const std::string path = "/embed/image";
    return vector_reply(parse_reply(post(path, image_payload(img).dump()), path), path);
}

std::vector<double> RemoteProvider::do_embed_text(const std::string& normalized_text) const {
    const std::string path = "/embed/text";
    const json body{{"text", normalized_text}};
    return vector_reply(parse_reply(post(path, body.dump()), path), path);
}

std::vector<double> RemoteProvider::do_zero_shot(const RasterImage& img, std::span<const std::string> labels) const {
    const std::string path = "/zero_shot";
    auto body = image_payload(img);
    body["labels"] = std::vector<std::string>(labels.begin(), labels.end());
    return field<std::vector<double>>(parse_reply(post(path, body.dump()), path), "logits", path);
}

Classification RemoteProvider::do_classify(const RasterImage& img, AttributeKind kind) const {
    const std::string path = "/classify";
    auto body = image_payload(img);
    body["kind"] = std::string(to_string(kind));
    const auto reply = parse_reply(post(path, body.dump()), path);
    return {field<std::string>(reply, "label", path), field<double>(reply, "confidence", path)};
}

std::vector<double> RemoteProvider::do_trend_feature(const RasterImage& img) const {
    const std::string path = "/trend_feature";
    return vector_reply(parse_reply(post(path, image_payload(img).dump()), path), path);
}

ForegroundMask RemoteProvider::do_segment(const RasterImage& img) const {
    const std::string path = "/segment";
    const auto reply = parse_reply(post(path, image_payload(img).dump()), path);
    const auto runs = field<std::vector<std::uint32_t>>(reply, "mask_rle", path);
    try {
        return ForegroundMask::from_rle(field<std::uint32_t>(reply, "width", path),
                                        field<std::uint32_t>(reply, "height", path), runs);
    } catch (const std::invalid_argument& e) {
        throw ProviderError(path + ": " + e.what());
    }
}

std::unique_ptr<Provider> make_provider(const ProviderDescriptor& descriptor) {
    descriptor.validate();
    if (descriptor.kind == ProviderKind::remote) {
        return std::make_unique<RemoteProvider>(*descriptor.endpoint, descriptor.dim);
    }
    if (descriptor.fixture) {
        auto fixture = MockFixture::load(*descriptor.fixture);
        if (fixture.dim() != descriptor.dim) {
            throw std::invalid_argument("fixture dimension " + std::to_string(fixture.dim()) +
                                        " does not match provider dimension " + std::to_string(descriptor.dim));
        }
        return std::make_unique<MockProvider>(std::move(fixture));
    }
    return std::make_unique<MockProvider>(descriptor.dim);
}

} // namespace chartret
