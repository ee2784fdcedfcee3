#include "chartret/provider_server.hpp"

#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "chartret/errors.hpp"

namespace chartret {

using nlohmann::json;

namespace {

RasterImage image_of(const json& body) {
    return decode_image(base64_decode(body.at("png_base64").get<std::string>()));
}

json vector_reply(const EmbeddingVector& v) {
    return json{{"dim", v.size()}, {"values", std::vector<double>(v.begin(), v.end())}};
}

using Handler = std::function<json(const json&)>;

httplib::Server::Handler wrap(Handler handler) {
    return [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
        auto fail = [&res](int status, const std::string& message) {
            res.status = status;
            res.set_content(json{{"error", message}}.dump(), "application/json");
        };
        try {
            const auto body = json::parse(req.body);
            res.set_content(handler(body).dump(), "application/json");
        } catch (const json::exception& e) {
            fail(400, e.what());
        } catch (const ImageDecodeError& e) {
            fail(400, e.what());
        } catch (const std::invalid_argument& e) {
            fail(400, e.what());
        } catch (const std::exception& e) {
            fail(500, e.what());
        }
    };
}

} // namespace

ProviderServer::ProviderServer(const Provider& provider)
    : provider_(provider), server_(std::make_unique<httplib::Server>()) {
    auto& p = provider_;
    server_->Get("/health", [&p](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"status", "ok"}, {"dim", p.dim()}}.dump(), "application/json");
    });
    server_->Post("/embed/image", wrap([&p](const json& b) {
        return vector_reply(p.embed_image(image_of(b)));
    }));
    server_->Post("/embed/text", wrap([&p](const json& b) {
        return vector_reply(p.embed_text(b.at("text").get<std::string>()));
    }));
    server_->Post("/zero_shot", wrap([&p](const json& b) {
        const auto labels = b.at("labels").get<std::vector<std::string>>();
        return json{{"logits", p.zero_shot_logits(image_of(b), labels).logits}};
    }));
    server_->Post("/classify", wrap([&p](const json& b) {
        const auto kind = parse_enum<AttributeKind>(b.at("kind").get<std::string>());
        const auto c = p.classify_primary(image_of(b), kind);
        return json{{"label", c.label}, {"confidence", c.confidence}};
    }));
    server_->Post("/trend_feature", wrap([&p](const json& b) {
        return vector_reply(p.trend_feature(image_of(b)));
    }));
    server_->Post("/segment", wrap([&p](const json& b) {
        const auto mask = p.segment(image_of(b));
        return json{{"width", mask.width()}, {"height", mask.height()}, {"mask_rle", mask.to_rle()}};
    }));
}

ProviderServer::~ProviderServer() { stop(); }

int ProviderServer::start(const std::string& host, int port) {
    if (thread_.joinable()) throw std::logic_error("provider server already running");
    host_ = host;
    port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw std::runtime_error("cannot bind provider server to " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void ProviderServer::listen(const std::string& host, int port) {
    host_ = host;
    port_ = port;
    if (!server_->listen(host, port)) {
        throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
    }
}

void ProviderServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace chartret
