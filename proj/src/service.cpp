#include "chartret/service.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "chartret/errors.hpp"
#include "chartret/json_io.hpp"

namespace chartret {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ServiceConfig ServiceConfig::from_json_text(std::string_view text) {
    ServiceConfig c;
    try {
        const auto j = json::parse(text);
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        if (j.contains("snapshot") && !j["snapshot"].is_null()) c.snapshot_path = j["snapshot"].get<std::string>();
        if (j.contains("image_store") && !j["image_store"].is_null()) {
            c.image_store = j["image_store"].get<std::string>();
        }
        c.weights.nu = j.value("nu", c.weights.nu);
        c.weights.mu = j.value("mu", c.weights.mu);
        if (j.contains("aggregation")) {
            c.weights.aggregation = parse_enum<IntentAggregation>(j["aggregation"].get<std::string>());
        }
        c.default_k = j.value("k", c.default_k);
        c.threads = j.value("threads", c.threads);
        if (auto it = j.find("provider"); it != j.end()) {
            const auto& p = *it;
            c.provider.kind = parse_enum<ProviderKind>(p.value("kind", std::string("mock")));
            if (p.contains("endpoint") && !p["endpoint"].is_null()) c.provider.endpoint = p["endpoint"].get<std::string>();
            c.provider.dim = p.value("dim", c.provider.dim);
            if (p.contains("fixture") && !p["fixture"].is_null()) c.provider.fixture = p["fixture"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("service config: ") + e.what());
    }
    c.validate();
    return c;
}

ServiceConfig ServiceConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open service config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

void ServiceConfig::apply_env() {
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (v == nullptr || *v == '\0') return std::nullopt;
        return std::string(v);
    };
    if (auto v = env("CHARTRET_HOST")) host = *v;
    if (auto v = env("CHARTRET_PORT")) port = std::stoi(*v);
    if (auto v = env("CHARTRET_SNAPSHOT")) snapshot_path = *v;
    if (auto v = env("CHARTRET_IMAGE_STORE")) image_store = *v;
    if (auto v = env("CHARTRET_NU")) weights.nu = std::stod(*v);
    if (auto v = env("CHARTRET_MU")) weights.mu = std::stod(*v);
    if (auto v = env("CHARTRET_PROVIDER_ENDPOINT")) {
        provider.kind = ProviderKind::remote;
        provider.endpoint = *v;
        provider.fixture.reset();
    }
    validate();
}

void ServiceConfig::validate() const {
    if (port < 0 || port > 65535) throw std::invalid_argument("service config: port out of range");
    if (default_k == 0) throw std::invalid_argument("service config: k must be positive");
    provider.validate();
}

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

namespace {

std::int64_t now_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

} // namespace

ApiSession::ApiSession(ServiceConfig config, std::unique_ptr<Provider> provider, const Taxonomy& taxonomy)
    : config_(std::move(config)), provider_(std::move(provider)), taxonomy_(taxonomy) {
    if (!provider_) throw std::invalid_argument("ApiSession needs a provider");
    if (config_.snapshot_path && fs::exists(*config_.snapshot_path / kManifestFile)) {
        snapshot_ = load_snapshot(*config_.snapshot_path, taxonomy_);
    }
}

SnapshotPtr ApiSession::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

void ApiSession::swap_snapshot(SnapshotPtr next) {
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(next);
}

SnapshotPtr ApiSession::reload(const std::optional<fs::path>& path) {
    const auto target = path ? path : config_.snapshot_path;
    if (!target) throw std::invalid_argument("no snapshot path configured");
    auto next = load_snapshot(*target, taxonomy_);
    if (next->dim() != provider_->dim()) {
        throw std::invalid_argument("snapshot dimension " + std::to_string(next->dim()) +
                                    " does not match provider dimension " + std::to_string(provider_->dim()));
    }
    swap_snapshot(next);
    return next;
}

void ApiSession::register_classifier(const ExtendedClassifierSpec& spec) {
    spec.validate();
    std::unique_lock lock(registry_mutex_);
    if (!registry_.emplace(spec.name, spec).second) {
        throw DuplicateIdError("classifier '" + spec.name + "' is already registered");
    }
}

std::optional<ExtendedClassifierSpec> ApiSession::find_classifier(const std::string& name) const {
    std::shared_lock lock(registry_mutex_);
    auto it = registry_.find(name);
    if (it == registry_.end()) return std::nullopt;
    return it->second;
}

std::vector<ExtendedClassifierSpec> ApiSession::classifiers() const {
    std::shared_lock lock(registry_mutex_);
    std::vector<ExtendedClassifierSpec> out;
    for (const auto& [name, spec] : registry_) out.push_back(spec);
    return out;
}

ChartRecord ApiSession::ingest_chart(const RasterImage& img, ImageIngest request) {
    std::lock_guard ingest_lock(ingest_mutex_);
    const auto current = snapshot();
    auto builder = current ? CorpusBuilder(*current, taxonomy_) : CorpusBuilder(provider_->dim(), taxonomy_);
    if (builder.contains(request.id)) throw DuplicateIdError("chart id '" + request.id + "' already exists");

    const fs::path base_dir = config_.snapshot_path ? *config_.snapshot_path
                              : current            ? current->base_dir()
                                                   : fs::path{};
    const fs::path store = config_.image_store ? *config_.image_store : base_dir / "images";
    fs::create_directories(store);
    const fs::path image_path = store / (request.id + ".png");
    save_png(img, image_path);
    request.image_ref = base_dir.empty() ? fs::absolute(image_path).generic_string()
                                         : fs::relative(fs::absolute(image_path), fs::absolute(base_dir)).generic_string();

    const auto& added = builder.ingest(img, std::move(request), *provider_);
    const std::string id = added.id;
    auto next = builder.build(now_seconds(), base_dir);
    if (config_.snapshot_path) save_snapshot(*next, *config_.snapshot_path);
    swap_snapshot(next);
    return *next->find(id);
}

// ---------------------------------------------------------------------------
// HTTP
// ---------------------------------------------------------------------------

namespace {

class HttpError : public std::runtime_error {
public:
    HttpError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

/// Maps the engine's exceptions onto status codes.
httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
        auto fail = [&res](int status, const std::string& message) {
            send_json(res, status, json{{"error", message}});
        };
        try {
            fn(req, res);
        } catch (const HttpError& e) {
            fail(e.status(), e.what());
        } catch (const DuplicateIdError& e) {
            fail(409, e.what());
        } catch (const ImageDecodeError& e) {
            fail(400, std::string("invalid image: ") + e.what());
        } catch (const StageError& e) {
            fail(502, e.what());
        } catch (const ProviderError& e) {
            fail(502, e.what());
        } catch (const json::exception& e) {
            fail(400, e.what());
        } catch (const std::invalid_argument& e) {
            fail(400, e.what());
        } catch (const std::out_of_range& e) {
            fail(400, e.what());
        } catch (const std::exception& e) {
            fail(500, e.what());
        }
    };
}

/// Parsed request: JSON fields plus the uploaded image, from either a JSON
/// body (`png_base64`) or a multipart form (`image` file, JSON in `field`).
struct Upload {
    json fields = json::object();
    std::optional<RasterImage> image;
};

Upload read_upload(const httplib::Request& req, const char* json_field) {
    Upload up;
    if (req.is_multipart_form_data()) {
        if (req.has_file(json_field)) {
            const auto& text = req.get_file_value(json_field).content;
            if (!text.empty()) up.fields = json::parse(text);
        }
        for (const auto& [name, file] : req.files) {
            if (name == "image" || name == json_field) continue;
            if (!up.fields.contains(name)) up.fields[name] = file.content;
        }
        if (req.has_file("image")) {
            const auto& content = req.get_file_value("image").content;
            up.image = decode_image(std::span(reinterpret_cast<const std::uint8_t*>(content.data()), content.size()));
        }
    } else if (!req.body.empty()) {
        up.fields = json::parse(req.body);
    }
    if (!up.fields.is_object()) throw std::invalid_argument("request body must be a JSON object");
    if (!up.image) {
        for (const char* key : {"png_base64", "image_base64"}) {
            if (up.fields.contains(key)) {
                up.image = decode_image(base64_decode(up.fields.at(key).get<std::string>()));
                break;
            }
        }
    }
    return up;
}

RasterImage require_image(const Upload& up) {
    if (!up.image) throw HttpError(400, "invalid image: no image supplied");
    return *up.image;
}

/// Classifier names as a JSON array or a comma-separated string.
std::vector<ExtendedClassifierSpec> resolve_classifiers(const ApiSession& session, const json& fields) {
    std::vector<std::string> names;
    if (auto it = fields.find("classifiers"); it != fields.end() && !it->is_null()) {
        if (it->is_string()) {
            std::istringstream in(it->get<std::string>());
            std::string name;
            while (std::getline(in, name, ',')) {
                if (!name.empty()) names.push_back(name);
            }
        } else {
            names = it->get<std::vector<std::string>>();
        }
    }
    std::vector<ExtendedClassifierSpec> specs;
    for (const auto& name : names) {
        auto spec = session.find_classifier(name);
        if (!spec) throw HttpError(404, "unknown classifier '" + name + "'");
        specs.push_back(*spec);
    }
    return specs;
}

/// "extended": {"classifier": name, "label" | "selected_index"} or
/// {"name"?, "labels": [...], "selected_index"}.
ExtendedClassifierSpec resolve_extended(const ApiSession& session, const json& j) {
    ExtendedClassifierSpec spec;
    if (j.contains("classifier")) {
        const auto name = j.at("classifier").get<std::string>();
        auto found = session.find_classifier(name);
        if (!found) throw HttpError(404, "unknown classifier '" + name + "'");
        spec = *found;
    } else {
        spec.name = j.value("name", std::string("custom"));
        spec.labels = j.at("labels").get<std::vector<std::string>>();
    }
    if (j.contains("label")) {
        const auto label = j.at("label").get<std::string>();
        auto it = std::find(spec.labels.begin(), spec.labels.end(), label);
        if (it == spec.labels.end()) throw std::invalid_argument("label '" + label + "' is not offered by " + spec.name);
        spec.selected_index = static_cast<std::size_t>(it - spec.labels.begin());
    } else if (j.contains("selected_index")) {
        spec.selected_index = j.at("selected_index").get<std::size_t>();
    }
    spec.validate();
    return spec;
}

ScoringWeights read_weights(const ScoringWeights& defaults, const json& fields) {
    ScoringWeights w = defaults;
    if (auto it = fields.find("weights"); it != fields.end() && !it->is_null()) {
        w.nu = it->value("nu", w.nu);
        w.mu = it->value("mu", w.mu);
        if (it->contains("aggregation")) {
            w.aggregation = parse_enum<IntentAggregation>(it->at("aggregation").get<std::string>());
        }
    }
    if (!std::isfinite(w.nu) || !std::isfinite(w.mu)) throw std::invalid_argument("weights must be finite");
    return w;
}

std::string content_type_for(const fs::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    return "image/png";
}

} // namespace

ApiServer::ApiServer(ApiSession& session) : session_(session), server_(std::make_unique<httplib::Server>()) {
    auto& s = session_;
    server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Headers", "Content-Type"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server_->Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server_->Get("/v1/health", [&s](const httplib::Request&, httplib::Response& res) {
        const auto snap = s.snapshot();
        send_json(res, 200,
                  json{{"status", "ok"}, {"dim", s.provider().dim()}, {"records", snap ? snap->size() : 0}});
    });

    server_->Post("/v1/annotate", guarded([&s](const httplib::Request& req, httplib::Response& res) {
        const auto up = read_upload(req, "request");
        const auto img = require_image(up);
        const auto specs = resolve_classifiers(s, up.fields);
        const Annotator annotator(s.provider(), s.taxonomy());
        send_json(res, 200, json(annotator.annotate(img, specs)));
    }));

    server_->Post("/v1/retrieve", guarded([&s](const httplib::Request& req, httplib::Response& res) {
        const auto up = read_upload(req, "request");
        const auto& f = up.fields;
        RetrievalRequest request;
        request.query = require_image(up);
        if (auto it = f.find("attributes"); it != f.end() && !it->is_null()) {
            request.intent = it->get<AttributeSelection>();
        }
        if (auto it = f.find("prompt"); it != f.end() && !it->is_null()) request.prompt = it->get<std::string>();
        if (auto it = f.find("extended"); it != f.end() && !it->is_null()) request.extended = resolve_extended(s, *it);
        request.k = f.value("k", s.config().default_k);
        request.validate();
        const auto weights = read_weights(s.config().weights, f);

        const auto snap = s.snapshot();
        if (!snap) throw HttpError(409, "no corpus snapshot is loaded");
        RetrieverOptions options;
        options.threads = s.config().threads;
        const Retriever retriever(s.provider(), options);
        const auto ranked = retriever.retrieve(*snap, request, weights);
        auto body = ranked_result_json(ranked, "/v1/images/");
        body["k"] = request.k;
        body["weights"] = weights;
        send_json(res, 200, body);
    }));

    server_->Post("/v1/classifiers", guarded([&s](const httplib::Request& req, httplib::Response& res) {
        const auto spec = json::parse(req.body).get<ExtendedClassifierSpec>();
        s.register_classifier(spec);
        send_json(res, 201, json{{"name", spec.name}});
    }));

    server_->Get("/v1/classifiers", [&s](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"classifiers", s.classifiers()}});
    });

    server_->Post("/v1/corpus/charts", guarded([&s](const httplib::Request& req, httplib::Response& res) {
        const auto up = read_upload(req, "record");
        const auto img = require_image(up);
        const auto& f = up.fields;
        ImageIngest ingest;
        ingest.id = f.at("id").get<std::string>();
        if (ingest.id.empty()) throw std::invalid_argument("chart id must not be empty");
        if (auto it = f.find("labels"); it != f.end() && !it->is_null()) ingest.labels = it->get<AttributeSet>();
        if (f.contains("source")) ingest.source = parse_enum<RecordSource>(f.at("source").get<std::string>());
        if (f.contains("metadata")) ingest.metadata = f.at("metadata").get<std::map<std::string, std::string>>();
        ingest.extended = resolve_classifiers(s, f);
        const auto record = s.ingest_chart(img, std::move(ingest));
        send_json(res, 201,
                  json{{"id", record.id}, {"attributes", record.attributes}, {"records", s.snapshot()->size()}});
    }));

    server_->Get("/v1/corpus/stats", guarded([&s](const httplib::Request&, httplib::Response& res) {
        const auto snap = s.snapshot();
        if (!snap) throw HttpError(409, "no corpus snapshot is loaded");
        send_json(res, 200, json(corpus_stats(*snap)));
    }));

    server_->Post("/v1/corpus/reload", guarded([&s](const httplib::Request& req, httplib::Response& res) {
        std::optional<fs::path> path;
        if (!req.body.empty()) {
            const auto body = json::parse(req.body);
            if (body.contains("path")) path = body.at("path").get<std::string>();
        }
        std::shared_ptr<const CorpusSnapshot> next;
        try {
            next = s.reload(path);
        } catch (const SnapshotFormatError& e) {
            throw HttpError(422, e.what());
        }
        send_json(res, 200, json{{"records", next->size()}, {"created", next->created()}});
    }));

    server_->Get(R"(/v1/images/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
        const auto snap = s.snapshot();
        if (!snap) throw HttpError(409, "no corpus snapshot is loaded");
        const auto* record = snap->find(req.matches[1].str());
        if (!record) throw HttpError(404, "unknown chart id");
        if (record->image_ref.rfind("http://", 0) == 0 || record->image_ref.rfind("https://", 0) == 0) {
            res.set_redirect(record->image_ref);
            return;
        }
        const auto path = snap->resolve_image(*record);
        if (!fs::exists(path)) throw HttpError(404, "image file missing for '" + record->id + "'");
        const auto bytes = read_file_bytes(path);
        res.set_content(std::string(bytes.begin(), bytes.end()), content_type_for(path));
    }));
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
    if (thread_.joinable()) throw std::logic_error("API server already running");
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw std::runtime_error("cannot bind API server to " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void ApiServer::listen(const std::string& host, int port) {
    if (!server_->listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void ApiServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace chartret
