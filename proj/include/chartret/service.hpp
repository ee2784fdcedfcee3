#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "chartret/annotation.hpp"
#include "chartret/corpus.hpp"
#include "chartret/retrieval.hpp"

namespace httplib {
class Server;
}

namespace chartret {

/// Service settings. JSON form (every key optional):
///
///   { "host": "127.0.0.1", "port": 8080, "snapshot": "data/snapshot",
///     "image_store": "data/images", "nu": 1.0, "mu": 5.0, "k": 5, "threads": 1,
///     "provider": { "kind": "mock", "endpoint": null, "dim": 512, "fixture": null } }
///
/// Environment overrides: CHARTRET_HOST, CHARTRET_PORT, CHARTRET_SNAPSHOT,
/// CHARTRET_IMAGE_STORE, CHARTRET_NU, CHARTRET_MU and CHARTRET_PROVIDER_ENDPOINT
/// (which also selects the remote provider).
struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> snapshot_path;
    /// Where uploaded chart images are stored; defaults to `<snapshot>/images`.
    std::optional<std::filesystem::path> image_store;
    ScoringWeights weights;
    std::size_t default_k = 5;
    std::size_t threads = 1;
    ProviderDescriptor provider;

    static ServiceConfig from_json_text(std::string_view text);
    static ServiceConfig load(const std::filesystem::path& path);
    void apply_env();
    void validate() const;
};

/// Shared state of the API: the active snapshot and the classifier registry.
/// Readers take a snapshot reference and keep it for the whole request, so a
/// concurrent reload or ingest never mixes two corpora in one response.
class ApiSession {
public:
    ApiSession(ServiceConfig config, std::unique_ptr<Provider> provider,
               const Taxonomy& taxonomy = Taxonomy::defaults());

    const ServiceConfig& config() const noexcept { return config_; }
    const Provider& provider() const noexcept { return *provider_; }
    const Taxonomy& taxonomy() const noexcept { return taxonomy_; }

    /// Current snapshot; null before the first load or ingest.
    SnapshotPtr snapshot() const;
    void swap_snapshot(SnapshotPtr next);

    /// Loads `path` (or the configured snapshot path) and swaps it in. The
    /// previous snapshot stays active when loading fails.
    SnapshotPtr reload(const std::optional<std::filesystem::path>& path = std::nullopt);

    /// Throws std::invalid_argument for malformed specs and DuplicateIdError
    /// for a name already registered.
    void register_classifier(const ExtendedClassifierSpec& spec);
    std::optional<ExtendedClassifierSpec> find_classifier(const std::string& name) const;
    std::vector<ExtendedClassifierSpec> classifiers() const;

    /// Adds one chart: stores the image, ingests it into a copy of the
    /// current snapshot, persists the copy when a snapshot path is configured
    /// and swaps it in. Throws DuplicateIdError when the id exists.
    ChartRecord ingest_chart(const RasterImage& img, ImageIngest request);

private:
    ServiceConfig config_;
    std::unique_ptr<Provider> provider_;
    const Taxonomy& taxonomy_;

    mutable std::mutex snapshot_mutex_;
    SnapshotPtr snapshot_;
    std::mutex ingest_mutex_;

    mutable std::shared_mutex registry_mutex_;
    std::map<std::string, ExtendedClassifierSpec> registry_;
};

/// HTTP+JSON v1 API over an ApiSession.
///
///   POST /v1/annotate        image (multipart "image" or JSON "png_base64"), classifiers -> AnnotationResult
///   POST /v1/retrieve        image, attributes, prompt, extended, k, weights -> ranked results
///   POST /v1/classifiers     {"name", "labels", "selected_index"} -> 201
///   GET  /v1/classifiers
///   POST /v1/corpus/charts   image plus {"id", "labels", "source", "metadata", "classifiers"} -> 201
///   GET  /v1/corpus/stats
///   POST /v1/corpus/reload   optional {"path"}
///   GET  /v1/images/{id}
///   GET  /v1/health
class ApiServer {
public:
    explicit ApiServer(ApiSession& session);
    ~ApiServer();

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Blocks serving on the calling thread.
    void listen(const std::string& host, int port);
    void stop();

private:
    ApiSession& session_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

} // namespace chartret
