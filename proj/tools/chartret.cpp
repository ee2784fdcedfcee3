#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chartret/annotation.hpp"
#include "chartret/corpus.hpp"
#include "chartret/errors.hpp"
#include "chartret/harness.hpp"
#include "chartret/json_io.hpp"
#include "chartret/mock_provider.hpp"
#include "chartret/provider_server.hpp"
#include "chartret/retrieval.hpp"
#include "chartret/service.hpp"
#include "chartret/synth.hpp"

namespace fs = std::filesystem;
using namespace chartret;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string provider = "mock";
    std::string endpoint;
    std::string fixture;
    std::size_t dim = 0;
    std::string taxonomy;
    std::size_t threads = 1;
};

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

/// Provider dimension: --dim, else the fixture's, else the snapshot's, else 512.
ProviderDescriptor describe_provider(const GlobalOptions& g, std::optional<std::size_t> snapshot_dim = std::nullopt) {
    ProviderDescriptor d;
    d.kind = parse_enum<ProviderKind>(g.provider);
    if (d.kind == ProviderKind::remote) {
        d.endpoint = !g.endpoint.empty() ? std::optional(g.endpoint) : env("CHARTRET_PROVIDER_ENDPOINT");
    }
    if (!g.fixture.empty()) d.fixture = g.fixture;
    if (g.dim != 0) {
        d.dim = g.dim;
    } else if (d.fixture) {
        d.dim = MockFixture::load(*d.fixture).dim();
    } else if (snapshot_dim) {
        d.dim = *snapshot_dim;
    }
    d.validate();
    return d;
}

std::string provider_label(const ProviderDescriptor& d) {
    std::string out(to_string(d.kind));
    if (d.endpoint) out += " " + *d.endpoint;
    if (d.fixture) out += " fixture=" + fs::path(*d.fixture).filename().string();
    return out + " dim=" + std::to_string(d.dim);
}

const Taxonomy& taxonomy_of(const GlobalOptions& g) {
    static std::optional<Taxonomy> loaded;
    if (g.taxonomy.empty()) return Taxonomy::defaults();
    if (!loaded) loaded = Taxonomy::load(g.taxonomy);
    return *loaded;
}

std::int64_t snapshot_timestamp(std::optional<std::int64_t> explicit_ts) {
    if (explicit_ts) return *explicit_ts;
    if (auto v = env("SOURCE_DATE_EPOCH")) return std::stoll(*v);
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chart retrieval engine: annotate, index and retrieve charts by intent"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--provider", g.provider, "Provider backend")->check(CLI::IsMember({"mock", "remote"}));
    app.add_option("--endpoint", g.endpoint, "Remote provider URL (default: $CHARTRET_PROVIDER_ENDPOINT)");
    app.add_option("--fixture", g.fixture, "Mock provider fixture file")->check(CLI::ExistingFile);
    app.add_option("--dim", g.dim, "Embedding dimension");
    app.add_option("--taxonomy", g.taxonomy, "Taxonomy applicability file")->check(CLI::ExistingFile);
    app.add_option("--threads", g.threads, "Scoring threads (0 = all cores)");

    // synth
    auto* synth = app.add_subcommand("synth", "Render a synthetic labeled corpus with a matching mock fixture");
    std::string synth_spec;
    std::string synth_out;
    std::size_t synth_count = 0;
    std::uint64_t synth_seed = 7;
    synth->add_option("--spec", synth_spec, "Synthetic corpus spec (JSON)")->check(CLI::ExistingFile);
    synth->add_option("--count", synth_count, "Charts per type when no spec is given");
    synth->add_option("--seed", synth_seed, "Seed when no spec is given");
    synth->add_option("--out", synth_out, "Output directory")->required();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Build a corpus snapshot from a directory of chart images");
    std::string ingest_images;
    std::string ingest_labels;
    std::string ingest_out;
    std::string ingest_source = "manual";
    std::optional<std::int64_t> ingest_ts;
    ingest->add_option("--images", ingest_images, "Image directory")->required()->check(CLI::ExistingDirectory);
    ingest->add_option("--labels", ingest_labels, "Labels CSV (id,type,color,trend,layout)")->check(CLI::ExistingFile);
    ingest->add_option("--out", ingest_out, "Snapshot directory")->required();
    ingest->add_option("--source", ingest_source, "Record source")->check(CLI::IsMember({"beagle", "manual", "synthetic"}));
    ingest->add_option("--timestamp", ingest_ts, "Snapshot creation time (default: $SOURCE_DATE_EPOCH or now)");

    // annotate
    auto* annotate = app.add_subcommand("annotate", "Print the attributes of one chart");
    std::string annotate_image;
    std::vector<std::string> annotate_ext;
    annotate->add_option("--image", annotate_image, "Chart image")->required()->check(CLI::ExistingFile);
    annotate->add_option("--classifier", annotate_ext, "Extended classifier name:label1,label2,...");

    // retrieve
    auto* retrieve = app.add_subcommand("retrieve", "Retrieve charts similar to a query chart");
    std::string rq_snapshot;
    std::string rq_image;
    std::optional<std::string> rq_prompt;
    std::vector<std::string> rq_attrs;
    std::string rq_ext_labels;
    std::size_t rq_ext_select = 0;
    std::size_t rq_k = 5;
    double rq_nu = 1.0;
    double rq_mu = 5.0;
    std::string rq_aggregation = "mean";
    bool rq_json = false;
    retrieve->add_option("--snapshot", rq_snapshot, "Snapshot directory")->required()->check(CLI::ExistingDirectory);
    retrieve->add_option("--image", rq_image, "Query chart image")->required()->check(CLI::ExistingFile);
    retrieve->add_option("--prompt", rq_prompt, "Text prompt");
    retrieve->add_option("--attr", rq_attrs, "Intent attribute kind=value (repeatable)");
    retrieve->add_option("--ext-labels", rq_ext_labels, "Extended classifier labels, comma separated");
    retrieve->add_option("--ext-select", rq_ext_select, "Index of the wanted extended label");
    retrieve->add_option("--k", rq_k, "Number of results")->check(CLI::PositiveNumber);
    retrieve->add_option("--nu", rq_nu, "Intent score weight");
    retrieve->add_option("--mu", rq_mu, "Feature matching weight");
    retrieve->add_option("--aggregation", rq_aggregation, "Intent aggregation")->check(CLI::IsMember({"mean", "sum"}));
    retrieve->add_flag("--json", rq_json, "Print JSON");

    // eval
    auto* eval = app.add_subcommand("eval", "Top-K F1 of attribute matches over labeled queries");
    std::string ev_snapshot;
    std::string ev_queries;
    std::string ev_query_images;
    std::string ev_k = "3,5,10";
    std::string ev_out;
    bool ev_json = false;
    bool ev_no_annotation = false;
    eval->add_option("--snapshot", ev_snapshot, "Snapshot directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--queries", ev_queries, "Query labels CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--query-images", ev_query_images, "Query image directory (default: next to the CSV)");
    eval->add_option("--k", ev_k, "Comma-separated K values");
    eval->add_option("--out", ev_out, "Write the JSON report here");
    eval->add_flag("--json", ev_json, "Print JSON instead of a table");
    eval->add_flag("--no-annotation", ev_no_annotation, "Skip annotation accuracy");

    // stats
    auto* stats = app.add_subcommand("stats", "Corpus statistics");
    std::string st_snapshot;
    bool st_json = false;
    stats->add_option("--snapshot", st_snapshot, "Snapshot directory")->required()->check(CLI::ExistingDirectory);
    stats->add_flag("--json", st_json, "Print JSON");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::string sv_config;
    std::optional<std::string> sv_host;
    std::optional<int> sv_port;
    std::optional<std::string> sv_snapshot;
    serve->add_option("--config", sv_config, "Service config (JSON)")->check(CLI::ExistingFile);
    serve->add_option("--host", sv_host, "Bind address");
    serve->add_option("--port", sv_port, "Port");
    serve->add_option("--snapshot", sv_snapshot, "Snapshot directory");

    // provider-serve
    auto* pserve = app.add_subcommand("provider-serve", "Serve the configured provider over the wire protocol");
    std::string ps_host = "127.0.0.1";
    int ps_port = 8090;
    pserve->add_option("--host", ps_host, "Bind address");
    pserve->add_option("--port", ps_port, "Port");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto& taxonomy = taxonomy_of(g);

        if (*synth) {
            SynthSpec spec = !synth_spec.empty() ? SynthSpec::load(synth_spec)
                             : synth_count > 0   ? SynthSpec::uniform(synth_count, synth_seed)
                                                 : throw std::invalid_argument("synth needs --spec or --count");
            if (g.dim != 0) spec.dim = g.dim;
            const auto corpus = generate_synthetic(spec);
            write_synthetic(corpus, spec, synth_out);
            std::cout << "wrote " << corpus.corpus.size() << " corpus charts and " << corpus.queries.size()
                      << " queries to " << synth_out << '\n';
            return 0;
        }

        if (*ingest) {
            const auto descriptor = describe_provider(g);
            const auto provider = make_provider(descriptor);
            std::vector<LabelRow> labels;
            if (!ingest_labels.empty()) labels = read_labels_csv(ingest_labels, taxonomy);
            CorpusBuilder builder(provider->dim(), taxonomy);
            ingest_directory(builder, ingest_images, ingest_labels.empty() ? nullptr : &labels, *provider, ingest_out,
                             parse_enum<RecordSource>(ingest_source));
            const auto snapshot = builder.build(snapshot_timestamp(ingest_ts), ingest_out);
            save_snapshot(*snapshot, ingest_out);
            std::cout << "snapshot " << ingest_out << ": " << snapshot->size() << " records, dim " << snapshot->dim()
                      << '\n';
            return 0;
        }

        if (*annotate) {
            const auto provider = make_provider(describe_provider(g));
            std::vector<ExtendedClassifierSpec> specs;
            for (const auto& item : annotate_ext) {
                const auto colon = item.find(':');
                if (colon == std::string::npos) throw std::invalid_argument("--classifier expects name:label1,label2");
                ExtendedClassifierSpec spec{item.substr(0, colon), split_list(item.substr(colon + 1)), 0};
                spec.validate();
                specs.push_back(std::move(spec));
            }
            const Annotator annotator(*provider, taxonomy);
            std::cout << json(annotator.annotate(load_image(annotate_image), specs)).dump(2) << '\n';
            return 0;
        }

        if (*retrieve) {
            const auto snapshot = load_snapshot(rq_snapshot, taxonomy);
            const auto provider = make_provider(describe_provider(g, snapshot->dim()));
            RetrievalRequest request;
            request.query = load_image(rq_image);
            request.prompt = rq_prompt;
            request.k = rq_k;
            for (const auto& item : rq_attrs) {
                const auto eq = item.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("--attr expects kind=value, got '" + item + "'");
                const auto kind = item.substr(0, eq);
                const auto value = item.substr(eq + 1);
                if (auto k = try_parse<AttributeKind>(kind)) {
                    request.intent.set_label(*k, value);
                } else {
                    request.intent.extended = ExtendedRequirement{kind, value};
                }
            }
            if (!rq_ext_labels.empty()) request.extended = ExtendedClassifierSpec{"custom", split_list(rq_ext_labels), rq_ext_select};
            request.validate();
            ScoringWeights weights{rq_nu, rq_mu, parse_enum<IntentAggregation>(rq_aggregation)};
            RetrieverOptions options;
            options.threads = g.threads;
            const Retriever retriever(*provider, options);
            const auto ranked = retriever.retrieve(*snapshot, request, weights);
            if (rq_json) {
                std::cout << ranked_result_json(ranked).dump(2) << '\n';
                return 0;
            }
            std::cout << ranked.candidates << " candidates\n";
            std::cout << "rank  id                          total        s_global  s_intent  s_match\n";
            for (std::size_t i = 0; i < ranked.items.size(); ++i) {
                const auto& item = ranked.items[i];
                std::printf("%-5zu %-27s %-12.6g %-9.4f %-9.4f %-9.4f\n", i + 1, item.record.id.c_str(),
                            item.scores.total, item.scores.s_global, item.scores.s_intent, item.scores.s_match);
            }
            return 0;
        }

        if (*eval) {
            const auto snapshot = load_snapshot(ev_snapshot, taxonomy);
            const auto descriptor = describe_provider(g, snapshot->dim());
            const auto provider = make_provider(descriptor);
            const fs::path images_dir = ev_query_images.empty() ? fs::path(ev_queries).parent_path() : fs::path(ev_query_images);
            const auto queries = load_labeled_queries(ev_queries, images_dir, taxonomy);
            EvalOptions options;
            options.k_values = parse_k_list(ev_k);
            options.corpus_descriptor = fs::path(ev_snapshot).filename().string() + " (" +
                                        std::to_string(snapshot->size()) + " charts)";
            options.provider_descriptor = provider_label(descriptor);
            RetrieverOptions ropts;
            ropts.threads = g.threads;
            const Retriever retriever(*provider, ropts);
            auto report = evaluate_retrieval(retriever, *snapshot, queries, options);
            if (!ev_no_annotation) report.annotation = evaluate_annotation(Annotator(*provider, taxonomy), queries);
            if (!ev_out.empty()) write_text(ev_out, json(report).dump(2) + "\n");
            std::cout << (ev_json ? json(report).dump(2) + "\n" : format_eval_table(report));
            return 0;
        }

        if (*stats) {
            const auto snapshot = load_snapshot(st_snapshot, taxonomy);
            const auto s = corpus_stats(*snapshot);
            std::cout << (st_json ? json(s).dump(2) + "\n" : format_stats_table(s));
            return 0;
        }

        if (*serve) {
            ServiceConfig config = sv_config.empty() ? ServiceConfig{} : ServiceConfig::load(sv_config);
            if (!g.fixture.empty() || g.provider != "mock" || g.dim != 0) config.provider = describe_provider(g);
            config.apply_env();
            if (sv_host) config.host = *sv_host;
            if (sv_port) config.port = *sv_port;
            if (sv_snapshot) config.snapshot_path = *sv_snapshot;
            config.threads = g.threads;
            config.validate();
            ApiSession session(config, make_provider(config.provider), taxonomy);
            ApiServer server(session);
            std::cerr << "serving on http://" << config.host << ':' << config.port << '\n';
            server.listen(config.host, config.port);
            return 0;
        }

        if (*pserve) {
            const auto provider = make_provider(describe_provider(g));
            ProviderServer server(*provider);
            std::cerr << "provider (dim " << provider->dim() << ") on http://" << ps_host << ':' << ps_port << '\n';
            server.listen(ps_host, ps_port);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
