#include <algorithm>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdrq/availability.hpp"
#include "sdrq/conditions.hpp"
#include "sdrq/error.hpp"
#include "sdrq/evaluate.hpp"
#include "sdrq/fixtures.hpp"
#include "sdrq/json_export.hpp"
#include "sdrq/relations.hpp"
#include "sdrq/service.hpp"
#include "sdrq/workspace.hpp"

namespace fs = std::filesystem;
using namespace sdrq;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

struct Globals {
    std::string workspace = ".";
    std::string provider = "toy";
    std::string embeddings;
    std::string url;
    int dimension = 64;

    WorkspaceOptions options() const {
        WorkspaceOptions o;
        if (provider == "toy") {
            o.provider = ProviderKind::ToyEncoder;
        } else if (provider == "file") {
            o.provider = ProviderKind::File;
        } else if (provider == "remote") {
            o.provider = ProviderKind::RemoteService;
        } else {
            throw UsageError("--provider must be toy, file or remote");
        }
        o.embeddings = embeddings;
        o.url = url;
        o.dimension = dimension;
        return o;
    }

    Workspace open() const { return open_workspace(workspace, options()); }
};

MatrixX<double> random_embeddings(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    MatrixX<double> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    }
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Query engine for ex-post harmonized survey data"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--workspace,-w", g.workspace, "Workspace directory")->capture_default_str();
    app.add_option("--provider", g.provider, "Embedding provider: toy, file or remote")->capture_default_str();
    app.add_option("--embeddings", g.embeddings, "SDRE embedding file for the file provider");
    app.add_option("--url", g.url, "Embedding service URL for the remote provider");
    app.add_option("--dim", g.dimension, "Embedding dimension for the remote provider")->capture_default_str();

    std::function<void()> run;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate a dataset and copy it into a workspace");
    std::string data_path, meta_path, out_dir, ingest_embeddings;
    ingest->add_option("--data", data_path, "Data CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--meta", meta_path, "Metadata JSON")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", out_dir, "Workspace directory to create")->required();
    ingest->add_option("--embedding-file", ingest_embeddings, "SDRE table to copy")->check(CLI::ExistingFile);
    ingest->callback([&] {
        run = [&] {
            const auto ds = load_dataset(data_path, meta_path);
            fs::create_directories(out_dir);
            save_dataset(ds, fs::path(out_dir) / kDataFile, fs::path(out_dir) / kMetaFile);
            if (!ingest_embeddings.empty()) {
                const auto table = read_embedding_file(ingest_embeddings);
                if (table.count != ds.questions().size()) {
                    throw Error(ErrorCode::DimensionMismatch, "embedding table has " + std::to_string(table.count) +
                                                                  " rows for " +
                                                                  std::to_string(ds.questions().size()) + " questions");
                }
                write_embedding_file(fs::path(out_dir) / kEmbeddingFile, table);
            }
            emit({{"workspace", out_dir},
                  {"rows", ds.rows()},
                  {"variables", ds.variables().size()},
                  {"questions", ds.questions().size()}});
        };
    });

    // generate-fixture
    auto* gen = app.add_subcommand("generate-fixture", "Write the synthetic fixture into a workspace");
    fixtures::FixtureSpec spec;
    std::string gen_out;
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
    gen->add_option("--embedding-dim", spec.embedding_dim, "Also write a class-clustered SDRE table");
    gen->callback([&] {
        run = [&] {
            const auto files = fixtures::generate(spec);
            fixtures::write_files(files, gen_out);
            const auto ds = load_dataset_from_strings(files.data_csv, files.metadata_json);
            emit({{"workspace", gen_out},
                  {"seed", spec.seed},
                  {"rows", ds.rows()},
                  {"questions", ds.questions().size()},
                  {"embeddings", files.embeddings.has_value()}});
        };
    });

    // train-head
    auto* train = app.add_subcommand("train-head", "Train the classification head and store it");
    TrainOptions topts;
    train->add_option("--epochs", topts.epochs)->capture_default_str();
    train->add_option("--batch", topts.batch_size)->capture_default_str();
    train->add_option("--lr", topts.learning_rate)->capture_default_str();
    train->add_option("--split", topts.split, "Training fraction")->capture_default_str();
    train->add_option("--seed", topts.seed, "Shuffle seed")->capture_default_str();
    train->callback([&] {
        run = [&] {
            auto ws = g.open();
            ws.head = nullptr;
            const auto head = train_workspace_head(ws, topts);
            write_text_file(fs::path(g.workspace) / kHeadFile, head_to_json(head));
            Json log = Json::array();
            for (const auto& e : head.training_log) {
                log.push_back({{"epoch", e.epoch},
                               {"train_loss", e.train_loss},
                               {"validation_loss", e.validation_loss},
                               {"validation_accuracy", e.validation_accuracy}});
            }
            emit({{"classes", head.classes()},
                  {"config_hash", head.config_hash},
                  {"initial_validation_loss", head.initial_validation_loss},
                  {"training_log", log}});
        };
    });

    // qbq
    auto* qbq = app.add_subcommand("qbq", "Recommend target variables for a research question");
    std::string text;
    int k = 10;
    qbq->add_option("--text", text, "Research question")->required();
    qbq->add_option("--k", k, "Number of soft neighbours")->capture_default_str()->check(CLI::PositiveNumber);
    qbq->callback([&] {
        run = [&] {
            const auto ws = g.open();
            if (ws.head) {
                emit(recommendation_json(ws.recommender->recommend(text, k)));
            } else {
                std::cerr << "no trained head; serving soft recommendation only\n";
                emit({{"hard", nullptr}, {"soft", neighbors_json(ws.recommender->soft(text, k))}});
            }
        };
    });

    // qbc
    auto* qbc = app.add_subcommand("qbc", "Profile per-year availability of target variables");
    std::vector<std::string> filters;
    std::string targets, level = "micro", sort, flags;
    bool unfiltered = false;
    qbc->add_option("--filter", filters, "Condition such as year>=2000 (repeatable)");
    qbc->add_option("--targets", targets, "Comma-separated target variables")->required();
    qbc->add_option("--level", level, "micro or macro")->capture_default_str()->check(CLI::IsMember({"micro", "macro"}));
    qbc->add_option("--sort", sort, "availability or quality")->check(CLI::IsMember({"availability", "quality"}));
    qbc->add_option("--quality-flags", flags, "Comma-separated quality-control variables");
    qbc->add_flag("--quality-unfiltered", unfiltered, "Score survey quality over all rows");
    qbc->callback([&] {
        run = [&] {
            const auto ws = g.open();
            AvailabilityQuery q;
            q.conditions = parse_conditions(filters, *ws.dataset);
            q.targets = split_list(targets);
            q.level = *parse_level(level);
            if (!flags.empty()) q.quality_flags = split_list(flags);
            q.quality_unfiltered = unfiltered;
            const auto profile = availability_profile(*ws.dataset, q);
            std::optional<std::vector<std::string>> order;
            if (!sort.empty()) order = sort_surveys(profile, *parse_sort_method(sort));
            emit(profile_json(profile, order));
        };
    });

    // qbr
    auto* qbr = app.add_subcommand("qbr", "Correlation matrix or relation network of target variables");
    std::vector<std::string> qbr_filters;
    std::string qbr_targets, pair;
    qbr->add_option("--filter", qbr_filters, "Condition (repeatable)");
    qbr->add_option("--targets", qbr_targets, "Comma-separated target variables");
    qbr->add_option("--pair", pair, "A,B: relation network of one target pair");
    qbr->callback([&] {
        const auto list = split_list(qbr_targets);
        const auto p = split_list(pair);
        if (!pair.empty() && p.size() != 2) throw CLI::ValidationError("--pair", "expects exactly two targets A,B");
        if (pair.empty() && list.size() < 2) throw CLI::ValidationError("--targets", "needs at least two targets");
        run = [&, list, p] {
            const auto ws = g.open();
            const auto conditions = parse_conditions(qbr_filters, *ws.dataset);
            if (!p.empty()) {
                emit(network_json(relation_network(*ws.dataset, conditions, p[0], p[1])));
            } else {
                emit(matrix_json(correlation_matrix(*ws.dataset, conditions, list)));
            }
        };
    });

    // project
    auto* project = app.add_subcommand("project", "Project the question corpus to 2-D");
    TsneParams tparams;
    std::vector<std::string> inputs;
    int update_iterations = 100;
    project->add_option("--iterations", tparams.iterations)->capture_default_str()->check(CLI::PositiveNumber);
    project->add_option("--perplexity", tparams.perplexity)->capture_default_str();
    project->add_option("--seed", tparams.seed)->capture_default_str();
    project->add_option("--text", inputs, "Insert a query point with a warm-start update (repeatable)");
    project->add_option("--update-iterations", update_iterations)->capture_default_str()->check(CLI::PositiveNumber);
    project->callback([&] {
        run = [&] {
            const auto ws = g.open();
            const auto provider = ws.projection_provider();
            const auto& questions = ws.dataset->questions();
            std::vector<std::string> ids;
            for (const auto& q : questions) ids.push_back(std::to_string(q.id));
            auto state = tsne(corpus_embeddings(*provider, questions), tparams, std::move(ids));
            for (const auto& t : inputs) state = iterative_update(state, t, *provider, update_iterations);
            emit({{"timestamp", state.timestamp},
                  {"embedding", std::string(provider->kind())},
                  {"kl", state.kl_history.back()},
                  {"points", projection_json(state, *ws.dataset)}});
        };
    });

    // eval ami
    auto* eval = app.add_subcommand("eval", "Evaluation harnesses");
    eval->require_subcommand(1);
    auto* eval_ami = eval->add_subcommand("ami", "AMI of projected clusters against question targets");
    std::string providers = "trained,random";
    EvaluationOptions eopts;
    eval_ami->add_option("--providers", providers, "Comma-separated: toy, trained, file, random")->capture_default_str();
    eval_ami->add_option("--seeds", eopts.seeds)->capture_default_str()->check(CLI::PositiveNumber);
    eval_ami->add_option("--iterations", eopts.tsne.iterations)->capture_default_str()->check(CLI::PositiveNumber);
    eval_ami->add_option("--base-seed", eopts.base_seed)->capture_default_str();
    eval_ami->callback([&] {
        const auto names = split_list(providers);
        if (names.empty()) throw CLI::ValidationError("--providers", "needs at least one provider");
        for (const auto& n : names) {
            if (n != "toy" && n != "trained" && n != "file" && n != "random") {
                throw CLI::ValidationError("--providers", "unknown provider '" + n + "'");
            }
        }
        run = [&, names] {
            const auto ws = g.open();
            const auto& questions = ws.dataset->questions();
            std::vector<std::string> classes;
            std::vector<int> labels;
            for (const auto& q : questions) {
                auto it = std::find(classes.begin(), classes.end(), q.target);
                if (it == classes.end()) it = classes.insert(classes.end(), q.target);
                labels.push_back(static_cast<int>(it - classes.begin()));
            }
            std::vector<NamedEmbeddings> sets;
            for (const auto& n : names) {
                MatrixX<double> x;
                if (n == "toy") {
                    x = corpus_embeddings(*ws.provider, questions);
                } else if (n == "trained") {
                    if (!ws.head) throw Error(ErrorCode::UntrainedHead, "provider 'trained' needs train-head first");
                    x = corpus_embeddings(*ws.projection_provider(), questions);
                } else if (n == "file") {
                    WorkspaceOptions o = g.options();
                    o.provider = ProviderKind::File;
                    x = corpus_embeddings(*assemble_workspace(*ws.dataset, o, nullptr, g.workspace).provider, questions);
                } else {
                    x = random_embeddings(static_cast<Eigen::Index>(questions.size()), ws.provider->dimension(),
                                          eopts.base_seed + 1);
                }
                sets.push_back({n, std::move(x)});
            }
            emit({{"seeds", eopts.seeds},
                  {"iterations", eopts.tsne.iterations},
                  {"providers", provider_scores_json(evaluate_embeddings(sets, labels, eopts))}});
        };
    });

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    int port = 8080;
    std::string host = "127.0.0.1", dataset_name = "default", origin = "*";
    ServiceOptions sopts;
    serve_cmd->add_option("--port", port)->capture_default_str()->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--name", dataset_name, "Dataset name")->capture_default_str();
    serve_cmd->add_option("--cors-origin", origin, "Allowed UI origin")->capture_default_str();
    serve_cmd->add_option("--sessions", sopts.max_sessions, "Projection sessions kept")->capture_default_str();
    serve_cmd->callback([&] {
        run = [&] {
            sopts.cors_origin = origin;
            Api api(sopts);
            api.add_dataset(dataset_name, g.open());
            HttpServer server(api);
            server.bind(host, port);
            std::cerr << "listening on http://" << host << ":" << port << "\n";
            server.listen();
        };
    });

    try {
        app.parse(argc, argv);
        g.options();
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (run) run();
        return 0;
    } catch (const Error& e) {
        std::cerr << error_json(e).dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
