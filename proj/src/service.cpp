#include "sdrq/service.hpp"

#include <functional>
#include <set>
#include <vector>

#include <httplib.h>

#include "sdrq/availability.hpp"
#include "sdrq/conditions.hpp"
#include "sdrq/error.hpp"
#include "sdrq/json_export.hpp"
#include "sdrq/relations.hpp"

namespace sdrq {
namespace {

int status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound:
        case ErrorCode::NoProjection: return 404;
        case ErrorCode::ServiceUnreachable: return 502;
        default: return 400;
    }
}

Response json_response(const Json& body, int status = 200) { return {status, body.dump()}; }

Response error_response(const Error& e) { return json_response(error_json(e), status_of(e.code())); }

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        if (path[i] == '/') {
            ++i;
            continue;
        }
        const std::size_t j = std::min(path.find('/', i), path.size());
        parts.emplace_back(path.substr(i, j - i));
        i = j;
    }
    return parts;
}

Json parse_body(std::string_view body) {
    if (body.empty()) return Json::object();
    Json j = Json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    }
    return j;
}

std::vector<std::string> string_list(const Json& body, const char* key, bool required) {
    if (!body.contains(key)) {
        if (required) throw Error(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
        return {};
    }
    const auto& v = body.at(key);
    if (!v.is_array()) throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) {
            throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be an array of strings");
        }
        out.push_back(s.get<std::string>());
    }
    return out;
}

std::string string_field(const Json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_string()) {
        throw Error(ErrorCode::InvalidArgument, std::string("missing string field '") + key + "'");
    }
    return body.at(key).get<std::string>();
}

template <typename T>
T number_field(const Json& body, const char* key, T fallback) {
    if (!body.contains(key)) return fallback;
    if (!body.at(key).is_number()) throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be a number");
    return body.at(key).get<T>();
}

std::string query_value(const QueryParams& query, const std::string& key) {
    auto it = query.find(key);
    return it == query.end() ? std::string() : it->second;
}

AvailabilityQuery availability_query(const Json& body, const HarmonizedDataset& dataset) {
    AvailabilityQuery q;
    const auto conditions = string_list(body, "conditions", false);
    q.conditions = parse_conditions(conditions, dataset);
    q.targets = string_list(body, "targets", true);
    if (body.contains("level")) {
        auto level = body.at("level").is_string() ? parse_level(body.at("level").get<std::string>()) : std::nullopt;
        if (!level) throw Error(ErrorCode::InvalidArgument, "level must be \"micro\" or \"macro\"");
        q.level = *level;
    }
    if (body.contains("quality_flags")) q.quality_flags = string_list(body, "quality_flags", true);
    if (body.contains("quality_unfiltered")) q.quality_unfiltered = body.at("quality_unfiltered").get<bool>();
    return q;
}

}  // namespace

std::shared_ptr<ProjectionSession> SessionRegistry::create(std::string dataset, ProjectionState state) {
    auto session = std::make_shared<ProjectionSession>();
    session->dataset = std::move(dataset);
    session->state = std::move(state);
    std::lock_guard lock(mutex_);
    session->id = "s" + std::to_string(next_id_++);
    order_.push_front(session);
    while (order_.size() > capacity_) order_.pop_back();
    return session;
}

std::shared_ptr<ProjectionSession> SessionRegistry::find(std::string_view id) {
    std::lock_guard lock(mutex_);
    for (auto it = order_.begin(); it != order_.end(); ++it) {
        if ((*it)->id == id) {
            order_.splice(order_.begin(), order_, it);
            return order_.front();
        }
    }
    return nullptr;
}

std::size_t SessionRegistry::size() const {
    std::lock_guard lock(mutex_);
    return order_.size();
}

Api::Api(ServiceOptions options) : options_(std::move(options)), sessions_(options_.max_sessions) {}

void Api::add_dataset(std::string name, Workspace workspace) {
    std::lock_guard lock(datasets_mutex_);
    if (datasets_.empty()) default_dataset_ = name;
    datasets_.insert_or_assign(std::move(name), std::move(workspace));
}

const Workspace& Api::workspace(std::string_view name) const {
    std::lock_guard lock(datasets_mutex_);
    auto it = datasets_.find(name.empty() ? std::string_view(default_dataset_) : name);
    if (it == datasets_.end()) throw Error(ErrorCode::NotFound, "unknown dataset '" + std::string(name) + "'");
    return it->second;
}

ProjectionState Api::base_projection(const std::string& dataset, const TsneParams& params) {
    const BaseKey key{dataset, params.perplexity, params.iterations, params.seed};
    std::lock_guard lock(bases_mutex_);
    auto it = bases_.find(key);
    if (it == bases_.end()) {
        const auto& ws = workspace(dataset);
        const auto provider = ws.projection_provider();
        const auto& questions = ws.dataset->questions();
        std::vector<std::string> ids;
        for (const auto& q : questions) ids.push_back(std::to_string(q.id));
        auto state = std::make_shared<const ProjectionState>(
            tsne(corpus_embeddings(*provider, questions), params, std::move(ids)));
        it = bases_.emplace(key, std::move(state)).first;
    }
    return *it->second;
}

struct Router {
    Api& api;

    Response route(std::string_view method, const std::vector<std::string>& parts, const QueryParams& query,
                   std::string_view body) {
        const bool get = method == "GET";
        const bool post = method == "POST";
        if (parts.size() == 1 && parts[0] == "healthz" && get) return json_response({{"status", "ok"}});
        if (parts.empty() || parts[0] != "api") return not_found();
        const auto n = parts.size();
        const std::string& head = n > 1 ? parts[1] : std::string();

        if (n == 2 && head == "variables" && get) return variables(query);
        if (n == 2 && head == "questions" && get) return questions(query);
        if (n == 2 && head == "qbq" && post) return qbq(parse_body(body));
        if (n == 2 && head == "qbc" && post) return qbc(parse_body(body));
        if (n == 3 && head == "qbc" && parts[2] == "coverage" && post) return coverage(parse_body(body));
        if (n == 2 && head == "qbr" && post) return qbr(parse_body(body));
        if (n == 3 && head == "qbr" && parts[2] == "network" && post) return network(parse_body(body));
        if (n == 2 && head == "projection" && post) return create_projection(parse_body(body));
        if (n == 3 && head == "projection" && get) return get_projection(parts[2]);
        if (n == 4 && head == "projection" && parts[3] == "update" && post) {
            return update_projection(parts[2], parse_body(body));
        }
        if (n == 4 && head == "projection" && parts[3] == "brush" && post) {
            return brush(parts[2], parse_body(body));
        }
        if (n == 3 && head == "surveys" && get) return survey(parts[2], query);
        return not_found();
    }

    static Response not_found() { return error_response(Error(ErrorCode::NotFound, "no such endpoint")); }

    const Workspace& ws(const Json& body) {
        return api.workspace(body.contains("dataset") ? body.at("dataset").get<std::string>() : std::string());
    }

    Response variables(const QueryParams& query) {
        const auto& w = api.workspace(query_value(query, "dataset"));
        Json all = variables_json(*w.dataset);
        const auto kind = query_value(query, "kind");
        if (kind.empty()) return json_response(all);
        Json out = Json::array();
        for (auto& v : all) {
            if (v["kind"] == kind) out.push_back(std::move(v));
        }
        return json_response(out);
    }

    Response questions(const QueryParams& query) {
        const auto& w = api.workspace(query_value(query, "dataset"));
        const auto target = query_value(query, "target");
        std::vector<QuestionRecord> out;
        for (const auto& q : w.dataset->questions()) {
            if (target.empty() || q.target == target) out.push_back(q);
        }
        return json_response(questions_json(out));
    }

    Response qbq(const Json& body) {
        const auto& w = ws(body);
        const auto text = string_field(body, "text");
        const int k = number_field(body, "k", 10);
        return json_response(recommendation_json(w.recommender->recommend(text, k)));
    }

    Response qbc(const Json& body) {
        const auto& w = ws(body);
        const auto query = availability_query(body, *w.dataset);
        const auto profile = availability_profile(*w.dataset, query);
        std::optional<std::vector<std::string>> order;
        if (body.contains("sort")) {
            auto method = body.at("sort").is_string() ? parse_sort_method(body.at("sort").get<std::string>())
                                                      : std::nullopt;
            if (!method) throw Error(ErrorCode::InvalidArgument, "sort must be \"availability\" or \"quality\"");
            order = sort_surveys(profile, *method);
        }
        return json_response(profile_json(profile, order));
    }

    Response coverage(const Json& body) {
        const auto& w = ws(body);
        const auto query = availability_query(body, *w.dataset);
        const auto surveys = string_list(body, "surveys", true);
        if (!body.contains("year") || !body.at("year").is_number_integer()) {
            throw Error(ErrorCode::InvalidArgument, "missing integer field 'year'");
        }
        const int year = body.at("year").get<int>();
        return json_response({{"year", year},
                              {"surveys", surveys},
                              {"countries", country_coverage(*w.dataset, query, surveys, year)}});
    }

    Response qbr(const Json& body) {
        const auto& w = ws(body);
        const auto conditions = parse_conditions(string_list(body, "conditions", false), *w.dataset);
        const auto targets = string_list(body, "targets", true);
        return json_response(matrix_json(correlation_matrix(*w.dataset, conditions, targets)));
    }

    Response network(const Json& body) {
        const auto& w = ws(body);
        const auto conditions = parse_conditions(string_list(body, "conditions", false), *w.dataset);
        const auto pair = string_list(body, "pair", true);
        if (pair.size() != 2) throw Error(ErrorCode::InvalidArgument, "'pair' must name exactly two targets");
        return json_response(network_json(relation_network(*w.dataset, conditions, pair[0], pair[1])));
    }

    Json session_json(const ProjectionSession& s) {
        const auto& w = api.workspace(s.dataset);
        return {{"session", s.id},
                {"dataset", s.dataset},
                {"timestamp", s.state.timestamp},
                {"embedding", std::string(w.projection_provider()->kind())},
                {"points", projection_json(s.state, *w.dataset)}};
    }

    std::shared_ptr<ProjectionSession> session(const std::string& id) {
        auto s = api.sessions_.find(id);
        if (!s) throw Error(ErrorCode::NotFound, "unknown projection session '" + id + "'");
        return s;
    }

    Response create_projection(const Json& body) {
        const std::string dataset =
            body.contains("dataset") ? body.at("dataset").get<std::string>() : api.default_dataset_;
        api.workspace(dataset);
        TsneParams params = api.options_.projection;
        params.perplexity = number_field(body, "perplexity", params.perplexity);
        params.iterations = number_field(body, "iterations", params.iterations);
        params.seed = number_field<std::uint64_t>(body, "seed", params.seed);
        auto s = api.sessions_.create(dataset, api.base_projection(dataset, params));
        std::lock_guard lock(s->mutex);
        return json_response(session_json(*s));
    }

    Response get_projection(const std::string& id) {
        auto s = session(id);
        std::lock_guard lock(s->mutex);
        return json_response(session_json(*s));
    }

    Response update_projection(const std::string& id, const Json& body) {
        auto s = session(id);
        const auto text = string_field(body, "text");
        const int iterations = number_field(body, "iterations", api.options_.update_iterations);
        const auto& w = api.workspace(s->dataset);
        std::lock_guard lock(s->mutex);
        s->state = iterative_update(s->state, text, *w.projection_provider(), iterations);
        Json out = session_json(*s);
        out["id"] = s->state.ids.back();
        if (w.head) {
            const auto hard = w.recommender->hard(text);
            out["hard"] = {{"target", hard.target}, {"probability", hard.probability}};
        } else {
            out["hard"] = nullptr;
        }
        return json_response(out);
    }

    Response brush(const std::string& id, const Json& body) {
        auto s = session(id);
        Box box;
        box.x_min = number_field(body, "x_min", 0.0);
        box.x_max = number_field(body, "x_max", 0.0);
        box.y_min = number_field(body, "y_min", 0.0);
        box.y_max = number_field(body, "y_max", 0.0);
        const auto& w = api.workspace(s->dataset);
        std::lock_guard lock(s->mutex);
        return json_response(
            {{"rows", information_rows_json(brush_select(&s->state, box, w.dataset->questions(), w.dataset->variables()))}});
    }

    Response survey(const std::string& name, const QueryParams& query) {
        const auto& w = api.workspace(query_value(query, "dataset"));
        const auto& ds = *w.dataset;
        std::map<std::string, std::set<int>> waves;
        for (std::size_t row = 0; row < ds.rows(); ++row) {
            if (ds.surveys()[row] == name) waves[ds.waves()[row]].insert(ds.years()[row]);
        }
        const auto& descriptions = ds.metadata().survey_descriptions;
        auto it = descriptions.find(name);
        if (waves.empty() && it == descriptions.end()) {
            throw Error(ErrorCode::NotFound, "unknown survey '" + name + "'");
        }
        Json wave_list = Json::array();
        for (const auto& [wave, years] : waves) wave_list.push_back({{"wave", wave}, {"years", years}});
        return json_response({{"name", name},
                              {"description", it == descriptions.end() ? std::string() : it->second},
                              {"waves", wave_list}});
    }
};

Response Api::handle(std::string_view method, std::string_view path, const QueryParams& query,
                     std::string_view body) {
    try {
        return Router{*this}.route(method, split_path(path), query, body);
    } catch (const Error& e) {
        return error_response(e);
    } catch (const Json::exception& e) {
        return error_response(Error(ErrorCode::InvalidArgument, e.what()));
    } catch (const std::exception& e) {
        return json_response({{"code", "internal"}, {"message", e.what()}}, 500);
    }
}

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer(Api& api) : impl_(std::make_unique<Impl>()) {
    auto& server = impl_->server;
    server.set_default_headers({{"Access-Control-Allow-Origin", api.options().cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    auto forward = [&api](const httplib::Request& req, httplib::Response& res) {
        QueryParams query(req.params.begin(), req.params.end());
        const auto out = api.handle(req.method, req.path, query, req.body);
        res.status = out.status;
        res.set_content(out.body, "application/json");
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorCode::ServiceUnreachable, "cannot listen on " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace sdrq
