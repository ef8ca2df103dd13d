#pragma once

#include <cstddef>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "sdrq/tsne.hpp"
#include "sdrq/workspace.hpp"

namespace sdrq {

struct Response {
    int status = 200;
    std::string body;
};

struct ProjectionSession {
    std::string id;
    std::string dataset;
    std::mutex mutex;  // serializes updates
    ProjectionState state;
};

// In-memory projection sessions with least-recently-used eviction.
class SessionRegistry {
public:
    explicit SessionRegistry(std::size_t capacity = 16) : capacity_(capacity) {}

    std::shared_ptr<ProjectionSession> create(std::string dataset, ProjectionState state);
    std::shared_ptr<ProjectionSession> find(std::string_view id);  // null when unknown or evicted
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::size_t capacity_;
    std::size_t next_id_ = 1;
    std::list<std::shared_ptr<ProjectionSession>> order_;  // most recent first
};

struct ServiceOptions {
    std::size_t max_sessions = 16;
    TsneParams projection;
    int update_iterations = 100;
    std::string cors_origin = "*";
};

using QueryParams = std::multimap<std::string, std::string>;

// Transport-independent request router. Thread-safe: datasets are immutable
// and sessions lock individually.
class Api {
public:
    explicit Api(ServiceOptions options = {});

    // The first dataset added is the default for requests that name none.
    void add_dataset(std::string name, Workspace workspace);

    Response handle(std::string_view method, std::string_view path, const QueryParams& query = {},
                    std::string_view body = {});

    const ServiceOptions& options() const noexcept { return options_; }
    SessionRegistry& sessions() noexcept { return sessions_; }

private:
    struct BaseKey {
        std::string dataset;
        double perplexity;
        int iterations;
        std::uint64_t seed;
        auto operator<=>(const BaseKey&) const = default;
    };

    const Workspace& workspace(std::string_view name) const;
    ProjectionState base_projection(const std::string& dataset, const TsneParams& params);

    ServiceOptions options_;
    mutable std::mutex datasets_mutex_;
    std::map<std::string, Workspace, std::less<>> datasets_;
    std::string default_dataset_;
    SessionRegistry sessions_;
    std::mutex bases_mutex_;
    std::map<BaseKey, std::shared_ptr<const ProjectionState>> bases_;

    friend struct Router;
};

// HTTP/1.1 front end for an Api, with CORS headers on every response.
class HttpServer {
public:
    explicit HttpServer(Api& api);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Port 0 picks a free port. Returns the bound port. Errors: ServiceUnreachable.
    int bind(const std::string& host, int port);
    void listen();  // blocks until stop()
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sdrq
