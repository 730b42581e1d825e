#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "xbadp/session.hpp"

namespace httplib {
class Server;
}

namespace xbadp {

struct ServiceResponse {
    int status = 200;
    std::string body;  ///< JSON
};

struct ServiceOptions {
    TrainOptions train;  ///< used when a session is created without artifacts
};

/// Routes requests to sessions. Usable without a socket: tests call handle() directly.
class DispatchService {
public:
    explicit DispatchService(ServiceOptions opts = {});
    ~DispatchService();

    ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body,
                           const std::map<std::string, std::string>& query = {});

    /// Registers every route on `server`.
    void mount(httplib::Server& server);

    std::size_t session_count() const;

private:
    struct Slot;
    std::shared_ptr<Slot> find(const std::string& id) const;
    ServiceResponse create(const std::string& body);
    ServiceResponse dispatch(const std::string& method, const std::string& id, const std::string& action,
                             const std::string& body, const std::map<std::string, std::string>& query);

    ServiceOptions opts_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::atomic<long long> next_id_{1};
};

/// Blocks serving HTTP until the process is stopped.
void serve(DispatchService& service, const std::string& host, int port);

}  // namespace xbadp
