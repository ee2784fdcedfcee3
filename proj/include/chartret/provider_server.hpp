#pragma once

#include <memory>
#include <string>
#include <thread>

#include "chartret/embedding.hpp"

namespace httplib {
class Server;
}

namespace chartret {

/// Serves any Provider over the wire protocol RemoteProvider speaks.
class ProviderServer {
public:
    explicit ProviderServer(const Provider& provider);
    ~ProviderServer();

    ProviderServer(const ProviderServer&) = delete;
    ProviderServer& operator=(const ProviderServer&) = delete;

    /// Binds and serves on a background thread. Port 0 picks a free port.
    /// Returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Blocks serving on the calling thread.
    void listen(const std::string& host, int port);
    void stop();

    std::string endpoint() const { return "http://" + host_ + ":" + std::to_string(port_); }

private:
    const Provider& provider_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
};

} // namespace chartret
