#pragma once

#include <memory>
#include <thread>

#include <httplib.h>

#include "titl/service.hpp"

// Runs a Service on a free local port for the lifetime of the fixture.
class LiveService {
public:
    LiveService(std::shared_ptr<const titl::SearchEngine> engine, titl::ServiceConfig cfg = {})
        : service_(std::make_unique<titl::Service>(std::move(engine), std::move(cfg))) {
        port_ = service_->bind_any_port();
        thread_ = std::thread([this] { service_->listen(); });
        service_->wait_until_ready();
    }
    ~LiveService() {
        service_->stop();
        if (thread_.joinable()) thread_.join();
    }

    titl::Service& service() { return *service_; }
    int port() const { return port_; }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

private:
    std::unique_ptr<titl::Service> service_;
    int port_ = -1;
    std::thread thread_;
};
