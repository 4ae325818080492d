#include "mmviad/review_server.hpp"

#include <httplib.h>

#include "mmviad/json_io.hpp"

namespace mmviad {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, {{"error", message}}, status);
}

std::optional<std::string> query(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  auto v = req.get_param_value(key);
  if (v.empty()) return std::nullopt;
  return v;
}

int to_int(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw RequestError(400, std::string(what) + " must be an integer");
  }
}

// Maps store exceptions to HTTP statuses.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const RequestError& e) {
      send_error(res, e.status(), e.what());
    } catch (const DataError& e) {
      send_error(res, 400, e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

ReviewServer::ReviewServer(ReviewStore& store, ReviewServerOptions options)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;

  srv.Get("/clips", guarded([this](const httplib::Request& req, httplib::Response& res) {
    ClipFilter f;
    f.status = query(req, "status");
    f.category = query(req, "category");
    if (auto p = query(req, "page")) f.page = to_int(*p, "page");
    if (auto p = query(req, "page_size")) f.page_size = to_int(*p, "page_size");
    send_json(res, store_.list_clips(f).to_json());
  }));

  srv.Get("/clips/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    auto j = store_.get_clip(id).to_json();
    json hist = json::array();
    for (const auto& d : store_.history(id)) hist.push_back(d.to_json());
    j["history"] = hist;
    send_json(res, j);
  }));

  srv.Get("/clips/:id/candidates", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    send_json(res, {{"clip_id", id}, {"candidates", intervals_to_json(store_.candidates(id))}});
  }));

  srv.Get("/clips/:id/frames/:variant/:index",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto& id = req.path_params.at("id");
            FrameVariant variant;
            try {
              variant = parse_frame_variant(req.path_params.at("variant"));
            } catch (const DataError& e) {
              throw RequestError(400, e.what());
            }
            const int index = to_int(req.path_params.at("index"), "frame index");
            const auto path = store_.frame_file(id, variant, index);
            if (!std::filesystem::is_regular_file(path)) {
              throw RequestError(404, "missing frame file " + path.filename().string());
            }
            res.set_content(read_file(path), "image/png");
          }));

  srv.Post("/clips/:id/decision", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw RequestError(400, std::string("body is not JSON: ") + e.what());
    }
    const auto request = DecisionRequest::from_json(req.path_params.at("id"), body);
    send_json(res, store_.submit(request).to_json(), 201);
  }));

  srv.Get("/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto protocol = query(req, "protocol").value_or("");
    send_json(res, manifest_to_json(store_.export_manifest(protocol)));
  }));

  if (options.ui_dir) {
    if (!srv.set_mount_point("/", options.ui_dir->string())) {
      throw DataError("UI directory not found: " + options.ui_dir->string());
    }
  }
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw DataError("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw DataError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void ReviewServer::listen() { server_->listen_after_bind(); }

void ReviewServer::stop() {
  if (server_) server_->stop();
}

void ReviewServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace mmviad
