#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "mmviad/review_store.hpp"

namespace httplib {
class Server;
}

namespace mmviad {

struct ReviewServerOptions {
  std::optional<std::filesystem::path> ui_dir;  // static bundle mounted at /
};

/// HTTP front end for a ReviewStore.
///
///   GET  /clips?status=&category=&page=&page_size=
///   GET  /clips/{id}
///   GET  /clips/{id}/candidates
///   GET  /clips/{id}/frames/{marked|unmarked}/{index}
///   POST /clips/{id}/decision
///   GET  /export?protocol=
class ReviewServer {
 public:
  ReviewServer(ReviewStore& store, ReviewServerOptions options = {});
  ~ReviewServer();

  // Returns the bound port; port 0 picks a free one. Throws on failure.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();
  void wait_until_ready() const;

 private:
  ReviewStore& store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace mmviad
