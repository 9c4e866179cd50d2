#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace ordreg::serve {

struct Reply {
  int status = 200;
  std::string body;  // JSON
};

/// POST /forward: {tau, shift, scale, link} -> {probs}.
Reply forward(std::string_view body);
/// POST /cutpoints: {props, link} -> {tau}.
Reply cutpoints(std::string_view body);
Reply health();
/// GET /model: the loaded archive text, or 404.
Reply model(const std::optional<std::string>& archive_text);

/// True for http(s)://localhost, 127.0.0.1 and [::1] origins on any port.
bool localhost_origin(std::string_view origin);

struct ServerOptions {
  std::string bind = "127.0.0.1";
  int port = 8765;  // 0 picks a free port
  std::optional<std::string> archive_text;
  std::optional<std::string> static_dir;
};

/// The explorer backend. Handlers are stateless apart from the immutable
/// archive, so requests are served concurrently.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the socket; returns the bound port. Throws on failure.
  int bind();
  /// Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ordreg::serve
