#include "ordreg/serve.hpp"

#include <cmath>
#include <regex>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"
#include "ordreg/cli.hpp"
#include "ordreg/errors.hpp"
#include "ordreg/simulate.hpp"

namespace ordreg::serve {
namespace {

using nlohmann::json;

struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Reply error_reply(int status, const std::string& field, const std::string& message) {
  json body = {{"error", message}, {"format_version", 1}};
  if (!field.empty()) body["field"] = field;
  return {status, body.dump()};
}

json parse_body(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw BadRequest("body: not valid JSON");
  if (!j.is_object()) throw BadRequest("body: expected a JSON object");
  return j;
}

std::vector<double> number_array(const json& j, const std::string& field) {
  if (!j.contains(field)) throw BadRequest(field + ": required");
  const auto& a = j[field];
  if (!a.is_array()) throw BadRequest(field + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) {
      throw BadRequest(field + "[" + std::to_string(i) + "]: expected a number");
    }
    out.push_back(a[i].get<double>());
    if (!std::isfinite(out.back())) {
      throw BadRequest(field + "[" + std::to_string(i) + "]: must be finite");
    }
  }
  return out;
}

double number_field(const json& j, const std::string& field, double fallback) {
  if (!j.contains(field)) return fallback;
  if (!j[field].is_number()) throw BadRequest(field + ": expected a number");
  return j[field].get<double>();
}

Link link_field(const json& j) {
  if (!j.contains("link")) return Link(LinkFamily::probit);
  if (!j["link"].is_string()) throw BadRequest("link: expected a string");
  try {
    return Link::parse(j["link"].get<std::string>());
  } catch (const ValidationError& e) {
    throw BadRequest(std::string("link: ") + e.what());
  }
}

// "field: message" -> field name for the error body
std::string field_of(const std::string& message) {
  const auto colon = message.find(':');
  std::string field = colon == std::string::npos ? "" : message.substr(0, colon);
  const auto bracket = field.find('[');
  return bracket == std::string::npos ? field : field.substr(0, bracket);
}

template <typename F>
Reply guarded(F&& body) {
  try {
    return body();
  } catch (const BadRequest& e) {
    return error_reply(400, field_of(e.what()), e.what());
  }
}

}  // namespace

Reply forward(std::string_view text) {
  return guarded([&]() -> Reply {
    const json j = parse_body(text);
    ForwardModel m;
    m.tau = number_array(j, "tau");
    if (m.tau.empty()) throw BadRequest("tau: needs at least one threshold");
    m.shift = number_field(j, "shift", 0.0);
    m.scale = number_field(j, "scale", 1.0);
    if (!std::isfinite(m.shift)) throw BadRequest("shift: must be finite");
    if (!(m.scale > 0) || !std::isfinite(m.scale)) throw BadRequest("scale: must be positive");
    m.link = link_field(j);
    for (std::size_t k = 1; k < m.tau.size(); ++k) {
      if (!(m.tau[k - 1] < m.tau[k])) {
        return error_reply(422, "tau",
                           "tau: thresholds must be strictly increasing (tau[" +
                               std::to_string(k - 1) + "] >= tau[" + std::to_string(k) + "])");
      }
    }
    return {200, json{{"probs", forward_probabilities(m)}, {"format_version", 1}}.dump()};
  });
}

Reply cutpoints(std::string_view text) {
  return guarded([&]() -> Reply {
    const json j = parse_body(text);
    const auto props = number_array(j, "props");
    if (props.size() < 2) throw BadRequest("props: needs at least two categories");
    const Link link = link_field(j);
    try {
      return {200, json{{"tau", cutpoints_from_proportions(props, link)}, {"format_version", 1}}.dump()};
    } catch (const ValidationError& e) {
      return error_reply(422, "props", std::string("props: ") + e.what());
    }
  });
}

Reply health() {
  return {200, json{{"status", "ok"}, {"version", cli::kVersion}, {"format_version", 1}}.dump()};
}

Reply model(const std::optional<std::string>& archive_text) {
  if (!archive_text) return error_reply(404, "", "no model loaded");
  return {200, *archive_text};
}

bool localhost_origin(std::string_view origin) {
  static const std::regex pattern(R"(^https?://(localhost|127\.0\.0\.1|\[::1\])(:[0-9]{1,5})?$)");
  return std::regex_match(origin.begin(), origin.end(), pattern);
}

struct Server::Impl {
  ServerOptions options;
  httplib::Server http;
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  auto& http = impl_->http;
  auto send = [](httplib::Response& res, const Reply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  http.set_post_routing_handler([](const httplib::Request& req, httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    if (!origin.empty() && localhost_origin(origin)) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    }
  });
  http.Options(R"(/.*)", [](const httplib::Request& req, httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    if (!origin.empty() && localhost_origin(origin)) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
    res.status = 204;
  });
  http.Post("/forward", [send](const httplib::Request& req, httplib::Response& res) {
    send(res, forward(req.body));
  });
  http.Post("/cutpoints", [send](const httplib::Request& req, httplib::Response& res) {
    send(res, cutpoints(req.body));
  });
  http.Get("/health", [send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  const Impl* impl = impl_.get();
  http.Get("/model", [send, impl](const httplib::Request&, httplib::Response& res) {
    send(res, model(impl->options.archive_text));
  });
  if (impl_->options.static_dir && !http.set_mount_point("/", *impl_->options.static_dir)) {
    throw ValidationError("static directory '" + *impl_->options.static_dir + "' does not exist");
  }
}

Server::~Server() { stop(); }

int Server::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    const int port = impl_->http.bind_to_any_port(o.bind);
    if (port < 0) throw ValidationError("cannot bind " + o.bind);
    o.port = port;
  } else if (!impl_->http.bind_to_port(o.bind, o.port)) {
    throw ValidationError("cannot bind " + o.bind + ":" + std::to_string(o.port));
  }
  return o.port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace ordreg::serve
