#pragma once

#include "gvdb/error.hpp"
#include "gvdb/query.hpp"
#include "gvdb/store.hpp"

// The library default of 5 drops connections under bursts of concurrent clients.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 1024
#endif
#include "httplib.h"
#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace gvdb {

struct ServerConfig {
  std::string host = "127.0.0.1";
  // 0 binds an ephemeral port.
  int port = 8080;
  std::size_t max_items = kDefaultMaxItems;
  bool log_requests = false;
  std::optional<std::filesystem::path> assets;
  std::size_t threads = 32;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

// Minimal JSON emitter for the window endpoint, which can return tens of
// thousands of records per request. Writes through a raw cursor into a buffer
// that grows on demand.
class JsonOut {
public:
  explicit JsonOut(std::size_t reserve = 256) { s_.resize(std::max<std::size_t>(reserve, 64)); }

  template <std::size_t N>
  JsonOut& lit(const char (&v)[N]) {
    ensure(N);
    std::memcpy(s_.data() + pos_, v, N - 1);
    pos_ += N - 1;
    return *this;
  }
  JsonOut& num(double v) {
    ensure(32);
    pos_ = static_cast<std::size_t>(std::to_chars(s_.data() + pos_, s_.data() + s_.size(), v).ptr - s_.data());
    return *this;
  }
  JsonOut& num(std::uint64_t v) {
    ensure(24);
    pos_ = static_cast<std::size_t>(std::to_chars(s_.data() + pos_, s_.data() + s_.size(), v).ptr - s_.data());
    return *this;
  }
  JsonOut& boolean(bool v) { return v ? lit("true") : lit("false"); }
  JsonOut& raw(std::string_view v) {
    ensure(v.size());
    std::memcpy(s_.data() + pos_, v.data(), v.size());
    pos_ += v.size();
    return *this;
  }
  JsonOut& str(std::string_view v) {
    ensure(2 + 6 * v.size());
    char* out = s_.data() + pos_;
    *out++ = '"';
    for (char c : v) {
      const auto u = static_cast<unsigned char>(c);
      if (u >= 0x20 && c != '"' && c != '\\') {
        *out++ = c;
        continue;
      }
      *out++ = '\\';
      switch (c) {
        case '"': *out++ = '"'; break;
        case '\\': *out++ = '\\'; break;
        case '\n': *out++ = 'n'; break;
        case '\r': *out++ = 'r'; break;
        case '\t': *out++ = 't'; break;
        default: {
          static constexpr char hex[] = "0123456789abcdef";
          *out++ = 'u';
          *out++ = '0';
          *out++ = '0';
          *out++ = hex[u >> 4];
          *out++ = hex[u & 15];
        }
      }
    }
    *out++ = '"';
    pos_ = static_cast<std::size_t>(out - s_.data());
    return *this;
  }

  std::string take() {
    s_.resize(pos_);
    pos_ = 0;
    std::string out = std::move(s_);
    s_.assign(64, '\0');
    return out;
  }

private:
  void ensure(std::size_t n) {
    if (s_.size() - pos_ < n) s_.resize(std::max(s_.size() * 2, pos_ + n));
  }

  std::string s_;
  std::size_t pos_ = 0;
};

namespace detail {

inline void node_head(JsonOut& j, std::uint64_t id, Point pos, PartitionId partition) {
  j.lit("{\"id\":").num(id).lit(",\"x\":").num(pos.x).lit(",\"y\":").num(pos.y);
  j.lit(",\"partition\":").num(std::uint64_t{partition});
  j.lit(",\"in_window\":");
}

inline void detail_node_tail(JsonOut& j, std::string_view label) { j.lit(",\"label\":").str(label).lit("}"); }

}  // namespace detail

// Level-0 node records rendered once, split around the in_window value. Most
// of the cost of a window response is formatting coordinates.
class NodeRecords {
public:
  explicit NodeRecords(const StoreData& d) {
    JsonOut j(d.nodes.size() * 96 + 64);
    JsonOut part(256);
    begin_.reserve(d.nodes.size() + 1);
    split_.reserve(d.nodes.size());
    std::size_t at = 0;
    for (std::uint64_t v = 0; v < d.nodes.size(); ++v) {
      detail::node_head(part, v, d.nodes[v].pos, d.nodes[v].partition);
      const std::string head = part.take();
      detail::detail_node_tail(part, d.node_labels[v]);
      const std::string tail = part.take();
      begin_.push_back(at);
      split_.push_back(static_cast<std::uint32_t>(head.size()));
      j.raw(head).raw(tail);
      at += head.size() + tail.size();
    }
    begin_.push_back(at);
    buf_ = j.take();
  }

  std::string_view head(std::uint64_t v) const { return {buf_.data() + begin_[v], split_[v]}; }
  std::string_view tail(std::uint64_t v) const {
    return {buf_.data() + begin_[v] + split_[v], begin_[v + 1] - begin_[v] - split_[v]};
  }
  std::size_t size() const { return split_.size(); }

private:
  std::string buf_;
  std::vector<std::size_t> begin_;
  std::vector<std::uint32_t> split_;
};

// `records`, when given, must have been built from the store `v` came from.
inline std::string view_to_json(const ViewResult& v, const NodeRecords* records = nullptr) {
  const bool cached = records && v.level == Level::detail;
  JsonOut j(128 + v.nodes.size() * 112 + v.edges.size() * 64);
  j.lit("{\"level\":").num(std::uint64_t(static_cast<int>(v.level)));
  j.lit(",\"window\":{\"x0\":").num(v.window.x_min).lit(",\"y0\":").num(v.window.y_min);
  j.lit(",\"x1\":").num(v.window.x_max).lit(",\"y1\":").num(v.window.y_max).lit("}");
  j.lit(",\"truncated\":").boolean(v.truncated);
  j.lit(",\"nodes\":[");
  for (std::size_t i = 0; i < v.nodes.size(); ++i) {
    const ViewNode& n = v.nodes[i];
    if (i) j.lit(",");
    if (cached) {
      j.raw(records->head(n.id)).boolean(n.in_window).raw(records->tail(n.id));
      continue;
    }
    detail::node_head(j, n.id, n.pos, n.partition);
    j.boolean(n.in_window);
    if (v.level == Level::detail)
      detail::detail_node_tail(j, n.label);
    else
      j.lit(",\"member_count\":").num(n.member_count).lit("}");
  }
  j.lit("],\"edges\":[");
  for (std::size_t i = 0; i < v.edges.size(); ++i) {
    const ViewEdge& e = v.edges[i];
    if (i) j.lit(",");
    j.lit("{\"id\":").num(e.id).lit(",\"src\":").num(e.src).lit(",\"dst\":").num(e.dst);
    j.lit(",\"weight\":").num(e.weight).lit("}");
  }
  j.lit("]}");
  return j.take();
}

inline HttpResponse error_response(int status, std::string_view code, std::string_view param,
                                   std::string_view message) {
  nlohmann::json j;
  j["error"] = {{"code", code}, {"param", param}, {"message", message}};
  return {status, j.dump()};
}

namespace detail {

inline std::optional<std::string> param(const QueryParams& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) return std::nullopt;
  return it->second;
}

// Thrown by the parsers below; carries the HTTP error code string.
struct BadRequest {
  std::string code;
  std::string param;
  std::string message;
};

inline double parse_double(const QueryParams& p, const std::string& name) {
  const auto v = param(p, name);
  if (!v) throw BadRequest{"missing_parameter", name, "parameter is required"};
  double out = 0;
  const char* first = v->data();
  const char* last = first + v->size();
  if (!v->empty() && *first == '+') ++first;
  auto r = std::from_chars(first, last, out);
  if (r.ec != std::errc{} || r.ptr != last || !std::isfinite(out))
    throw BadRequest{"invalid_number", name, "not a finite number: '" + *v + "'"};
  return out;
}

inline std::optional<long long> parse_int(const QueryParams& p, const std::string& name) {
  const auto v = param(p, name);
  if (!v) return std::nullopt;
  long long out = 0;
  auto r = std::from_chars(v->data(), v->data() + v->size(), out);
  if (r.ec != std::errc{} || r.ptr != v->data() + v->size())
    throw BadRequest{"invalid_number", name, "not an integer: '" + *v + "'"};
  return out;
}

}  // namespace detail

// Endpoint logic, independent of the transport.
class ApiHandlers {
public:
  ApiHandlers(std::shared_ptr<const QueryEngine> engine, std::size_t default_max_items = kDefaultMaxItems)
      : engine_(std::move(engine)), records_(engine_->data()), default_max_items_(default_max_items) {
    const Manifest& m = engine_->data().manifest;
    nlohmann::json j;
    j["format_version"] = m.format_version;
    j["nodes"] = engine_->data().nodes.size();
    j["edges"] = engine_->data().edges.size();
    j["partitions"] = m.partition_count;
    j["crossing_edges"] = m.crossing_count;
    j["levels"] = {0, 1};
    j["global_bbox"] = {{"x_min", m.global_bbox.x_min},
                        {"y_min", m.global_bbox.y_min},
                        {"x_max", m.global_bbox.x_max},
                        {"y_max", m.global_bbox.y_max}};
    j["default_max_items"] = default_max_items_;
    meta_ = j.dump();
  }

  HttpResponse meta() const { return {200, meta_}; }

  HttpResponse window(const QueryParams& p) const {
    try {
      double x0 = detail::parse_double(p, "x0");
      double y0 = detail::parse_double(p, "y0");
      double x1 = detail::parse_double(p, "x1");
      double y1 = detail::parse_double(p, "y1");
      if (x0 > x1) std::swap(x0, x1);
      if (y0 > y1) std::swap(y0, y1);
      const Level level = level_from_int(detail::parse_int(p, "level").value_or(0));
      const long long max_items =
          detail::parse_int(p, "max_items").value_or(static_cast<long long>(default_max_items_));
      if (max_items < 1) throw InvalidParameter("max_items", "must be at least 1");
      const ViewResult v = engine_->view({x0, y0, x1, y1}, level, static_cast<std::size_t>(max_items));
      return {200, view_to_json(v, &records_)};
    } catch (const detail::BadRequest& e) {
      return error_response(400, e.code, e.param, e.message);
    } catch (const InvalidParameter& e) {
      return error_response(400, "invalid_parameter", e.param(), e.what());
    }
  }

  HttpResponse search(const QueryParams& p) const {
    try {
      const auto q = detail::param(p, "q");
      if (!q) throw detail::BadRequest{"missing_parameter", "q", "parameter is required"};
      const long long limit = detail::parse_int(p, "limit").value_or(20);
      if (limit < 1) throw InvalidParameter("limit", "must be at least 1");
      const auto hits = engine_->keyword_search(*q, static_cast<std::size_t>(limit));
      nlohmann::json results = nlohmann::json::array();
      for (const SearchHit& h : hits) {
        results.push_back({{"id", h.node},
                           {"label", h.label},
                           {"x", h.pos.x},
                           {"y", h.pos.y},
                           {"partition", h.partition},
                           {"match_pos", h.match_pos}});
      }
      nlohmann::json j;
      j["count"] = hits.size();
      j["results"] = std::move(results);
      return {200, j.dump()};
    } catch (const detail::BadRequest& e) {
      return error_response(400, e.code, e.param, e.message);
    } catch (const InvalidParameter& e) {
      return error_response(400, "invalid_parameter", e.param(), e.what());
    }
  }

private:
  std::shared_ptr<const QueryEngine> engine_;
  NodeRecords records_;
  std::size_t default_max_items_;
  std::string meta_;
};

// HTTP/1.1 front end. Handlers only read the shared engine.
class HttpServer {
public:
  HttpServer(std::shared_ptr<const QueryEngine> engine, ServerConfig config)
      : config_(std::move(config)), api_(std::move(engine), config_.max_items) {
    const std::size_t threads = std::max<std::size_t>(1, config_.threads);
    server_.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    auto reply = [](httplib::Response& res, HttpResponse r) {
      res.status = r.status;
      res.set_content(std::move(r.body), "application/json; charset=utf-8");
    };
    server_.Get("/api/meta", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, api_.meta());
    });
    server_.Get("/api/window", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, api_.window(req.params));
    });
    server_.Get("/api/search", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, api_.search(req.params));
    });
    if (config_.assets && !server_.set_mount_point("/", config_.assets->string()))
      throw InvalidParameter("assets", "not a directory: " + config_.assets->string());
    if (config_.log_requests) {
      server_.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
        std::lock_guard lock(log_mutex_);
        std::cerr << req.method << ' ' << req.target << ' ' << res.status << ' ' << res.body.size() << "B\n";
      });
    }
  }

  // Returns the bound port; throws on failure.
  int bind() {
    if (config_.port == 0) {
      port_ = server_.bind_to_any_port(config_.host);
      if (port_ < 0) throw InvalidParameter("bind", "cannot bind " + config_.host);
    } else {
      if (config_.port < 1 || config_.port > 65535) throw InvalidParameter("bind", "port out of range");
      if (!server_.bind_to_port(config_.host, config_.port))
        throw InvalidParameter("bind", "cannot bind " + config_.host + ":" + std::to_string(config_.port));
      port_ = config_.port;
    }
    return port_;
  }

  // Blocks until stop().
  bool run() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  int port() const { return port_; }

private:
  ServerConfig config_;
  ApiHandlers api_;
  httplib::Server server_;
  int port_ = -1;
  std::mutex log_mutex_;
};

}  // namespace gvdb
