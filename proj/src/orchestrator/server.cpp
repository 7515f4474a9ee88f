#include "vinci/orchestrator/server.hpp"

#include <array>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"
#include "vinci/media/wire.hpp"

namespace vinci::orchestrator {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response make_response(const Request& req, http::status status, std::string body,
                       std::string_view content_type = "application/json") {
  Response res{status, req.version()};
  res.set(http::field::server, "vinci");
  res.set(http::field::content_type, std::string(content_type));
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

Response json_response(const Request& req, http::status status, const nlohmann::json& body) {
  return make_response(req, status, body.dump());
}

Response error_response(const Request& req, http::status status, const std::string& detail) {
  return json_response(req, status, {{"error", detail}});
}

std::string_view std_view(beast::string_view s) { return {s.data(), s.size()}; }

std::vector<std::string> path_parts(std::string_view target) {
  if (auto q = target.find('?'); q != std::string_view::npos) target = target.substr(0, q);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < target.size()) {
    auto end = target.find('/', start);
    if (end == std::string_view::npos) end = target.size();
    if (end > start) parts.emplace_back(target.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::string new_session_id() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, std::shared_ptr<Session> session)
      : ws_(std::move(socket)), session_(std::move(session)) {}

  void start(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  void send(std::string text) {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      self->outbox_.push_back(std::move(text));
      if (!self->writing_) self->write_next();
    });
  }

  /// Flushes queued messages, then closes.
  void shutdown() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      if (!self->writing_) self->write_next();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsConnection> weak = weak_from_this();
    token_ = session_->subscribe([weak](const WsMessage& m) {
      auto self = weak.lock();
      if (!self) return;
      try {
        self->send(ws_encode(m));
      } catch (const Error& e) {
        spdlog::warn("dropping unencodable {} message: {}", type_name(m.payload), e.what());
      }
    });
    subscribed_ = true;
    read_next();
  }

  void read_next() {
    ws_.async_read(inbox_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      detach();
      return;
    }
    std::string text = beast::buffers_to_string(inbox_.data());
    inbox_.consume(inbox_.size());
    handle(text);
    read_next();
  }

  void handle(const std::string& text) {
    try {
      auto message = ws_decode(text);
      auto* query = std::get_if<QueryMsg>(&message.payload);
      if (!query) fail(ErrorCode::SchemaViolation, "clients may only send query messages");
      if (message.session_id != session_->id()) fail(ErrorCode::SchemaViolation, "session_id does not match");
      session_->submit_typed_query(query->text);
    } catch (const Error& e) {
      WsMessage reply{session_->id(), session_->session_time(), StatusMsg{StatusLevel::Error, e.what()}};
      send(ws_encode(reply));
    }
  }

  void write_next() {
    if (outbox_.empty()) {
      if (closing_ && !closed_) {
        closed_ = true;
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) { self->detach(); });
      }
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    outbox_.pop_front();
    if (ec) {
      outbox_.clear();
      detach();
      return;
    }
    write_next();
  }

  void detach() {
    if (subscribed_) {
      subscribed_ = false;
      session_->unsubscribe(token_);
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<Session> session_;
  beast::flat_buffer inbox_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
  bool subscribed_ = false;
  std::size_t token_ = 0;
};

class IngestConnection : public std::enable_shared_from_this<IngestConnection> {
 public:
  IngestConnection(tcp::socket socket, std::shared_ptr<Session> session, std::shared_ptr<std::atomic<bool>> busy)
      : socket_(std::move(socket)), session_(std::move(session)), busy_(std::move(busy)) {}

  ~IngestConnection() { *busy_ = false; }

  void start() { read_next(); }

 private:
  void read_next() {
    socket_.async_read_some(net::buffer(buf_),
                            beast::bind_front_handler(&IngestConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t n) {
    if (ec) {
      if (!session_->closed()) session_->flush_speech();
      return;
    }
    try {
      decoder_.feed(std::span<const std::uint8_t>(buf_.data(), n));
      while (auto chunk = decoder_.next()) {
        try {
          session_->ingest(std::move(*chunk));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NonMonotoneTimestamp) throw;
          session_->status(StatusLevel::Warning, std::string("frame dropped: ") + e.what());
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SessionClosed) {
        session_->status(StatusLevel::Error, std::string("ingest stream rejected: ") + e.what());
      }
      beast::error_code ignored;
      socket_.shutdown(tcp::socket::shutdown_both, ignored);
      return;
    }
    read_next();
  }

  tcp::socket socket_;
  std::shared_ptr<Session> session_;
  std::shared_ptr<std::atomic<bool>> busy_;
  media::StreamDecoder decoder_;
  std::array<std::uint8_t, 64 * 1024> buf_{};
};

/// Accepts one VNCI producer at a time for a session.
class IngestListener : public std::enable_shared_from_this<IngestListener> {
 public:
  IngestListener(net::io_context& ioc, std::shared_ptr<Session> session)
      : ioc_(ioc), acceptor_(net::make_strand(ioc)), session_(std::move(session)) {}

  void start(const std::string& host) {
    tcp::endpoint endpoint{net::ip::make_address(host), 0};
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    accept_next();
  }

  std::uint16_t port() const { return port_; }

  void stop() {
    net::post(acceptor_.get_executor(), [self = shared_from_this()] {
      beast::error_code ignored;
      self->acceptor_.close(ignored);
    });
  }

 private:
  void accept_next() {
    acceptor_.async_accept(net::make_strand(ioc_),
                           beast::bind_front_handler(&IngestListener::on_accept, shared_from_this()));
  }

  void on_accept(beast::error_code ec, tcp::socket socket) {
    if (ec == net::error::operation_aborted || !acceptor_.is_open()) return;
    if (!ec) {
      if (busy_->exchange(true)) {
        session_->status(StatusLevel::Warning, "second ingest connection refused");
        beast::error_code ignored;
        socket.close(ignored);
      } else {
        std::make_shared<IngestConnection>(std::move(socket), session_, busy_)->start();
      }
    }
    accept_next();
  }

  net::io_context& ioc_;
  tcp::acceptor acceptor_;
  std::shared_ptr<Session> session_;
  std::shared_ptr<std::atomic<bool>> busy_ = std::make_shared<std::atomic<bool>>(false);
  std::uint16_t port_ = 0;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  using Handler = std::function<Response(const Request&)>;
  using Upgrader = std::function<void(tcp::socket, Request)>;

  HttpConnection(tcp::socket socket, const Handler& handle, const Upgrader& upgrade)
      : stream_(std::move(socket)), handle_(handle), upgrade_(upgrade) {}

  void start() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpConnection::read_next, shared_from_this()));
  }

 private:
  void read_next() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      upgrade_(stream_.release_socket(), std::move(req_));
      return;
    }
    auto res = std::make_shared<Response>(handle_(req_));
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || res->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read_next();
    });
  }

  beast::tcp_stream stream_;
  const Handler& handle_;
  const Upgrader& upgrade_;
  beast::flat_buffer buffer_;
  Request req_;
};

struct SessionSlot {
  std::shared_ptr<Session> session;
  std::shared_ptr<IngestListener> ingest;
  std::vector<std::weak_ptr<WsConnection>> sockets;
};

}  // namespace

struct Server::Impl {
  Config config;
  AdapterFactory factory;
  net::io_context ioc;
  tcp::acceptor acceptor{net::make_strand(ioc)};
  std::vector<std::thread> threads;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
  std::uint16_t port = 0;
  bool started = false;

  mutable std::mutex mutex;
  std::map<std::string, SessionSlot> sessions;

  HttpConnection::Handler handler = [this](const Request& req) { return handle(req); };
  HttpConnection::Upgrader upgrader = [this](tcp::socket socket, Request req) { upgrade(std::move(socket), std::move(req)); };

  void accept_next();
  void serve(tcp::socket socket);
  Response handle(const Request& req);
  void upgrade(tcp::socket socket, Request req);
  Response create_session(const Request& req);
  void close_session(SessionSlot slot);
};


void Server::Impl::accept_next() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec == net::error::operation_aborted || !acceptor.is_open()) return;
    if (!ec) serve(std::move(socket));
    accept_next();
  });
}

void Server::Impl::serve(tcp::socket socket) {
  std::make_shared<HttpConnection>(std::move(socket), handler, upgrader)->start();
}

void Server::Impl::upgrade(tcp::socket socket, Request req) {
  auto parts = path_parts(std_view(req.target()));
  std::shared_ptr<Session> session;
  if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "ws") {
    std::lock_guard lock(mutex);
    if (auto it = sessions.find(parts[1]); it != sessions.end()) {
      session = it->second.session;
      auto conn = std::make_shared<WsConnection>(std::move(socket), session);
      it->second.sockets.push_back(conn);
      conn->start(std::move(req));
      return;
    }
  }
  beast::error_code ignored;
  socket.close(ignored);
}

Response Server::Impl::create_session(const Request& req) {
  auto id = new_session_id();
  auto clock = std::make_shared<SteadyClock>();
  auto session = std::make_shared<Session>(id, config, factory(config, clock), clock);
  auto ingest = std::make_shared<IngestListener>(ioc, session);
  ingest->start(config.ingest_host);
  {
    std::lock_guard lock(mutex);
    sessions[id] = {session, ingest, {}};
  }
  spdlog::info("session {} created, ingest on port {}", id, ingest->port());
  std::string host = config.host == "0.0.0.0" ? "127.0.0.1" : config.host;
  if (auto h = req.find(http::field::host); h != req.end()) host = std::string(h->value().substr(0, h->value().rfind(':')));
  return json_response(req, http::status::created,
                       {{"session_id", id},
                        {"ingest_port", ingest->port()},
                        {"ws_url", "ws://" + host + ":" + std::to_string(port) + "/sessions/" + id + "/ws"}});
}

void Server::Impl::close_session(SessionSlot slot) {
  slot.ingest->stop();
  slot.session->status(StatusLevel::Info, "session closed");
  slot.session->close();
  for (auto& weak : slot.sockets) {
    if (auto ws = weak.lock()) ws->shutdown();
  }
  spdlog::info("session {} closed", slot.session->id());
}

Response Server::Impl::handle(const Request& req) {
  const auto parts = path_parts(std_view(req.target()));
  const auto method = req.method();
  try {
    if (method == http::verb::options) {
      auto res = make_response(req, http::status::no_content, "");
      res.set(http::field::access_control_allow_methods, "GET, POST, DELETE, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      return res;
    }
    if (parts.size() == 1 && parts[0] == "healthz" && method == http::verb::get) {
      return json_response(req, http::status::ok, {{"status", "ok"}});
    }
    if (parts.size() == 1 && parts[0] == "sessions" && method == http::verb::post) return create_session(req);
    if (parts.size() == 2 && parts[0] == "clips" && method == http::verb::get) {
      const auto& name = parts[1];
      if (name.find("..") != std::string::npos || name.find('\\') != std::string::npos) {
        return error_response(req, http::status::bad_request, "bad clip name");
      }
      const auto path = config.clip_dir / name;
      if (!std::filesystem::is_regular_file(path)) return error_response(req, http::status::not_found, "no such clip");
      return make_response(req, http::status::ok, read_file(path), "application/octet-stream");
    }
    if (parts.size() >= 2 && parts[0] == "sessions") {
      std::shared_ptr<Session> session;
      {
        std::lock_guard lock(mutex);
        if (auto it = sessions.find(parts[1]); it != sessions.end()) session = it->second.session;
      }
      if (!session) return error_response(req, http::status::not_found, "unknown session");
      if (parts.size() == 2 && method == http::verb::delete_) {
        SessionSlot slot;
        {
          std::lock_guard lock(mutex);
          auto it = sessions.find(parts[1]);
          if (it == sessions.end()) return error_response(req, http::status::not_found, "unknown session");
          slot = std::move(it->second);
          sessions.erase(it);
        }
        close_session(std::move(slot));
        return json_response(req, http::status::ok, nlohmann::json{{"session_id", parts[1]}, {"closed", true}});
      }
      if (parts.size() == 3 && parts[2] == "stats" && method == http::verb::get) {
        auto s = session->stats();
        return json_response(req, http::status::ok,
                             {{"latency_mean_s", s.latency_mean_s},
                              {"latency_std_s", s.latency_std_s},
                              {"queries", s.queries},
                              {"memory_len", s.memory_len}});
      }
      if (parts.size() == 3 && parts[2] == "frame" && method == http::verb::get) {
        auto frame = session->buffer().latest();
        if (!frame) return error_response(req, http::status::not_found, "no frame yet");
        return make_response(req, http::status::ok, encode_bmp(*frame), "image/bmp");
      }
    }
    return error_response(req, http::status::not_found, "no route for " + std::string(req.target()));
  } catch (const std::exception& e) {
    spdlog::error("request {} failed: {}", std::string(req.target()), e.what());
    return error_response(req, http::status::internal_server_error, e.what());
  }
}

Server::Server(Config config, AdapterFactory factory) : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->factory = factory ? std::move(factory) : AdapterFactory([](const Config& c, std::shared_ptr<Clock> clock) {
    return make_adapters(c, std::move(clock));
  });
}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->started) return;
  tcp::endpoint endpoint{net::ip::make_address(impl_->config.host), impl_->config.port};
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen();
  impl_->port = impl_->acceptor.local_endpoint().port();
  impl_->work.emplace(net::make_work_guard(impl_->ioc));
  impl_->accept_next();
  const unsigned n = std::max(2u, std::thread::hardware_concurrency());
  for (unsigned i = 0; i < n; ++i) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  impl_->started = true;
  spdlog::info("listening on {}:{}", impl_->config.host, impl_->port);
}

void Server::run() {
  start();
  net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
  std::promise<void> done;
  signals.async_wait([&done](beast::error_code, int) { done.set_value(); });
  done.get_future().wait();
  stop();
}

void Server::stop() {
  if (!impl_->started) return;
  impl_->started = false;
  net::post(impl_->acceptor.get_executor(), [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  std::map<std::string, SessionSlot> sessions;
  {
    std::lock_guard lock(impl_->mutex);
    sessions.swap(impl_->sessions);
  }
  for (auto& [id, slot] : sessions) impl_->close_session(std::move(slot));
  impl_->work.reset();
  // Give sockets a moment to flush their close frames, then force the loop down.
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  impl_->ioc.stop();
  for (auto& t : impl_->threads) t.join();
  impl_->threads.clear();
}

std::uint16_t Server::port() const { return impl_->port; }

std::shared_ptr<Session> Server::session(const std::string& id) const {
  std::lock_guard lock(impl_->mutex);
  auto it = impl_->sessions.find(id);
  return it == impl_->sessions.end() ? nullptr : it->second.session;
}

std::string encode_bmp(const media::TimedFrame& frame) {
  const std::uint32_t w = frame.width;
  const std::uint32_t h = frame.height;
  const std::uint32_t row = (w * 3 + 3) & ~3u;
  const std::uint32_t image = row * h;
  std::string out(54 + image, '\0');
  auto put16 = [&](std::size_t at, std::uint16_t v) {
    out[at] = static_cast<char>(v & 0xff);
    out[at + 1] = static_cast<char>(v >> 8);
  };
  auto put32 = [&](std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out[at + i] = static_cast<char>((v >> (8 * i)) & 0xff);
  };
  out[0] = 'B';
  out[1] = 'M';
  put32(2, 54 + image);
  put32(10, 54);
  put32(14, 40);
  put32(18, w);
  put32(22, h);
  put16(26, 1);
  put16(28, 24);
  put32(34, image);
  for (std::uint32_t y = 0; y < h; ++y) {
    const std::size_t dst = 54 + static_cast<std::size_t>(h - 1 - y) * row;
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::size_t src = (static_cast<std::size_t>(y) * w + x) * 3;
      out[dst + x * 3] = static_cast<char>(frame.pixels[src + 2]);
      out[dst + x * 3 + 1] = static_cast<char>(frame.pixels[src + 1]);
      out[dst + x * 3 + 2] = static_cast<char>(frame.pixels[src]);
    }
  }
  return out;
}

}  // namespace vinci::orchestrator
