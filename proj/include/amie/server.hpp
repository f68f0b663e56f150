#pragma once

// Stream transport for the control unit: newline-delimited JSON frames over
// TCP, and the same frames as WebSocket text messages on /ws.

#include <cstdint>
#include <istream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "amie/service.hpp"

namespace amie::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

inline constexpr std::size_t kMaxFrameBytes = 1 << 20;

class TcpSession : public std::enable_shared_from_this<TcpSession> {
public:
  TcpSession(tcp::socket socket, std::shared_ptr<const svc::ServiceContext> ctx)
      : socket_(std::move(socket)), ctx_(std::move(ctx)), buffer_(kMaxFrameBytes) {}

  void start() { read(); }

private:
  void read() {
    asio::async_read_until(socket_, buffer_, '\n', [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec == asio::error::not_found) {
        // Oversized frame: answer once, then drop the connection.
        self->reply(svc::handle_line("", *self->ctx_, self->session_), true);
        return;
      }
      if (ec) return;
      std::istream in(&self->buffer_);
      std::string line;
      std::getline(in, line);
      self->reply(svc::handle_line(line, *self->ctx_, self->session_), false);
    });
  }

  void reply(std::string frame, bool close_after) {
    out_ = std::move(frame);
    out_ += '\n';
    asio::async_write(socket_, asio::buffer(out_),
                      [self = shared_from_this(), close_after](beast::error_code ec, std::size_t) {
                        if (ec || close_after) {
                          beast::error_code ignored;
                          self->socket_.shutdown(tcp::socket::shutdown_both, ignored);
                          return;
                        }
                        self->read();
                      });
  }

  tcp::socket socket_;
  std::shared_ptr<const svc::ServiceContext> ctx_;
  svc::SessionContext session_;
  asio::streambuf buffer_;
  std::string out_;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
  WsSession(tcp::socket socket, std::shared_ptr<const svc::ServiceContext> ctx)
      : ws_(std::move(socket)), ctx_(std::move(ctx)) {}

  void start() {
    http::async_read(ws_.next_layer(), http_buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->upgrade();
                     });
  }

private:
  void upgrade() {
    if (request_.target() != "/ws" || !websocket::is_upgrade(request_)) {
      auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
      res->set(http::field::content_type, "text/plain");
      res->body() = "websocket endpoint is /ws\n";
      res->prepare_payload();
      http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ignored;
        self->ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
      });
      return;
    }
    ws_.read_message_max(kMaxFrameBytes);
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->read();
    });
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      const std::string line = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->out_ = svc::handle_line(line, *self->ctx_, self->session_);
      self->ws_.text(true);
      self->ws_.async_write(asio::buffer(self->out_), [self](beast::error_code ec2, std::size_t) {
        if (ec2) return;
        self->read();
      });
    });
  }

  websocket::stream<tcp::socket> ws_;
  std::shared_ptr<const svc::ServiceContext> ctx_;
  svc::SessionContext session_;
  beast::flat_buffer http_buffer_;
  http::request<http::string_body> request_;
  beast::flat_buffer buffer_;
  std::string out_;
};

/// Owns the listeners and the worker threads. Port 0 binds an ephemeral
/// port; the bound value is available after start().
class Server {
public:
  Server(svc::ServiceContext ctx, std::uint16_t tcp_port, std::uint16_t ws_port,
         std::string address = "0.0.0.0")
      : ctx_(std::make_shared<const svc::ServiceContext>(std::move(ctx))),
        tcp_acceptor_(io_),
        ws_acceptor_(io_),
        requested_tcp_(tcp_port),
        requested_ws_(ws_port),
        address_(std::move(address)) {}

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;
  ~Server() { stop(); }

  void start(std::size_t threads = 4) {
    const auto addr = asio::ip::make_address(address_);
    open(tcp_acceptor_, {addr, requested_tcp_});
    open(ws_acceptor_, {addr, requested_ws_});
    accept_tcp();
    accept_ws();
    for (std::size_t i = 0; i < std::max<std::size_t>(threads, 1); ++i) workers_.emplace_back([this] { io_.run(); });
  }

  void stop() {
    std::lock_guard lock(stop_mutex_);
    if (workers_.empty()) return;
    io_.stop();
    for (auto& t : workers_) t.join();
    workers_.clear();
  }

  std::uint16_t tcp_port() const { return tcp_acceptor_.local_endpoint().port(); }
  std::uint16_t ws_port() const { return ws_acceptor_.local_endpoint().port(); }
  const svc::ServiceContext& context() const { return *ctx_; }

private:
  static void open(tcp::acceptor& acceptor, const tcp::endpoint& ep) {
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  }

  void accept_tcp() {
    tcp_acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (!ec) std::make_shared<TcpSession>(std::move(socket), ctx_)->start();
      if (tcp_acceptor_.is_open()) accept_tcp();
    });
  }

  void accept_ws() {
    ws_acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (!ec) std::make_shared<WsSession>(std::move(socket), ctx_)->start();
      if (ws_acceptor_.is_open()) accept_ws();
    });
  }

  std::shared_ptr<const svc::ServiceContext> ctx_;
  asio::io_context io_;
  tcp::acceptor tcp_acceptor_;
  tcp::acceptor ws_acceptor_;
  std::uint16_t requested_tcp_;
  std::uint16_t requested_ws_;
  std::string address_;
  std::vector<std::thread> workers_;
  std::mutex stop_mutex_;
};

}  // namespace amie::net
