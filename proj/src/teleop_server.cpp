#include <atomic>
#include <chrono>
#include <csignal>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "telepilot/error.hpp"
#include "telepilot/teleop.hpp"

namespace telepilot {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

// A client this far behind on events is dropped.
constexpr std::size_t kMaxQueuedMessages = 4096;

constexpr const char* kFallbackIndex = R"(<!doctype html>
<html><head><title>telepilot</title></head>
<body>
<h1>telepilot</h1>
<p>Operator console not installed (start with --web-root).</p>
<ul>
<li>GET /state</li>
<li>GET /frame/latest, GET /frame/{seq}</li>
<li>WebSocket: any path, JSON commands goto, velocity, stop, set_camera, load_scenario</li>
</ul>
</body></html>
)";

std::string_view mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

class WebSocketSession : public std::enable_shared_from_this<WebSocketSession> {
 public:
  WebSocketSession(tcp::socket&& socket, TeleopCore& core) : ws_(std::move(socket)), core_(core) {}

  ~WebSocketSession() {
    if (subscription_ > 0) core_.unsubscribe(subscription_);
  }

  void run(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request, beast::bind_front_handler(&WebSocketSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WebSocketSession> weak = weak_from_this();
    subscription_ = core_.subscribe([weak](const std::shared_ptr<const std::string>& message) {
      if (auto self = weak.lock()) self->send(message);
    });
    do_read();
  }

  void send(std::shared_ptr<const std::string> message) {
    net::post(ws_.get_executor(), [self = shared_from_this(), message = std::move(message)] {
      self->enqueue(message);
    });
  }

  void enqueue(std::shared_ptr<const std::string> message) {
    if (closed_) return;
    if (queue_.size() >= kMaxQueuedMessages) {
      closed_ = true;
      beast::get_lowest_layer(ws_).close();
      return;
    }
    queue_.push_back(std::move(message));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front()),
                    beast::bind_front_handler(&WebSocketSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WebSocketSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      if (subscription_ > 0) core_.unsubscribe(subscription_);
      subscription_ = 0;
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    std::optional<ErrorEvent> error;
    try {
      error = core_.handle_command(parse_command(text));
    } catch (const Error& e) {
      error = ErrorEvent{std::string(to_string(e.code())), e.what()};
    }
    if (error) enqueue(std::make_shared<const std::string>(serialize(ServerEvent{*error})));
    do_read();
  }

  websocket::stream<beast::tcp_stream> ws_;
  TeleopCore& core_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  int subscription_ = 0;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, TeleopCore& core, const std::string& web_root)
      : stream_(std::move(socket)), core_(core), web_root_(web_root) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  using Response = http::response<http::string_body>;

  void do_read() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(request_)) {
      stream_.expires_never();
      std::make_shared<WebSocketSession>(stream_.release_socket(), core_)->run(std::move(request_));
      return;
    }
    response_ = std::make_shared<Response>(handle(request_));
    http::async_write(stream_, *response_,
                      beast::bind_front_handler(&HttpSession::on_write, shared_from_this(),
                                                response_->need_eof()));
  }

  void on_write(bool close, beast::error_code ec, std::size_t) {
    if (ec) return;
    if (close) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    response_.reset();
    do_read();
  }

  Response make(http::status status, std::string_view type, std::string body) const {
    Response res{status, request_.version()};
    res.set(http::field::server, "telepilot");
    res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res.set(http::field::cache_control, "no-store");
    res.keep_alive(request_.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  Response handle(const http::request<http::string_body>& req) const {
    if (req.method() != http::verb::get) {
      return make(http::status::method_not_allowed, "text/plain", "GET only\n");
    }
    const std::string target(req.target());
    const std::string path = target.substr(0, target.find('?'));

    if (path == "/state") {
      return make(http::status::ok, "application/json", serialize(ServerEvent{core_.state()}));
    }
    if (path.starts_with("/frame/")) {
      const std::string id = path.substr(7);
      std::shared_ptr<const EncodedFrame> frame;
      if (id == "latest") {
        frame = core_.latest_frame();
      } else {
        try {
          std::size_t used = 0;
          const unsigned long long seq = std::stoull(id, &used);
          if (used == id.size()) frame = core_.frame(seq);
        } catch (const std::exception&) {
        }
      }
      if (!frame) return make(http::status::not_found, "text/plain", "no such frame\n");
      Response res = make(http::status::ok, "image/png",
                          std::string(frame->png.begin(), frame->png.end()));
      res.set("X-Frame-Seq", std::to_string(frame->seq));
      return res;
    }
    return serve_static(path);
  }

  Response serve_static(const std::string& path) const {
    if (path.find("..") != std::string::npos) {
      return make(http::status::bad_request, "text/plain", "bad path\n");
    }
    if (!web_root_.empty()) {
      std::filesystem::path file = std::filesystem::path(web_root_) / path.substr(1);
      if (path == "/" || std::filesystem::is_directory(file)) file /= "index.html";
      std::ifstream in(file, std::ios::binary);
      if (in) {
        std::ostringstream body;
        body << in.rdbuf();
        return make(http::status::ok, mime_type(file), body.str());
      }
    }
    if (path == "/" || path == "/index.html") return make(http::status::ok, "text/html", kFallbackIndex);
    return make(http::status::not_found, "text/plain", "not found\n");
  }

  beast::tcp_stream stream_;
  TeleopCore& core_;
  const std::string& web_root_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::shared_ptr<Response> response_;
};

}  // namespace

struct TeleopServer::Impl {
  Impl(TeleopCore& c, std::string root) : core(c), web_root(std::move(root)), acceptor(ioc) {}

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      std::make_shared<HttpSession>(std::move(socket), core, web_root)->run();
      accept();
    });
  }

  TeleopCore& core;
  std::string web_root;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::vector<std::thread> threads;
};

TeleopServer::TeleopServer(TeleopCore& core, const std::string& host, unsigned short port,
                           std::string web_root)
    : impl_(std::make_unique<Impl>(core, std::move(web_root))) {
  beast::error_code ec;
  const tcp::endpoint endpoint(net::ip::make_address(host, ec), port);
  if (ec) throw Error(ErrorCode::BindFailure, "bad bind address '" + host + "': " + ec.message());
  auto& acceptor = impl_->acceptor;
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error(ErrorCode::BindFailure,
                "cannot listen on " + host + ":" + std::to_string(port) + ": " + ec.message());
  }
}

TeleopServer::~TeleopServer() { stop(); }

unsigned short TeleopServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void TeleopServer::start(int threads) {
  impl_->accept();
  for (int i = 0; i < std::max(1, threads); ++i) {
    impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  }
}

void TeleopServer::stop() {
  if (!impl_) return;
  impl_->ioc.stop();
  for (std::thread& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
}

namespace {

std::atomic<bool> g_stop{false};

extern "C" void request_stop(int) { g_stop.store(true); }

}  // namespace

int run_service(const ServiceOptions& options) {
  const auto colon = options.bind.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::BindFailure, "--bind must be host:port, got '" + options.bind + "'");
  }
  const std::string host = options.bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(options.bind.substr(colon + 1));
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::BindFailure, "invalid port in '" + options.bind + "'");

  TeleopCore core(options);
  TeleopServer server(core, host, static_cast<unsigned short>(port), options.web_root);
  server.start(2);
  std::cout << "telepilot serving scenario '" << options.scenario << "' on http://" << host << ':'
            << server.port() << '\n'
            << std::flush;

  std::signal(SIGINT, request_stop);
  std::signal(SIGTERM, request_stop);
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(options.sim.dt));
  auto next = std::chrono::steady_clock::now();
  while (!g_stop.load()) {
    core.tick();
    next += period;
    std::this_thread::sleep_until(next);
  }
  server.stop();
  return 0;
}

}  // namespace telepilot
