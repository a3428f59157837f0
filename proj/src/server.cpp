#include "modelsync/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <deque>
#include <iostream>

namespace modelsync {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {
constexpr std::size_t kMaxLine = 1 << 20;
}

struct Server::Impl {
    struct Connection : std::enable_shared_from_this<Connection> {
        Impl& server;
        ConnectionId id;
        beast::tcp_stream stream;
        std::optional<websocket::stream<beast::tcp_stream>> ws;
        beast::flat_buffer buffer;
        std::deque<std::string> outbox;
        bool writing = false;
        bool closed = false;

        Connection(Impl& s, ConnectionId cid, tcp::socket socket)
            : server(s), id(cid), stream(std::move(socket)) {}

        Sink sink() {
            return [weak = weak_from_this()](const std::string& line) {
                if (auto self = weak.lock()) {
                    self->send(line);
                }
            };
        }

        void start() {
            stream.async_read_some(buffer.prepare(4096), [self = shared_from_this()](beast::error_code ec, std::size_t n) {
                if (ec) {
                    return self->close();
                }
                self->buffer.commit(n);
                self->sniff();
            });
        }

        void sniff() {
            const auto data = beast::buffers_to_string(buffer.data());
            if (data.size() < 4 && std::string_view("GET ").starts_with(data)) {
                return start();
            }
            if (data.starts_with("GET ")) {
                return read_upgrade();
            }
            drain_lines();
            read_lines();
        }

        void read_upgrade() {
            auto req = std::make_shared<http::request<http::string_body>>();
            http::async_read(stream, buffer, *req, [self = shared_from_this(), req](beast::error_code ec, std::size_t) {
                if (ec) {
                    return self->close();
                }
                if (!websocket::is_upgrade(*req)) {
                    return self->plain_http(req->version());
                }
                self->ws.emplace(std::move(self->stream));
                self->ws->text(true);
                self->ws->read_message_max(kMaxLine);
                self->ws->async_accept(*req, [self](beast::error_code ec2) {
                    if (ec2) {
                        return self->close();
                    }
                    self->buffer.consume(self->buffer.size());
                    self->read_frames();
                });
            });
        }

        void plain_http(unsigned version) {
            auto res = std::make_shared<http::response<http::string_body>>(http::status::ok, version);
            res->set(http::field::content_type, "text/plain");
            res->body() = "modelsync: connect with a WebSocket or NDJSON stream\n";
            res->keep_alive(false);
            res->prepare_payload();
            http::async_write(stream, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
                self->close();
            });
        }

        void read_frames() {
            ws->async_read(buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) {
                if (ec) {
                    return self->close();
                }
                auto text = beast::buffers_to_string(self->buffer.data());
                self->buffer.consume(self->buffer.size());
                self->dispatch(text);
                if (!self->closed) {
                    self->read_frames();
                }
            });
        }

        void read_lines() {
            if (closed) {
                return;
            }
            stream.async_read_some(buffer.prepare(8192), [self = shared_from_this()](beast::error_code ec, std::size_t n) {
                if (ec) {
                    return self->close();
                }
                self->buffer.commit(n);
                self->drain_lines();
                self->read_lines();
            });
        }

        void drain_lines() {
            for (;;) {
                const auto data = beast::buffers_to_string(buffer.data());
                const auto nl = data.find('\n');
                if (nl == std::string::npos) {
                    if (data.size() > kMaxLine) {
                        close();
                    }
                    return;
                }
                buffer.consume(nl + 1);
                auto line = data.substr(0, nl);
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                if (!line.empty()) {
                    dispatch(line);
                }
                if (closed) {
                    return;
                }
            }
        }

        void dispatch(const std::string& line) {
            try {
                server.hub.handle(id, line, sink());
            } catch (const std::exception& e) {
                std::cerr << "modelsync: connection " << id << ": " << e.what() << '\n';
            }
        }

        void send(const std::string& line) {
            if (closed) {
                return;
            }
            outbox.push_back(ws ? line : line + '\n');
            if (!writing) {
                write_next();
            }
        }

        void write_next() {
            if (outbox.empty() || closed) {
                writing = false;
                return;
            }
            writing = true;
            auto done = [self = shared_from_this()](beast::error_code ec, std::size_t) {
                if (ec) {
                    return self->close();
                }
                self->outbox.pop_front();
                self->write_next();
            };
            if (ws) {
                ws->async_write(asio::buffer(outbox.front()), done);
            } else {
                asio::async_write(stream, asio::buffer(outbox.front()), done);
            }
        }

        void close() {
            if (closed) {
                return;
            }
            closed = true;
            server.connections.erase(id);
            try {
                server.hub.disconnect(id);
            } catch (const std::exception& e) {
                std::cerr << "modelsync: disconnect " << id << ": " << e.what() << '\n';
            }
            beast::error_code ignored;
            if (ws) {
                beast::get_lowest_layer(*ws).socket().shutdown(tcp::socket::shutdown_both, ignored);
                beast::get_lowest_layer(*ws).socket().close(ignored);
            } else {
                stream.socket().shutdown(tcp::socket::shutdown_both, ignored);
                stream.socket().close(ignored);
            }
        }
    };

    ServerOptions options;
    asio::io_context io{1};
    tcp::acceptor acceptor{io};
    asio::steady_timer ticker{io};
    asio::signal_set signals{io};
    std::chrono::steady_clock::time_point epoch = std::chrono::steady_clock::now();
    SessionHub hub;
    ConnectionId next_id = 1;
    std::map<ConnectionId, std::shared_ptr<Connection>> connections;

    explicit Impl(ServerOptions opts)
        : options(std::move(opts)),
          hub([this] {
              return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - epoch)
                  .count();
          },
              options.persist_dir) {
        const tcp::endpoint endpoint(asio::ip::make_address(options.address), options.port);
        acceptor.open(endpoint.protocol());
        acceptor.set_option(asio::socket_base::reuse_address(true));
        acceptor.bind(endpoint);
        acceptor.listen();
    }

    void accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != asio::error::operation_aborted) {
                    accept();
                }
                return;
            }
            socket.set_option(tcp::no_delay(true));
            auto conn = std::make_shared<Connection>(*this, next_id++, std::move(socket));
            connections[conn->id] = conn;
            conn->start();
            accept();
        });
    }

    void schedule_tick() {
        ticker.expires_after(std::chrono::milliseconds(options.tick_ms));
        ticker.async_wait([this](beast::error_code ec) {
            if (ec) {
                return;
            }
            hub.tick();
            schedule_tick();
        });
    }

    void shutdown() {
        beast::error_code ignored;
        acceptor.close(ignored);
        ticker.cancel();
        signals.cancel();
        auto live = connections;
        for (auto& [id, conn] : live) {
            conn->close();
        }
    }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Server::~Server() = default;

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
    auto& s = *impl_;
    if (s.options.handle_signals) {
        s.signals.add(SIGINT);
        s.signals.add(SIGTERM);
        s.signals.async_wait([&s](beast::error_code ec, int) {
            if (!ec) {
                s.shutdown();
            }
        });
    }
    s.accept();
    s.schedule_tick();
    s.io.run();
    s.hub.persist_all();
}

void Server::stop() {
    asio::post(impl_->io, [this] { impl_->shutdown(); });
}

} // namespace modelsync
