#include "shieldrep/transport/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "shieldrep/core/error.hpp"
#include "shieldrep/transport/endpoint.hpp"

namespace shieldrep::transport {

namespace {

constexpr std::uint32_t kMaxFrame = 64u << 20;

[[noreturn]] void fail(const std::string& what) {
  throw Error(Errc::Io, what + ": " + std::strerror(errno));
}

bool write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, p, n, 0);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace

struct TcpNic::Listener {
  int fd = -1;
  std::uint16_t port = 0;
  Endpoint* ep = nullptr;
  std::thread acceptor;
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> inbox;
  std::vector<int> conns;
};

struct TcpNic::Outbound {
  int fd = -1;
  std::mutex mu;
};

TcpNic::TcpNic() = default;

TcpNic::~TcpNic() {
  stopping_ = true;
  std::vector<std::unique_ptr<Listener>> ls;
  {
    std::lock_guard lk(mu_);
    for (auto& [addr, l] : listeners_) ls.push_back(std::move(l));
    listeners_.clear();
    for (auto& [link, o] : outbound_) {
      if (o->fd >= 0) ::close(o->fd);
    }
    outbound_.clear();
  }
  for (auto& l : ls) {
    ::shutdown(l->fd, SHUT_RDWR);
    ::close(l->fd);
    {
      std::lock_guard lk(l->mu);
      for (int c : l->conns) ::shutdown(c, SHUT_RDWR);
    }
    if (l->acceptor.joinable()) l->acceptor.join();
  }
  for (auto& t : readers_) {
    if (t.joinable()) t.join();
  }
  for (auto& l : ls) {
    for (int c : l->conns) ::close(c);
  }
}

void TcpNic::attach(NodeId owner, std::uint16_t lane, Endpoint* ep) {
  std::lock_guard lk(mu_);
  if (listeners_.contains({owner, lane})) {
    throw Error(Errc::DuplicateEndpoint,
                "endpoint " + to_string(owner) + "/" + std::to_string(lane) + " exists");
  }
  auto l = std::make_unique<Listener>();
  l->ep = ep;
  l->fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (l->fd < 0) fail("socket");
  int one = 1;
  ::setsockopt(l->fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(l->fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) fail("bind");
  if (::listen(l->fd, 16) < 0) fail("listen");
  socklen_t len = sizeof(addr);
  ::getsockname(l->fd, reinterpret_cast<sockaddr*>(&addr), &len);
  l->port = ntohs(addr.sin_port);
  Listener* raw = l.get();
  l->acceptor = std::thread([this, raw] { accept_loop(raw); });
  listeners_.emplace(Addr{owner, lane}, std::move(l));
}

void TcpNic::detach(NodeId owner, std::uint16_t lane) {
  std::lock_guard lk(mu_);
  auto it = listeners_.find({owner, lane});
  if (it != listeners_.end()) {
    std::lock_guard llk(it->second->mu);
    it->second->ep = nullptr;
  }
}

void TcpNic::accept_loop(Listener* l) {
  while (!stopping_) {
    int fd = ::accept(l->fd, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    {
      std::lock_guard lk(l->mu);
      l->conns.push_back(fd);
    }
    std::lock_guard lk(mu_);
    readers_.emplace_back([this, fd, l] { read_loop(fd, l); });
  }
}

void TcpNic::read_loop(int fd, Listener* l) {
  for (;;) {
    std::uint8_t hdr[4];
    if (!read_all(fd, hdr, 4)) return;
    const std::uint32_t len = (std::uint32_t{hdr[0]} << 24) | (std::uint32_t{hdr[1]} << 16) |
                              (std::uint32_t{hdr[2]} << 8) | std::uint32_t{hdr[3]};
    if (len > kMaxFrame) return;
    Bytes frame(len);
    if (len > 0 && !read_all(fd, frame.data(), len)) return;
    {
      std::lock_guard lk(l->mu);
      l->inbox.push_back(std::move(frame));
    }
    l->cv.notify_one();
  }
}

TcpNic::Outbound& TcpNic::outbound(const ChannelId& link) {
  std::lock_guard lk(mu_);
  auto& o = outbound_[link];
  if (!o) o = std::make_unique<Outbound>();
  if (o->fd < 0) {
    auto it = listeners_.find({link.receiver, link.lane});
    if (it == listeners_.end()) return *o;
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) fail("socket");
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(it->second->port);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
      ::close(fd);
      fail("connect");
    }
    o->fd = fd;
  }
  return *o;
}

void TcpNic::transmit(const ChannelId& link, Bytes frame) {
  Outbound& o = outbound(link);
  std::lock_guard lk(o.mu);
  if (o.fd < 0) return;
  const auto len = static_cast<std::uint32_t>(frame.size());
  const std::uint8_t hdr[4] = {static_cast<std::uint8_t>(len >> 24),
                               static_cast<std::uint8_t>(len >> 16),
                               static_cast<std::uint8_t>(len >> 8),
                               static_cast<std::uint8_t>(len)};
  if (!write_all(o.fd, hdr, 4) || !write_all(o.fd, frame.data(), frame.size())) {
    ::close(o.fd);
    o.fd = -1;
  }
}

std::size_t TcpNic::pump(NodeId owner, std::uint16_t lane) {
  Listener* l;
  {
    std::lock_guard lk(mu_);
    auto it = listeners_.find({owner, lane});
    if (it == listeners_.end()) return 0;
    l = it->second.get();
  }
  std::deque<Bytes> frames;
  Endpoint* ep;
  {
    std::lock_guard lk(l->mu);
    frames.swap(l->inbox);
    ep = l->ep;
  }
  if (!ep) return 0;
  for (auto& f : frames) ep->deliver(std::move(f));
  return frames.size();
}

bool TcpNic::wait(NodeId owner, std::uint16_t lane, std::chrono::milliseconds timeout) {
  Listener* l;
  {
    std::lock_guard lk(mu_);
    auto it = listeners_.find({owner, lane});
    if (it == listeners_.end()) return false;
    l = it->second.get();
  }
  std::unique_lock lk(l->mu);
  return l->cv.wait_for(lk, timeout, [l] { return !l->inbox.empty(); });
}

std::uint16_t TcpNic::port(NodeId owner, std::uint16_t lane) const {
  std::lock_guard lk(mu_);
  auto it = listeners_.find({owner, lane});
  return it == listeners_.end() ? 0 : it->second->port;
}

}  // namespace shieldrep::transport
