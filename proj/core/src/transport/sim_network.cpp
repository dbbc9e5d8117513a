#include "shieldrep/transport/sim_network.hpp"

#include <algorithm>

#include "shieldrep/core/error.hpp"
#include "shieldrep/transport/endpoint.hpp"

namespace shieldrep::transport {

SimNetwork::SimNetwork(NetConfig config, AdversaryPolicy policy)
    : config_(config), adversary_(std::move(policy), config.gst, config.delta, config.seed) {}

void SimNetwork::attach(NodeId owner, std::uint16_t lane, Endpoint* ep) {
  auto [it, inserted] = endpoints_.emplace(std::make_pair(owner, lane), ep);
  if (!inserted) {
    throw Error(Errc::DuplicateEndpoint,
                "endpoint " + to_string(owner) + "/" + std::to_string(lane) + " exists");
  }
}

void SimNetwork::detach(NodeId owner, std::uint16_t lane) {
  endpoints_.erase(std::make_pair(owner, lane));
}

void SimNetwork::transmit(const ChannelId& link, Bytes frame) {
  ++stats_.frames;
  stats_.bytes += frame.size();
  if (config_.record_wire) wire_log_.push_back(WireRecord{now_, link, frame});
  for (auto& e : adversary_.on_transmit(link, frame, now_)) {
    e.seq = next_seq_++;
    if (config_.record_wire && e.msg != frame) wire_log_.push_back(WireRecord{now_, link, e.msg});
    in_flight_.push_back(std::move(e));
  }
}

void SimNetwork::advance(Tick now) {
  now_ = now;
  auto crashes = adversary_step(adversary_, in_flight_, now, next_seq_);
  for (NodeId n : crashes) {
    if (on_crash_) on_crash_(n);
  }

  auto split = std::partition(in_flight_.begin(), in_flight_.end(),
                              [now](const NetEvent& e) { return e.deliver_at > now; });
  std::vector<NetEvent> due(std::make_move_iterator(split),
                            std::make_move_iterator(in_flight_.end()));
  in_flight_.erase(split, in_flight_.end());
  std::sort(due.begin(), due.end(), [](const NetEvent& a, const NetEvent& b) {
    return a.deliver_at != b.deliver_at ? a.deliver_at < b.deliver_at : a.seq < b.seq;
  });
  for (auto& e : due) {
    auto it = endpoints_.find({e.channel.receiver, e.channel.lane});
    if (it == endpoints_.end()) {
      ++stats_.undeliverable;
      continue;
    }
    ++stats_.delivered;
    it->second->deliver(std::move(e.msg));
  }
}

std::optional<Tick> SimNetwork::next_delivery() const {
  std::optional<Tick> best;
  for (const auto& e : in_flight_) {
    if (!best || e.deliver_at < *best) best = e.deliver_at;
  }
  return best;
}

}  // namespace shieldrep::transport
