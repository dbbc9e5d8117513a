#include "shieldrep/transport/adversary.hpp"

#include <algorithm>

#include "shieldrep/core/message.hpp"

namespace shieldrep::transport {

namespace {

constexpr std::size_t kCaptureDepth = 256;

bool in_set(const std::set<NodeId>& s, NodeId n) { return s.contains(n); }

}  // namespace

Adversary::Adversary(AdversaryPolicy policy, Tick gst, Tick delta, std::uint64_t seed)
    : policy_(std::move(policy)), gst_(gst), delta_(std::max<Tick>(delta, 1)), rng_(seed) {
  std::stable_sort(policy_.scripted.begin(), policy_.scripted.end(),
                   [](const ScriptedAction& a, const ScriptedAction& b) { return a.at < b.at; });
}

Tick Adversary::uniform(Tick lo, Tick hi) {
  if (hi <= lo) return lo;
  return std::uniform_int_distribution<Tick>(lo, hi)(rng_);
}

bool Adversary::coin(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::bernoulli_distribution(p)(rng_);
}

bool Adversary::blocked(const ChannelId& link) const {
  if (partition_.empty()) return false;
  return in_set(partition_, link.sender) != in_set(partition_, link.receiver);
}

bool Adversary::matches(const std::optional<ChannelId>& pattern, const ChannelId& link) const {
  return !pattern || *pattern == link;
}

std::optional<Tick> Adversary::bound_for(const ChannelId& link, Tick sent_at, Tick now) const {
  if (!after_gst(now) || blocked(link)) return std::nullopt;
  return std::max(sent_at, gst_) + delta_;
}

void Adversary::tamper(Bytes& frame, bool payload_byte) {
  if (frame.size() < 2) return;
  std::size_t pos;
  // Data frames: [type][header][payload][mac]; aim inside the payload.
  const std::size_t payload_start = 1 + kEnvelopeHeaderSize;
  if (payload_byte && frame.size() > payload_start + kMacSize) {
    pos = uniform(payload_start, frame.size() - kMacSize - 1);
  } else {
    pos = uniform(1, frame.size() - 1);
  }
  frame[pos] ^= static_cast<std::uint8_t>(1u << uniform(0, 7));
  ++stats_.tampered;
}

void Adversary::capture(const ChannelId& link, const Bytes& frame) {
  auto& q = captured_[link];
  q.push_back(frame);
  if (q.size() > kCaptureDepth) q.pop_front();
}

std::vector<NetEvent> Adversary::on_transmit(const ChannelId& link, const Bytes& frame, Tick now) {
  std::vector<NetEvent> out;
  capture(link, frame);
  if (blocked(link)) {
    ++stats_.partition_dropped;
    return out;
  }
  const ChannelFaults& faults = policy_.faults_for(link);
  const bool post = after_gst(now);
  if (!post && coin(faults.drop_prob)) {
    ++stats_.dropped;
    return out;
  }

  Bytes bytes = frame;
  auto tn = std::find_if(tamper_next_.begin(), tamper_next_.end(),
                         [&](const auto& p) { return matches(p, link); });
  if (tn != tamper_next_.end()) {
    tamper_next_.erase(tn);
    tamper(bytes, /*payload_byte=*/true);
  } else if (!post && coin(faults.tamper_prob)) {
    tamper(bytes, /*payload_byte=*/false);
  }

  Tick delay = uniform(1, delta_);
  const bool reorder = faults.reorder_window > 0;
  if (reorder && !post) delay += uniform(0, faults.reorder_window);
  Tick at = now + delay;
  for (const auto& [pattern, until] : hold_until_) {
    if (matches(pattern, link) && until > at) {
      at = until;
      ++stats_.delayed;
    }
  }
  if (!reorder) {
    // Per-channel FIFO: never overtake an earlier frame.
    at = std::max(at, last_deliver_[link]);
  }
  if (auto bound = bound_for(link, now, now)) at = std::min(at, *bound);
  if (!reorder) last_deliver_[link] = at;
  out.push_back(NetEvent{at, 0, link, std::move(bytes), now, false});

  if (coin(faults.dup_prob)) {
    ++stats_.duplicated;
    out.push_back(NetEvent{now + uniform(1, delta_), 0, link, frame, now, true});
  }
  if (coin(faults.replay_prob)) {
    ++stats_.replayed;
    out.push_back(NetEvent{at + uniform(delta_, 4 * delta_), 0, link, frame, now, true});
  }
  return out;
}

std::vector<NodeId> adversary_step(Adversary& adv, std::vector<NetEvent>& in_flight, Tick now,
                                   std::uint64_t& next_seq) {
  std::vector<NodeId> crashes;
  auto& script = adv.policy_.scripted;
  while (adv.next_script_ < script.size() && script[adv.next_script_].at <= now) {
    const ScriptedAction& a = script[adv.next_script_++];
    switch (a.type) {
      case ActionType::Partition:
        adv.partition_ = std::set<NodeId>(a.nodes.begin(), a.nodes.end());
        break;
      case ActionType::Heal:
        adv.partition_.clear();
        break;
      case ActionType::TamperNext:
        adv.tamper_next_.push_back(a.channel);
        break;
      case ActionType::DelayAll: {
        const Tick until = now + a.ticks;
        adv.hold_until_.emplace_back(a.channel, until);
        for (auto& e : in_flight) {
          if (adv.matches(a.channel, e.channel) && e.deliver_at < until) {
            e.deliver_at = until;
            ++adv.stats_.delayed;
          }
        }
        break;
      }
      case ActionType::ReplayCaptured: {
        for (const auto& [link, frames] : adv.captured_) {
          if (!adv.matches(a.channel, link)) continue;
          const std::size_t n = std::min<std::size_t>(a.count, frames.size());
          for (std::size_t i = frames.size() - n; i < frames.size(); ++i) {
            in_flight.push_back(
                NetEvent{now + adv.uniform(1, adv.delta_), next_seq++, link, frames[i], now, true});
            ++adv.stats_.replayed;
          }
        }
        break;
      }
      case ActionType::CrashTee:
        crashes.insert(crashes.end(), a.nodes.begin(), a.nodes.end());
        break;
    }
  }
  std::erase_if(adv.hold_until_, [now](const auto& h) { return h.second <= now; });

  // Partition-crossing frames die in transit; everything else obeys the
  // post-GST bound from here on.
  std::erase_if(in_flight, [&](const NetEvent& e) {
    if (!adv.blocked(e.channel)) return false;
    ++adv.stats_.partition_dropped;
    return true;
  });
  if (adv.after_gst(now)) {
    for (auto& e : in_flight) {
      if (e.injected) continue;
      if (auto bound = adv.bound_for(e.channel, e.sent_at, now)) {
        e.deliver_at = std::min(e.deliver_at, std::max(*bound, now));
      }
    }
  }
  return crashes;
}

}  // namespace shieldrep::transport
