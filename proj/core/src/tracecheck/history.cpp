#include "shieldrep/tracecheck/history.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_set>

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep::tracecheck {

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();
constexpr std::size_t kExhaustiveLimit = 64;

// Register values are interned; 0 means "absent".
struct Interner {
  std::map<Bytes, std::uint32_t> ids;
  std::uint32_t id(const HistoryOp& o) {
    if (o.op == OpType::Get && !o.found) return 0;
    return ids.try_emplace(o.value, static_cast<std::uint32_t>(ids.size() + 1)).first->second;
  }
};

void check_window(const std::vector<HistoryOp>& h, const std::vector<std::size_t>& idx) {
  std::vector<std::pair<std::uint64_t, int>> ev;
  for (std::size_t i : idx) {
    if (!h[i].completed) continue;
    ev.emplace_back(h[i].invoke, 1);
    ev.emplace_back(h[i].response, -1);
  }
  std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  int open = 0;
  for (const auto& [t, d] : ev) {
    open += d;
    if (open > static_cast<int>(kMaxWindow)) {
      throw Error(Errc::WindowTooWide, "more than " + std::to_string(kMaxWindow) +
                                           " overlapping operations on one key");
    }
  }
}

// Just-in-time linearization search on one register.
class KeySearch {
 public:
  KeySearch(const std::vector<HistoryOp>& h, std::vector<std::size_t> ops) : h_(h), ops_(std::move(ops)) {
    for (std::size_t i : ops_) vals_.push_back(interner_.id(h_[i]));
    words_ = (ops_.size() + 63) / 64;
  }

  bool run(std::vector<std::size_t>& order) {
    std::vector<std::uint64_t> done(words_, 0);
    std::vector<std::size_t> path;
    if (!dfs(done, 0, path)) return false;
    for (std::size_t j : path) order.push_back(ops_[j]);
    return true;
  }

 private:
  bool is_done(const std::vector<std::uint64_t>& d, std::size_t j) const {
    return (d[j / 64] >> (j % 64)) & 1u;
  }

  bool dfs(std::vector<std::uint64_t>& done, std::uint32_t state, std::vector<std::size_t>& path) {
    std::uint64_t min_resp = kNever;
    bool all_completed_done = true;
    for (std::size_t j = 0; j < ops_.size(); ++j) {
      if (is_done(done, j) || !h_[ops_[j]].completed) continue;
      all_completed_done = false;
      min_resp = std::min(min_resp, h_[ops_[j]].response);
    }
    if (all_completed_done) return true;
    std::string key(reinterpret_cast<const char*>(done.data()), done.size() * 8);
    key.append(reinterpret_cast<const char*>(&state), sizeof state);
    if (!seen_.insert(std::move(key)).second) return false;
    for (std::size_t j = 0; j < ops_.size(); ++j) {
      if (is_done(done, j)) continue;
      const HistoryOp& o = h_[ops_[j]];
      if (o.invoke > min_resp) continue;
      std::uint32_t next = state;
      if (o.op == OpType::Put) {
        next = vals_[j];
      } else if (vals_[j] != state) {
        continue;
      }
      done[j / 64] |= std::uint64_t{1} << (j % 64);
      path.push_back(j);
      if (dfs(done, next, path)) return true;
      path.pop_back();
      done[j / 64] &= ~(std::uint64_t{1} << (j % 64));
    }
    return false;
  }

  const std::vector<HistoryOp>& h_;
  std::vector<std::size_t> ops_;
  std::vector<std::uint32_t> vals_;
  Interner interner_;
  std::size_t words_ = 0;
  std::unordered_set<std::string> seen_;
};

std::vector<HistoryOp> take(const std::vector<HistoryOp>& h, const std::vector<std::size_t>& idx) {
  std::vector<HistoryOp> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(h[i]);
  return out;
}

}  // namespace

CheckResult check_linearizable(const std::vector<HistoryOp>& history) {
  std::map<Bytes, std::vector<std::size_t>> by_key;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& o = history[i];
    if (o.op == OpType::Get && !o.completed) continue;
    by_key[o.key].push_back(i);
  }
  CheckResult res;
  for (auto& [key, idx] : by_key) {
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return history[a].invoke < history[b].invoke; });
    check_window(history, idx);
    std::vector<std::size_t> order;
    if (KeySearch(history, idx).run(order)) {
      res.order.insert(res.order.end(), order.begin(), order.end());
      continue;
    }
    res.ok = false;
    res.order.clear();
    res.detail = "no linearization for key " + to_hex(key);
    for (std::size_t p = 1; p <= idx.size(); ++p) {
      std::vector<std::size_t> prefix(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(p));
      std::vector<std::size_t> scratch;
      if (!KeySearch(history, prefix).run(scratch)) {
        res.witness = take(history, prefix);
        break;
      }
    }
    return res;
  }
  // Present the combined order by linearization point approximation.
  std::stable_sort(res.order.begin(), res.order.end(), [&](std::size_t a, std::size_t b) {
    return history[a].invoke < history[b].invoke;
  });
  return res;
}

namespace {

// Exhaustive search over interleavings of the clients' program orders.
class SequentialSearch {
 public:
  explicit SequentialSearch(const std::vector<HistoryOp>& h) : h_(h) {
    std::map<ClientId, std::vector<std::size_t>> per;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (h[i].op == OpType::Get && !h[i].completed) continue;
      per[h[i].client].push_back(i);
    }
    for (auto& [c, v] : per) {
      std::sort(v.begin(), v.end(), [&](auto a, auto b) { return h[a].invoke < h[b].invoke; });
      queues_.push_back(std::move(v));
    }
  }

  bool run(std::vector<std::size_t>& order) {
    std::vector<std::size_t> pos(queues_.size(), 0);
    std::map<Bytes, std::optional<Bytes>> state;
    return dfs(pos, state, order);
  }

 private:
  bool dfs(std::vector<std::size_t>& pos, std::map<Bytes, std::optional<Bytes>>& state,
           std::vector<std::size_t>& order) {
    bool finished = true;
    for (std::size_t c = 0; c < queues_.size(); ++c) {
      for (std::size_t k = pos[c]; k < queues_[c].size(); ++k) {
        if (h_[queues_[c][k]].completed) finished = false;
      }
    }
    if (finished) return true;
    std::string memo(reinterpret_cast<const char*>(pos.data()), pos.size() * sizeof(std::size_t));
    for (const auto& [k, v] : state) {
      memo += to_hex(k) + "=" + (v ? to_hex(*v) : "-") + ";";
    }
    if (!seen_.insert(std::move(memo)).second) return false;
    for (std::size_t c = 0; c < queues_.size(); ++c) {
      if (pos[c] >= queues_[c].size()) continue;
      const std::size_t i = queues_[c][pos[c]];
      const HistoryOp& o = h_[i];
      auto it = state.find(o.key);
      const std::optional<Bytes> cur = it == state.end() ? std::nullopt : it->second;
      std::optional<Bytes> saved = cur;
      if (o.op == OpType::Get) {
        const bool match = o.found ? (cur && *cur == o.value) : !cur;
        if (!match) continue;
      } else {
        state[o.key] = o.value;
      }
      ++pos[c];
      order.push_back(i);
      if (dfs(pos, state, order)) return true;
      order.pop_back();
      --pos[c];
      if (o.op == OpType::Put) {
        if (saved) state[o.key] = *saved; else state.erase(o.key);
      }
      // A pending Put may also never take effect.
      if (o.op == OpType::Put && !o.completed) {
        ++pos[c];
        if (dfs(pos, state, order)) return true;
        --pos[c];
      }
    }
    return false;
  }

  const std::vector<HistoryOp>& h_;
  std::vector<std::vector<std::size_t>> queues_;
  std::unordered_set<std::string> seen_;
};

// Fast path: writes serialized by commit index; each read placed at the
// earliest write position consistent with its value and program order.
std::optional<CheckResult> sequential_by_commit_order(const std::vector<HistoryOp>& h) {
  std::map<std::uint64_t, std::size_t> writes;  // commit index -> op
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i].op != OpType::Put) continue;
    if (!h[i].commit_index) {
      if (h[i].completed) return std::nullopt;
      continue;  // never took effect
    }
    writes[*h[i].commit_index] = i;
  }
  std::map<Bytes, std::vector<std::pair<std::uint64_t, std::size_t>>> per_key;
  for (const auto& [ci, i] : writes) per_key[h[i].key].emplace_back(ci, i);

  // An abandoned Put that still committed is not ordered against its
  // client's later ops; it gets a sequence of its own.
  std::map<std::pair<ClientId, std::size_t>, std::vector<std::size_t>> per_client;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i].op == OpType::Get && !h[i].completed) continue;
    if (h[i].op == OpType::Put && !h[i].commit_index) continue;
    const std::size_t lane = h[i].completed ? 0 : i + 1;
    per_client[{h[i].client, lane}].push_back(i);
  }
  CheckResult res;
  // (position, tie, op): reads sort after the write at the same position.
  std::vector<std::tuple<std::uint64_t, int, std::uint64_t, std::size_t>> placed;
  for (auto& [c, ops] : per_client) {
    std::sort(ops.begin(), ops.end(), [&](auto a, auto b) { return h[a].invoke < h[b].invoke; });
    std::uint64_t lb = 0;
    std::uint64_t seq = 0;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const HistoryOp& o = h[ops[k]];
      if (o.op == OpType::Put) {
        if (*o.commit_index < lb) {
          res.ok = false;
          res.detail = "a client's write committed before an earlier op of the same client";
          res.witness = {o};
          return res;
        }
        lb = *o.commit_index;
        placed.emplace_back(lb, 0, seq++, ops[k]);
        continue;
      }
      std::uint64_t ub = kNever;
      for (std::size_t n = k + 1; n < ops.size(); ++n) {
        if (h[ops[n]].op == OpType::Put) {
          ub = *h[ops[n]].commit_index - 1;
          break;
        }
      }
      // Candidate positions: lb, or the commit index of each write to the key after lb.
      const auto& kw = per_key[o.key];
      auto value_at = [&](std::uint64_t p) -> const HistoryOp* {
        const HistoryOp* v = nullptr;
        for (const auto& [ci, i] : kw) {
          if (ci > p) break;
          v = &h[i];
        }
        return v;
      };
      auto matches = [&](std::uint64_t p) {
        const HistoryOp* w = value_at(p);
        return o.found ? (w && w->value == o.value) : w == nullptr;
      };
      std::optional<std::uint64_t> chosen;
      if (lb <= ub && matches(lb)) chosen = lb;
      for (const auto& [ci, i] : kw) {
        if (chosen) break;
        if (ci <= lb) continue;
        if (ci > ub) break;
        if (matches(ci)) chosen = ci;
      }
      if (!chosen) {
        res.ok = false;
        res.detail = "read value not observable at any position allowed by program order";
        res.witness = {o};
        return res;
      }
      lb = *chosen;
      placed.emplace_back(lb, 1, seq++, ops[k]);
    }
  }
  std::sort(placed.begin(), placed.end());
  for (const auto& p : placed) res.order.push_back(std::get<3>(p));
  return res;
}

}  // namespace

CheckResult check_sequential(const std::vector<HistoryOp>& history) {
  if (auto fast = sequential_by_commit_order(history); fast && fast->ok) return *fast;
  CheckResult res;
  if (history.size() > kExhaustiveLimit) {
    res.ok = false;
    res.detail = "commit order admits no serialization; history too large for exhaustive search";
    if (auto fast = sequential_by_commit_order(history)) res.witness = fast->witness;
    return res;
  }
  std::vector<std::size_t> order;
  if (SequentialSearch(history).run(order)) {
    res.order = std::move(order);
    return res;
  }
  res.ok = false;
  res.detail = "no serialization respects program order";
  res.witness = history;
  return res;
}

}  // namespace shieldrep::tracecheck
