#include "quorumlab/core.hpp"

#include <algorithm>

namespace quorumlab {

WriterId WriterId::of(int id) {
  if (id < 0) throw validation_error("writer id must be nonnegative");
  return WriterId{id};
}

std::string to_string(const WriterId& w) {
  if (w.is_bottom()) return "_";
  return "w" + std::to_string(w.raw);
}

std::string to_string(const Value& v) {
  return "(" + std::to_string(v.ts) + "," + to_string(v.wid) + ")";
}

void SystemConfig::validate() const {
  if (servers < 1) throw validation_error("need at least one server");
  if (servers > 16) throw validation_error("at most 16 servers supported");
  if (writers < 1) throw validation_error("need at least one writer");
  if (readers < 1) throw validation_error("need at least one reader");
  if (crash_tolerance < 0) throw validation_error("crash tolerance negative");
  if (crash_tolerance >= servers)
    throw validation_error("crash tolerance must be below server count");
}

bool feasible_w2r1(const SystemConfig& cfg) {
  // R < S/t - 2 with exact integer arithmetic; t = 0 never constrains.
  if (cfg.crash_tolerance == 0) return true;
  return std::int64_t(cfg.readers + 2) * cfg.crash_tolerance < cfg.servers;
}

bool feasible_w2r2(const SystemConfig& cfg) {
  return std::int64_t(2) * cfg.crash_tolerance < cfg.servers;
}

std::optional<AdmissibilityWitness> admissible(const Value& v,
                                               const std::vector<ReadAck>& acks,
                                               int degree,
                                               const SystemConfig& cfg) {
  cfg.validate();
  if (degree < 1 || degree > cfg.readers + 1)
    throw validation_error("degree out of range");

  std::vector<const ReadAck*> holders;
  for (const auto& a : acks)
    if (a.contains(v)) holders.push_back(&a);
  std::sort(holders.begin(), holders.end(),
            [](const ReadAck* x, const ReadAck* y) {
              return x->server < y->server;
            });

  std::int64_t need64 = std::int64_t(cfg.servers) -
                        std::int64_t(degree) * cfg.crash_tolerance;
  int need = int(std::max<std::int64_t>(need64, 1));
  int n = int(holders.size());
  if (n < need) return std::nullopt;

  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (int(__builtin_popcount(mask)) < need) continue;
    std::set<int> pi;
    bool first = true;
    for (int i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      const auto& regs = holders[i]->vector.at(v);
      if (first) {
        pi = regs;
        first = false;
      } else {
        std::set<int> keep;
        for (int r : regs)
          if (pi.count(r)) keep.insert(r);
        pi.swap(keep);
      }
      if (int(pi.size()) < degree) break;
    }
    if (int(pi.size()) < degree) continue;
    AdmissibilityWitness w;
    w.value = v;
    w.degree = degree;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) w.mu.push_back(*holders[i]);
    w.pi = std::move(pi);
    return w;
  }
  return std::nullopt;
}

bool witness_valid(const AdmissibilityWitness& w,
                   const std::vector<ReadAck>& acks, const SystemConfig& cfg) {
  if (w.degree < 1 || w.degree > cfg.readers + 1) return false;
  std::int64_t need64 = std::int64_t(cfg.servers) -
                        std::int64_t(w.degree) * cfg.crash_tolerance;
  int need = int(std::max<std::int64_t>(need64, 1));
  if (int(w.mu.size()) < need) return false;
  if (int(w.pi.size()) < w.degree) return false;
  std::set<int> seen;
  for (const auto& m : w.mu) {
    if (!seen.insert(m.server).second) return false;
    bool found = false;
    for (const auto& a : acks) {
      if (a.server != m.server) continue;
      found = true;
      auto it = a.vector.find(w.value);
      if (it == a.vector.end()) return false;
      for (int r : w.pi)
        if (!it->second.count(r)) return false;
    }
    if (!found) return false;
  }
  return true;
}

MaxAdmissible max_admissible(std::vector<ReadAck> acks,
                             const SystemConfig& cfg) {
  cfg.validate();
  for (;;) {
    std::optional<Value> best;
    for (const auto& a : acks)
      for (const auto& [v, regs] : a.vector)
        if (!best || v > *best) best = v;
    if (!best)
      throw protocol_violation("no admissible value in read acks");
    for (int deg = 1; deg <= cfg.readers + 1; ++deg) {
      auto w = admissible(*best, acks, deg, cfg);
      if (w) return MaxAdmissible{*best, std::move(*w)};
    }
    for (auto& a : acks) a.vector.erase(*best);
  }
}

}  // namespace quorumlab
