#include "quorumlab/histories.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>

namespace quorumlab {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
constexpr std::int64_t kNegInf = std::numeric_limits<std::int64_t>::min();

std::int64_t effective_response(const OpRecord& op) {
  return op.pending() ? kInf : op.response;
}

// One value cluster: the write producing the value plus the reads of it.
struct Cluster {
  Value value;
  std::int64_t write_invoke = kNegInf;
  std::int64_t write_response = kNegInf;
  int write_id = -1;  // -1 marks the virtual initial write
  std::vector<const OpRecord*> reads;
};

struct FlatOp {
  int id;
  OpKind kind;
  std::int64_t invoke;
  std::int64_t response;  // kInf when pending-included
  Value value;
};

bool run_legal(const std::vector<FlatOp>& seq) {
  Value current = Value::initial();
  for (const auto& op : seq) {
    if (op.kind == OpKind::Write) {
      current = op.value;
    } else if (op.value != current) {
      return false;
    }
  }
  return true;
}

bool respects_realtime(const std::vector<FlatOp>& seq) {
  for (size_t i = 0; i < seq.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (seq[i].response < seq[j].invoke) return false;
  return true;
}

}  // namespace

void check_wellformed(const History& h) {
  h.config.validate();
  std::set<int> ids;
  std::map<int, std::vector<const OpRecord*>> per_client;
  std::set<Value> write_values;
  for (const auto& op : h.ops) {
    if (op.id < 0) throw validation_error("op id must be nonnegative");
    if (!ids.insert(op.id).second)
      throw validation_error("duplicate op id " + std::to_string(op.id));
    if (op.client < 0 || op.client >= h.config.clients())
      throw validation_error("op " + std::to_string(op.id) +
                             " has unknown client");
    if (op.kind == OpKind::Write && !h.config.is_writer_client(op.client))
      throw validation_error("op " + std::to_string(op.id) +
                             " writes from a reader client");
    if (op.kind == OpKind::Read && !h.config.is_reader_client(op.client))
      throw validation_error("op " + std::to_string(op.id) +
                             " reads from a writer client");
    if (op.invoke < 0)
      throw validation_error("op " + std::to_string(op.id) +
                             " invoked at negative time");
    if (!op.pending() && op.response < op.invoke)
      throw validation_error("op " + std::to_string(op.id) +
                             " responds before invocation");
    if (!op.pending() && !op.value)
      throw validation_error("op " + std::to_string(op.id) +
                             " completed without a value");
    if (op.kind == OpKind::Write && op.value) {
      if (*op.value == Value::initial())
        throw validation_error("op " + std::to_string(op.id) +
                               " writes the initial value");
      if (op.value->wid.is_bottom())
        throw validation_error("op " + std::to_string(op.id) +
                               " writes a value without a writer id");
      if (h.config.writer_client(op.value->wid.raw) != op.client)
        throw validation_error("op " + std::to_string(op.id) +
                               " writes a value of another writer");
      if (!write_values.insert(*op.value).second)
        throw validation_error("duplicate write value " +
                               to_string(*op.value));
    }
    per_client[op.client].push_back(&op);
  }
  for (auto& [client, ops] : per_client) {
    std::sort(ops.begin(), ops.end(), [](const OpRecord* a, const OpRecord* b) {
      return a->invoke < b->invoke;
    });
    for (size_t i = 0; i + 1 < ops.size(); ++i) {
      if (ops[i]->pending())
        throw validation_error("client " + std::to_string(client) +
                               " invokes past a pending operation");
      if (ops[i]->response > ops[i + 1]->invoke)
        throw validation_error("client " + std::to_string(client) +
                               " has overlapping operations");
    }
  }
}

AtomicityVerdict check_atomic(const History& h) {
  check_wellformed(h);

  std::vector<const OpRecord*> completed;
  std::vector<const OpRecord*> optional_writes;
  std::map<Value, const OpRecord*> writers_of;
  for (const auto& op : h.ops) {
    if (!op.pending()) {
      completed.push_back(&op);
      if (op.kind == OpKind::Write) writers_of[*op.value] = &op;
    } else if (op.kind == OpKind::Write && op.value) {
      optional_writes.push_back(&op);
      writers_of[*op.value] = &op;
    }
  }

  for (const auto* op : completed) {
    if (op->kind != OpKind::Read) continue;
    if (*op->value == Value::initial()) continue;
    if (!writers_of.count(*op->value)) {
      AtomicityVerdict v;
      v.atomic = false;
      v.detail = "op " + std::to_string(op->id) + " returned " +
                 to_string(*op->value) + " which no write produced";
      return v;
    }
  }

  int k = int(optional_writes.size());
  AtomicityVerdict first_failure;
  bool have_failure = false;

  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    // bit set means the pending write is excluded
    std::set<Value> excluded;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) excluded.insert(*optional_writes[i]->value);

    bool inconsistent = false;
    for (const auto* op : completed) {
      if (op->kind == OpKind::Read && excluded.count(*op->value))
        inconsistent = true;
    }
    if (inconsistent) continue;

    // clusters keyed by value, virtual initial write included
    std::map<Value, Cluster> clusters;
    clusters[Value::initial()].value = Value::initial();
    for (const auto* op : completed) {
      if (op->kind == OpKind::Write) {
        auto& c = clusters[*op->value];
        c.value = *op->value;
        c.write_invoke = op->invoke;
        c.write_response = op->response;
        c.write_id = op->id;
      }
    }
    for (int i = 0; i < k; ++i) {
      const auto* op = optional_writes[i];
      if (excluded.count(*op->value)) continue;
      auto& c = clusters[*op->value];
      c.value = *op->value;
      c.write_invoke = op->invoke;
      c.write_response = kInf;
      c.write_id = op->id;
    }
    bool bad = false;
    for (const auto* op : completed) {
      if (op->kind != OpKind::Read) continue;
      auto it = clusters.find(*op->value);
      if (it == clusters.end()) {
        bad = true;  // read of an excluded pending write, filtered above
        break;
      }
      it->second.reads.push_back(op);
    }
    if (bad) continue;

    std::vector<Cluster*> order;
    for (auto& [v, c] : clusters) order.push_back(&c);
    int n = int(order.size());

    // within-cluster constraint: no read may complete before its write starts
    AtomicityVerdict verdict;
    bool self_loop = false;
    for (const auto* c : order) {
      for (const auto* r : c->reads) {
        if (effective_response(*r) < c->write_invoke) {
          verdict.atomic = false;
          verdict.cycle = {c->value};
          verdict.detail = "op " + std::to_string(r->id) + " returned " +
                           to_string(c->value) +
                           " before its write was invoked";
          self_loop = true;
          break;
        }
      }
      if (self_loop) break;
    }
    if (self_loop) {
      if (!have_failure) {
        first_failure = verdict;
        have_failure = true;
      }
      continue;
    }

    // edge a -> b when some op of a completes before some op of b starts
    std::vector<std::int64_t> min_resp(n, kInf), max_inv(n, kNegInf);
    for (int i = 0; i < n; ++i) {
      const auto* c = order[i];
      min_resp[i] = c->write_response;
      max_inv[i] = c->write_invoke;
      for (const auto* r : c->reads) {
        min_resp[i] = std::min(min_resp[i], effective_response(*r));
        max_inv[i] = std::max(max_inv[i], r->invoke);
      }
    }
    std::vector<std::vector<int>> adj(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b && min_resp[a] < max_inv[b]) adj[a].push_back(b);

    // shortest cycle: BFS back to each start node
    std::vector<int> shortest;
    for (int s = 0; s < n; ++s) {
      std::vector<int> parent(n, -2);
      std::queue<int> q;
      q.push(s);
      parent[s] = -1;
      bool closed = false;
      while (!q.empty() && !closed) {
        int u = q.front();
        q.pop();
        for (int w : adj[u]) {
          if (w == s) {
            std::vector<int> cyc;
            for (int x = u; x != -1; x = parent[x]) cyc.push_back(x);
            std::reverse(cyc.begin(), cyc.end());
            if (shortest.empty() || cyc.size() < shortest.size())
              shortest = cyc;
            closed = true;
            break;
          }
          if (parent[w] == -2) {
            parent[w] = u;
            q.push(w);
          }
        }
      }
    }
    if (!shortest.empty()) {
      verdict.atomic = false;
      for (int idx : shortest) verdict.cycle.push_back(order[idx]->value);
      verdict.detail = "value clusters form a real-time precedence cycle";
      if (!have_failure) {
        first_failure = verdict;
        have_failure = true;
      }
      continue;
    }

    // acyclic: topological order by Kahn, smallest value first
    std::vector<int> indeg(n, 0);
    for (int a = 0; a < n; ++a)
      for (int b : adj[a]) indeg[b]++;
    std::set<int> ready;
    for (int i = 0; i < n; ++i)
      if (indeg[i] == 0) ready.insert(i);
    std::vector<int> topo;
    while (!ready.empty()) {
      int u = *ready.begin();
      ready.erase(ready.begin());
      topo.push_back(u);
      for (int w : adj[u])
        if (--indeg[w] == 0) ready.insert(w);
    }

    verdict.atomic = true;
    for (int idx : topo) {
      Cluster* c = order[idx];
      if (c->write_id >= 0) verdict.serialization.push_back(c->write_id);
      std::vector<const OpRecord*> reads = c->reads;
      std::sort(reads.begin(), reads.end(),
                [](const OpRecord* a, const OpRecord* b) {
                  if (a->invoke != b->invoke) return a->invoke < b->invoke;
                  return a->id < b->id;
                });
      for (const auto* r : reads) verdict.serialization.push_back(r->id);
    }
    return verdict;
  }

  if (have_failure) return first_failure;
  AtomicityVerdict v;
  v.atomic = false;
  v.detail = "no completion of the pending writes admits a serialization";
  return v;
}

bool serialization_valid(const History& h,
                         const std::vector<int>& serialization) {
  std::map<int, const OpRecord*> by_id;
  for (const auto& op : h.ops) by_id[op.id] = &op;

  std::set<int> seen;
  std::vector<FlatOp> seq;
  for (int id : serialization) {
    auto it = by_id.find(id);
    if (it == by_id.end()) return false;
    if (!seen.insert(id).second) return false;
    const auto& op = *it->second;
    if (op.pending() && (op.kind == OpKind::Read || !op.value)) return false;
    seq.push_back(FlatOp{op.id, op.kind, op.invoke, effective_response(op),
                         op.value ? *op.value : Value::initial()});
  }
  for (const auto& op : h.ops)
    if (!op.pending() && !seen.count(op.id)) return false;
  return respects_realtime(seq) && run_legal(seq);
}

bool brute_force_atomic(const History& h, int max_ops) {
  check_wellformed(h);

  std::vector<const OpRecord*> completed;
  std::vector<const OpRecord*> optional_writes;
  std::set<Value> known_writes;
  for (const auto& op : h.ops) {
    if (!op.pending()) {
      completed.push_back(&op);
      if (op.kind == OpKind::Write) known_writes.insert(*op.value);
    } else if (op.kind == OpKind::Write && op.value) {
      optional_writes.push_back(&op);
      known_writes.insert(*op.value);
    }
  }
  for (const auto* op : completed)
    if (op->kind == OpKind::Read && *op->value != Value::initial() &&
        !known_writes.count(*op->value))
      return false;

  int k = int(optional_writes.size());
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    std::set<Value> excluded;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) excluded.insert(*optional_writes[i]->value);
    bool inconsistent = false;
    for (const auto* op : completed)
      if (op->kind == OpKind::Read && excluded.count(*op->value))
        inconsistent = true;
    if (inconsistent) continue;

    std::vector<FlatOp> ops;
    for (const auto* op : completed)
      ops.push_back(FlatOp{op->id, op->kind, op->invoke, op->response,
                           *op->value});
    for (int i = 0; i < k; ++i) {
      const auto* op = optional_writes[i];
      if (excluded.count(*op->value)) continue;
      ops.push_back(FlatOp{op->id, op->kind, op->invoke, kInf, *op->value});
    }
    if (int(ops.size()) > max_ops)
      throw oracle_limit_error("too many operations for exhaustive search");

    std::vector<int> perm(ops.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = int(i);
    std::sort(perm.begin(), perm.end());
    do {
      std::vector<FlatOp> seq;
      for (int idx : perm) seq.push_back(ops[idx]);
      if (respects_realtime(seq) && run_legal(seq)) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return false;
}

MwaReport check_mwa(const History& h) {
  check_wellformed(h);
  MwaReport report;
  auto flag = [&](const std::string& s) {
    report.clean = false;
    report.violations.push_back(s);
  };

  std::map<Value, const OpRecord*> writers_of;
  for (const auto& op : h.ops)
    if (op.kind == OpKind::Write && op.value) writers_of[*op.value] = &op;

  for (const auto& op : h.ops) {
    if (!op.value) continue;
    if (op.value->ts < 0)
      flag("op " + std::to_string(op.id) + " carries a negative timestamp");
    if (op.value->wid.is_bottom() && op.value->ts != 0)
      flag("op " + std::to_string(op.id) +
           " carries a positive timestamp without a writer id");
  }

  for (const auto& a : h.ops) {
    if (a.kind != OpKind::Write || a.pending()) continue;
    for (const auto& b : h.ops) {
      if (b.id == a.id || !b.value) continue;
      if (a.response >= b.invoke) continue;
      if (b.kind == OpKind::Write && *b.value < *a.value)
        flag("write op " + std::to_string(b.id) + " follows write op " +
             std::to_string(a.id) + " but carries a smaller value");
      if (b.kind == OpKind::Read && *b.value < *a.value)
        flag("read op " + std::to_string(b.id) + " follows write op " +
             std::to_string(a.id) + " but returned a smaller value");
    }
  }

  for (const auto& op : h.ops) {
    if (op.kind != OpKind::Read || op.pending()) continue;
    if (*op.value == Value::initial()) continue;
    auto it = writers_of.find(*op.value);
    if (it == writers_of.end()) {
      flag("read op " + std::to_string(op.id) + " returned " +
           to_string(*op.value) + " which no write produced");
      continue;
    }
    if (op.response < it->second->invoke)
      flag("read op " + std::to_string(op.id) +
           " completed before write op " + std::to_string(it->second->id) +
           " was invoked");
  }

  for (const auto& a : h.ops) {
    if (a.kind != OpKind::Read || a.pending()) continue;
    for (const auto& b : h.ops) {
      if (b.kind != OpKind::Read || b.pending() || b.id == a.id) continue;
      if (a.response < b.invoke && *b.value < *a.value)
        flag("read op " + std::to_string(b.id) + " follows read op " +
             std::to_string(a.id) + " but returned a smaller value");
    }
  }

  return report;
}

}  // namespace quorumlab
