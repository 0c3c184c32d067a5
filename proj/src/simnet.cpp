#include "quorumlab/simnet.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>

namespace quorumlab {

void validate_schedule(const SystemConfig& cfg, const Schedule& s) {
  cfg.validate();
  int n = int(s.workload.ops.size());
  for (int i = 0; i < n; ++i) {
    const auto& op = s.workload.ops[i];
    if (op.id != i)
      throw validation_error("workload op ids must be dense and in order");
    if (op.client < 0 || op.client >= cfg.clients())
      throw validation_error("workload op " + std::to_string(i) +
                             " has unknown client");
    if (op.kind == OpKind::Write && !cfg.is_writer_client(op.client))
      throw validation_error("workload op " + std::to_string(i) +
                             " writes from a reader client");
    if (op.kind == OpKind::Read && !cfg.is_reader_client(op.client))
      throw validation_error("workload op " + std::to_string(i) +
                             " reads from a writer client");
    if (op.at_step < 0)
      throw validation_error("workload op " + std::to_string(i) +
                             " invoked at negative step");
    for (int d : op.deps)
      if (d < 0 || d >= n || d == i)
        throw validation_error("workload op " + std::to_string(i) +
                               " has bad dependency");
  }
  // dependency graph must be acyclic
  {
    std::vector<int> indeg(n, 0);
    for (const auto& op : s.workload.ops) indeg[op.id] = int(op.deps.size());
    std::vector<int> ready;
    for (int i = 0; i < n; ++i)
      if (indeg[i] == 0) ready.push_back(i);
    int seen = 0;
    while (!ready.empty()) {
      int u = ready.back();
      ready.pop_back();
      ++seen;
      for (const auto& op : s.workload.ops)
        for (int d : op.deps)
          if (d == u && --indeg[op.id] == 0) ready.push_back(op.id);
    }
    if (seen != n) throw validation_error("workload dependencies form a cycle");
  }
  auto check_key = [&](const std::tuple<int, int, int>& k) {
    auto [op, rt, server] = k;
    if (op < 0 || op >= n) throw validation_error("plan names unknown op");
    if (rt != 0 && rt != 1)
      throw validation_error("plan round trip index out of range");
    if (server < 0 || server >= cfg.servers)
      throw validation_error("plan names unknown server");
  };
  for (const auto& [k, key] : s.plan) {
    check_key(k);
    if (key < 0) throw validation_error("plan key must be nonnegative");
    if (s.skips.count(k))
      throw validation_error("plan entry is also marked skip");
  }
  for (const auto& k : s.skips) check_key(k);
  if (int(s.crashes.size()) > cfg.crash_tolerance)
    throw validation_error("crash plan exceeds the crash tolerance");
  for (const auto& [server, step] : s.crashes) {
    if (server < 0 || server >= cfg.servers)
      throw validation_error("crash plan names unknown server");
    if (step < 0) throw validation_error("crash step must be nonnegative");
  }
}

namespace {

struct Msg {
  int op = -1;
  int rt = -1;
  int server = -1;
  int client = -1;
  RequestPayload payload;
  std::int64_t key = 0;
  int seq = 0;
  bool planned = false;
  bool delivered = false;
  bool dropped = false;
};

struct OpRun {
  const WorkloadOp* wop = nullptr;
  std::unique_ptr<ClientOp> automaton;
  bool invoked = false;
  bool completed = false;
  int round = -1;
  int acks = 0;
  std::vector<std::pair<int, ReplyPayload>> replies;
  std::int64_t invoke_time = -1;
  std::int64_t response_time = -1;
  int rounds_done = 0;
  std::optional<Value> sent_value;
};

}  // namespace

ExecutionTrace run(const SystemConfig& cfg, const std::string& protocol,
                   const Schedule& schedule) {
  validate_schedule(cfg, schedule);
  const ProtocolFamily& family = protocol_family(protocol);

  ExecutionTrace trace;
  trace.config = cfg;
  trace.protocol = protocol;
  trace.schedule = schedule;

  int n = int(schedule.workload.ops.size());
  std::vector<OpRun> runs(n);
  for (int i = 0; i < n; ++i) runs[i].wop = &schedule.workload.ops[i];

  std::vector<ServerState> states(cfg.servers, initial_server_state());
  std::vector<bool> alive(cfg.servers, true);
  std::vector<int> client_busy(cfg.clients(), -1);
  std::vector<int> writes_started(cfg.writers, 0);
  std::vector<std::set<Value>> reader_queues(cfg.readers,
                                             std::set<Value>{Value::initial()});

  std::vector<Msg> msgs;
  std::set<std::tuple<int, int, int>> resolved;
  std::set<std::tuple<int, int, int>> sent;
  std::vector<std::multiset<std::int64_t>> unresolved_keys(cfg.servers);
  for (const auto& [slot, key] : schedule.plan)
    unresolved_keys[std::get<2>(slot)].insert(key);
  auto resolve_slot = [&](const std::tuple<int, int, int>& slot) {
    if (!resolved.insert(slot).second) return;
    auto& keys = unresolved_keys[std::get<2>(slot)];
    auto it = keys.find(schedule.plan.at(slot));
    if (it != keys.end()) keys.erase(it);
  };
  int send_seq = 0;
  std::int64_t now = 0;
  int event_seq = 0;

  auto record = [&](TraceEvent ev) {
    ev.time = now++;
    ev.seq = event_seq++;
    trace.events.push_back(std::move(ev));
    return trace.events.back().time;
  };

  auto start_round = [&](int op_id) {
    OpRun& r = runs[op_id];
    RequestPayload req = r.automaton->request(r.round);
    if (r.wop->kind == OpKind::Write) {
      if (const auto* w = std::get_if<WriteRequest>(&req))
        r.sent_value = w->value;
      if (const auto* w = std::get_if<NaiveWrite>(&req))
        r.sent_value = w->value;
    }
    for (int s = 0; s < cfg.servers; ++s) {
      std::tuple<int, int, int> slot{op_id, r.round, s};
      if (schedule.skips.count(slot)) continue;
      if (!alive[s]) continue;
      Msg m;
      m.op = op_id;
      m.rt = r.round;
      m.server = s;
      m.client = r.wop->client;
      m.payload = req;
      m.seq = send_seq++;
      auto it = schedule.plan.find(slot);
      if (it != schedule.plan.end()) {
        m.key = it->second;
        m.planned = true;
      }
      msgs.push_back(std::move(m));
      sent.insert(slot);
    }
  };

  auto finish_op = [&](int op_id, std::int64_t at) {
    OpRun& r = runs[op_id];
    r.completed = true;
    r.response_time = at;
    client_busy[r.wop->client] = -1;
    for (const auto& [slot, key] : schedule.plan)
      if (std::get<0>(slot) == op_id && !sent.count(slot))
        resolve_slot(slot);
  };

  for (;;) {
    bool progressed = false;

    for (int s = 0; s < cfg.servers; ++s) {
      auto it = schedule.crashes.find(s);
      if (it == schedule.crashes.end() || !alive[s] || it->second > now)
        continue;
      alive[s] = false;
      for (auto& m : msgs)
        if (m.server == s && !m.delivered && !m.dropped) m.dropped = true;
      for (const auto& [slot, key] : schedule.plan)
        if (std::get<2>(slot) == s) resolve_slot(slot);
      TraceEvent ev;
      ev.kind = "crash";
      ev.server = s;
      record(std::move(ev));
      progressed = true;
    }

    for (int i = 0; i < n; ++i) {
      OpRun& r = runs[i];
      if (r.invoked || r.wop->at_step > now) continue;
      if (client_busy[r.wop->client] != -1) continue;
      bool deps_done = true;
      for (int d : r.wop->deps)
        if (!runs[d].completed) deps_done = false;
      if (!deps_done) continue;
      r.invoked = true;
      client_busy[r.wop->client] = i;
      if (r.wop->kind == OpKind::Write) {
        int writer = r.wop->client;
        int seq = ++writes_started[writer];
        r.automaton = family.make_write(cfg, writer, seq);
      } else {
        int reader = r.wop->client - cfg.writers;
        r.automaton = family.make_read(cfg, reader, &reader_queues[reader]);
      }
      r.round = 0;
      TraceEvent ev;
      ev.kind = "invoke";
      ev.client = r.wop->client;
      ev.op = i;
      ev.payload = r.wop->kind == OpKind::Write ? "write" : "read";
      r.invoke_time = record(std::move(ev));
      start_round(i);
      progressed = true;
    }

    // one delivery: the eligible message with the smallest (key, send seq)
    int pick = -1;
    for (int mi = 0; mi < int(msgs.size()); ++mi) {
      Msg& m = msgs[mi];
      if (m.delivered || m.dropped) continue;
      if (!alive[m.server]) continue;
      const auto& keys = unresolved_keys[m.server];
      if (!keys.empty() && *keys.begin() < m.key) continue;
      if (pick < 0 || std::tie(m.key, m.seq) <
                          std::tie(msgs[pick].key, msgs[pick].seq))
        pick = mi;
    }
    if (pick >= 0) {
      Msg& m = msgs[pick];
      m.delivered = true;
      if (m.planned) resolve_slot({m.op, m.rt, m.server});
      ReplyPayload reply =
          server_process(family.naive_servers, states[m.server], m.payload);
      TraceEvent ev;
      ev.kind = "deliver";
      ev.client = m.client;
      ev.server = m.server;
      ev.op = m.op;
      ev.rt = m.rt;
      ev.payload = render_request(cfg, m.payload);
      ev.reply = render_reply(cfg, reply);
      ev.state =
          render_server_state(cfg, states[m.server], family.naive_servers);
      std::int64_t at = record(std::move(ev));

      OpRun& r = runs[m.op];
      if (!r.completed && m.rt == r.round && r.acks < cfg.quorum()) {
        r.acks++;
        r.replies.emplace_back(m.server, std::move(reply));
        if (r.acks == cfg.quorum()) {
          r.automaton->complete_round(r.round, r.replies);
          r.rounds_done++;
          r.acks = 0;
          r.replies.clear();
          if (r.round + 1 < r.automaton->total_rounds()) {
            r.round++;
            start_round(m.op);
          } else {
            finish_op(m.op, at);
          }
        }
      }
      progressed = true;
    }

    if (progressed) continue;

    std::int64_t jump = std::numeric_limits<std::int64_t>::max();
    for (int s = 0; s < cfg.servers; ++s) {
      auto it = schedule.crashes.find(s);
      if (it != schedule.crashes.end() && alive[s] && it->second > now)
        jump = std::min(jump, it->second);
    }
    for (int i = 0; i < n; ++i) {
      OpRun& r = runs[i];
      if (r.invoked || r.wop->at_step <= now) continue;
      if (client_busy[r.wop->client] != -1) continue;
      bool deps_done = true;
      for (int d : r.wop->deps)
        if (!runs[d].completed) deps_done = false;
      if (deps_done) jump = std::min(jump, r.wop->at_step);
    }
    if (jump == std::numeric_limits<std::int64_t>::max()) break;
    now = jump;
  }

  for (int s = 0; s < cfg.servers; ++s)
    trace.final_states.push_back(
        render_server_state(cfg, states[s], family.naive_servers));

  trace.history.config = cfg;
  for (int i = 0; i < n; ++i) {
    const OpRun& r = runs[i];
    if (!r.invoked) continue;
    OpRecord rec;
    rec.id = i;
    rec.kind = r.wop->kind;
    rec.client = r.wop->client;
    rec.invoke = r.invoke_time;
    rec.response = r.completed ? r.response_time : -1;
    if (r.completed)
      rec.value = r.automaton->result();
    else if (r.wop->kind == OpKind::Write)
      rec.value = r.sent_value;
    rec.round_trips = r.rounds_done;
    trace.history.ops.push_back(rec);
  }
  return trace;
}

Workload random_workload(const SystemConfig& cfg, int ops,
                         std::uint64_t seed) {
  cfg.validate();
  if (ops < 0) throw validation_error("workload size must be nonnegative");
  std::mt19937_64 rng(seed);
  Workload w;
  std::vector<int> last_of_client(cfg.clients(), -1);
  for (int i = 0; i < ops; ++i) {
    WorkloadOp op;
    op.id = i;
    op.client = int(rng_below(rng, std::uint64_t(cfg.clients())));
    op.kind =
        cfg.is_writer_client(op.client) ? OpKind::Write : OpKind::Read;
    op.at_step = std::int64_t(rng_below(rng, std::uint64_t(3 * ops + 1)));
    // chained per client so plan rank order matches invocation order
    if (last_of_client[op.client] >= 0)
      op.deps.push_back(last_of_client[op.client]);
    last_of_client[op.client] = i;
    w.ops.push_back(std::move(op));
  }
  return w;
}

Schedule random_schedule(const SystemConfig& cfg, const Workload& workload,
                         std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  Schedule s;
  s.workload = workload;
  int n = int(workload.ops.size());

  // one global order over all round trips; a unit waits for its op's earlier
  // round and for both rounds of every dependency
  int units = 2 * n;
  std::vector<std::vector<int>> succ(units);
  std::vector<int> indeg(units, 0);
  auto unit = [](int op, int rt) { return 2 * op + rt; };
  for (const auto& op : workload.ops) {
    succ[unit(op.id, 0)].push_back(unit(op.id, 1));
    indeg[unit(op.id, 1)]++;
    for (int d : op.deps) {
      succ[unit(d, 1)].push_back(unit(op.id, 0));
      indeg[unit(op.id, 0)]++;
    }
  }
  std::vector<int> ready;
  for (int u = 0; u < units; ++u)
    if (indeg[u] == 0) ready.push_back(u);
  std::vector<int> rank(units, 0);
  int next_rank = 0;
  while (!ready.empty()) {
    int idx = int(rng_below(rng, std::uint64_t(ready.size())));
    int u = ready[idx];
    ready.erase(ready.begin() + idx);
    rank[u] = next_rank++;
    for (int v : succ[u])
      if (--indeg[v] == 0) ready.push_back(v);
  }

  int t = cfg.crash_tolerance;
  std::int64_t horizon = 4 * (std::int64_t(units) * cfg.servers + n) + 16;
  int crash_count = t > 0 ? int(rng_below(rng, std::uint64_t(t) + 1)) : 0;
  std::vector<int> servers(cfg.servers);
  for (int i = 0; i < cfg.servers; ++i) servers[i] = i;
  for (int i = 0; i < crash_count; ++i) {
    int j = i + int(rng_below(rng, std::uint64_t(cfg.servers - i)));
    std::swap(servers[i], servers[j]);
    s.crashes[servers[i]] =
        std::int64_t(rng_below(rng, std::uint64_t(horizon)));
  }
  std::vector<int> live(servers.begin() + crash_count, servers.end());
  std::sort(live.begin(), live.end());

  int skip_budget = t - crash_count;
  for (const auto& op : workload.ops) {
    for (int rt = 0; rt < 2; ++rt) {
      std::set<int> skipped;
      if (skip_budget > 0) {
        int k = int(rng_below(rng, std::uint64_t(skip_budget) + 1));
        std::vector<int> pool = live;
        for (int i = 0; i < k; ++i) {
          int j = i + int(rng_below(rng, std::uint64_t(pool.size() - i)));
          std::swap(pool[i], pool[j]);
          skipped.insert(pool[i]);
        }
      }
      for (int srv = 0; srv < cfg.servers; ++srv) {
        std::tuple<int, int, int> slot{op.id, rt, srv};
        if (skipped.count(srv)) {
          s.skips.insert(slot);
        } else {
          s.plan[slot] = std::int64_t(rank[unit(op.id, rt)]) * 1024 +
                         std::int64_t(rng_below(rng, 1024));
        }
      }
    }
  }
  return s;
}

std::map<int, int> round_trip_counts(const ExecutionTrace& trace) {
  std::map<int, int> counts;
  for (const auto& op : trace.history.ops) counts[op.id] = op.round_trips;
  return counts;
}

std::string crucial_info(const ExecutionTrace& trace, int server) {
  if (server < 0 || server >= trace.config.servers)
    throw validation_error("unknown server for crucial info");
  std::vector<int> write_ops;
  for (const auto& op : trace.schedule.workload.ops)
    if (op.kind == OpKind::Write) write_ops.push_back(op.id);
  if (write_ops.size() != 2)
    throw validation_error(
        "crucial info needs exactly two writes in the workload, found " +
        std::to_string(write_ops.size()));
  int final_rt = protocol_family(trace.protocol).write_round_trips - 1;
  std::string out;
  for (const auto& ev : trace.events) {
    if (ev.kind != "deliver" || ev.server != server || ev.rt != final_rt)
      continue;
    if (ev.op == write_ops[0]) out += "1";
    if (ev.op == write_ops[1]) out += "2";
  }
  return out;
}

std::vector<std::string> server_state_diff(const ExecutionTrace& a,
                                           const ExecutionTrace& b) {
  std::vector<std::string> diffs;
  size_t n = std::max(a.final_states.size(), b.final_states.size());
  for (size_t s = 0; s < n; ++s) {
    std::string va = s < a.final_states.size() ? a.final_states[s] : "(none)";
    std::string vb = s < b.final_states.size() ? b.final_states[s] : "(none)";
    if (va != vb)
      diffs.push_back("s" + std::to_string(s) + ": " + va + " | " + vb);
  }
  return diffs;
}

std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw validation_error("rng bound must be positive");
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    while (lo < threshold) {
      m = static_cast<unsigned __int128>(rng()) * bound;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace quorumlab
