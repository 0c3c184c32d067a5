#include "quorumlab/chains.hpp"

#include <map>
#include <stdexcept>

namespace quorumlab {

namespace {

Workload chain_workload(const SystemConfig& cfg, bool second_read) {
  Workload w;
  w.ops.push_back(WorkloadOp{0, OpKind::Write, cfg.writer_client(0), 0, {}});
  w.ops.push_back(WorkloadOp{1, OpKind::Write, cfg.writer_client(1), 0, {}});
  w.ops.push_back(
      WorkloadOp{2, OpKind::Read, cfg.reader_client(0), 0, {0, 1}});
  if (second_read)
    w.ops.push_back(
        WorkloadOp{3, OpKind::Read, cfg.reader_client(1), 0, {0, 1}});
  return w;
}

}  // namespace

AlphaChain build_chain_alpha(const SystemConfig& cfg,
                             const std::string& protocol) {
  cfg.validate();
  if (cfg.servers < 3)
    throw std::invalid_argument("chain alpha needs at least 3 servers");
  if (cfg.writers < 2)
    throw std::invalid_argument("chain alpha needs two writers");
  const ProtocolFamily& family = protocol_family(protocol);
  int f = family.write_round_trips - 1;

  AlphaChain chain;
  chain.config = cfg;
  chain.protocol = protocol;
  for (int i = 0; i <= cfg.servers; ++i) {
    Schedule s;
    s.workload = chain_workload(cfg, false);
    for (int srv = 0; srv < cfg.servers; ++srv) {
      if (srv < i) {
        s.plan[{1, f, srv}] = 10;
        if (f == 1) s.plan[{0, 0, srv}] = 11;
        s.plan[{0, f, srv}] = 12;
        s.plan[{2, 0, srv}] = 13;
      } else {
        s.plan[{0, f, srv}] = 10;
        s.plan[{1, f, srv}] = 11;
        s.plan[{2, 0, srv}] = 12;
      }
    }
    chain.elements.push_back(std::move(s));
  }
  return chain;
}

CriticalServerReport find_critical_server(const AlphaChain& chain) {
  CriticalServerReport report;
  report.chain_id = "alpha";
  std::vector<ExecutionTrace> traces;
  for (const auto& element : chain.elements) {
    traces.push_back(run(chain.config, chain.protocol, element));
    const auto& ops = traces.back().history.ops;
    const OpRecord* read = nullptr;
    for (const auto& op : ops)
      if (op.id == 2) read = &op;
    if (!read || read->pending() || !read->value)
      throw protocol_violation("chain read did not complete");
    report.returns.push_back(*read->value);
  }
  for (size_t i = 1; i < report.returns.size(); ++i) {
    if (report.returns[i] != report.returns[i - 1]) {
      report.found = true;
      report.flip_index = int(i);
      report.critical_server = int(i) - 1;
      report.before = traces[i - 1];
      report.after = traces[i];
      return report;
    }
  }
  report.detail = "the read returned the same value across the whole chain";
  return report;
}

BetaChain build_chain_beta(const AlphaChain& alpha, int i1,
                           BetaVariant variant, bool skip_critical) {
  int S = alpha.config.servers;
  if (int(alpha.elements.size()) != S + 1)
    throw std::invalid_argument("alpha chain has the wrong element count");
  if (i1 < 1 || i1 > S)
    throw std::invalid_argument("critical index out of range");
  if (alpha.config.readers < 2)
    throw std::invalid_argument("chain beta needs two readers");

  const Schedule& base =
      alpha.elements[variant == BetaVariant::Prime ? i1 - 1 : i1];
  int cs = i1 - 1;

  BetaChain chain;
  chain.config = alpha.config;
  chain.protocol = alpha.protocol;
  chain.variant = variant;
  chain.base_element = variant == BetaVariant::Prime ? i1 - 1 : i1;
  chain.critical_server = cs;
  chain.skip_critical = skip_critical;
  for (int j = 0; j <= S; ++j) {
    Schedule s;
    s.workload = chain_workload(alpha.config, true);
    s.plan = base.plan;
    for (int srv = 0; srv < S; ++srv) {
      s.plan[{3, 0, srv}] = 20;
      if (srv < j) {
        s.plan[{3, 1, srv}] = 21;
        s.plan[{2, 1, srv}] = 22;
      } else {
        s.plan[{2, 1, srv}] = 21;
        s.plan[{3, 1, srv}] = 22;
      }
    }
    if (skip_critical) {
      s.plan.erase({3, 0, cs});
      s.plan.erase({3, 1, cs});
      s.skips.insert({3, 0, cs});
      s.skips.insert({3, 1, cs});
    }
    chain.elements.push_back(std::move(s));
  }
  return chain;
}

std::vector<std::vector<int>> indistinguishability_classes(
    const std::vector<ExecutionTrace>& traces, int observer_client) {
  std::vector<std::vector<int>> classes;
  std::map<std::string, int> index_of;
  for (int i = 0; i < int(traces.size()); ++i) {
    const auto& trace = traces[i];
    std::map<int, int> client_of_op;
    for (const auto& op : trace.schedule.workload.ops)
      client_of_op[op.id] = op.client;
    std::string signature;
    for (const auto& ev : trace.events) {
      if (ev.kind != "deliver") continue;
      auto it = client_of_op.find(ev.op);
      if (it == client_of_op.end() || it->second != observer_client) continue;
      signature += "s" + std::to_string(ev.server) + "/rt" +
                   std::to_string(ev.rt) + ":" + ev.reply + "\n";
    }
    auto [slot, inserted] =
        index_of.try_emplace(signature, int(classes.size()));
    if (inserted) classes.emplace_back();
    classes[slot->second].push_back(i);
  }
  return classes;
}

SearchReport contradiction_search(const SystemConfig& cfg,
                                  const std::string& protocol,
                                  std::uint64_t seed, int budget) {
  cfg.validate();
  const ProtocolFamily& family = protocol_family(protocol);
  if (family.write_round_trips != 1)
    throw std::invalid_argument(
        "contradiction search needs a one-round-trip write protocol, " +
        protocol + " writes in " +
        std::to_string(family.write_round_trips));
  if (cfg.servers < 3)
    throw std::invalid_argument("contradiction search needs at least 3 servers");
  if (cfg.writers < 2 || cfg.readers < 2)
    throw std::invalid_argument(
        "contradiction search needs two writers and two readers");
  if (cfg.crash_tolerance < 1)
    throw std::invalid_argument(
        "contradiction search needs crash tolerance at least 1");

  SearchReport report;
  AlphaChain alpha = build_chain_alpha(cfg, protocol);
  for (int i = 0; i < int(alpha.elements.size()); ++i) {
    ExecutionTrace trace = run(cfg, protocol, alpha.elements[i]);
    AtomicityVerdict verdict = check_atomic(trace.history);
    if (!verdict.atomic) {
      report.violation = true;
      report.kind = "atomicity";
      report.source = "alpha[" + std::to_string(i) + "]";
      report.trace = std::move(trace);
      report.verdict = std::move(verdict);
      return report;
    }
  }

  report.alpha_report = find_critical_server(alpha);
  if (report.alpha_report.found) {
    int i1 = report.alpha_report.flip_index;
    std::vector<ExecutionTrace> beta_traces;
    std::vector<std::string> beta_sources;
    for (BetaVariant variant : {BetaVariant::Prime, BetaVariant::DoublePrime}) {
      std::string label =
          variant == BetaVariant::Prime ? "beta-prime" : "beta-doubleprime";
      BetaChain beta = build_chain_beta(alpha, i1, variant, true);
      for (int j = 0; j < int(beta.elements.size()); ++j) {
        ExecutionTrace trace = run(cfg, protocol, beta.elements[j]);
        AtomicityVerdict verdict = check_atomic(trace.history);
        std::string source = label + "[" + std::to_string(j) + "]";
        if (!verdict.atomic) {
          report.violation = true;
          report.kind = "atomicity";
          report.source = source;
          report.trace = std::move(trace);
          report.verdict = std::move(verdict);
          return report;
        }
        beta_traces.push_back(std::move(trace));
        beta_sources.push_back(std::move(source));
      }
    }
    int r2 = cfg.reader_client(1);
    auto classes = indistinguishability_classes(beta_traces, r2);
    for (const auto& cls : classes) {
      for (size_t a = 0; a + 1 < cls.size(); ++a) {
        auto return_of = [&](int idx) -> std::optional<Value> {
          for (const auto& op : beta_traces[cls[idx]].history.ops)
            if (op.id == 3 && !op.pending()) return op.value;
          return std::nullopt;
        };
        auto va = return_of(int(a)), vb = return_of(int(a + 1));
        if (va && vb && *va != *vb) {
          report.violation = true;
          report.kind = "class-conflict";
          report.source = beta_sources[cls[a]];
          report.trace = beta_traces[cls[a]];
          report.detail = "indistinguishable traces " + beta_sources[cls[a]] +
                          " and " + beta_sources[cls[a + 1]] +
                          " return " + to_string(*va) + " and " +
                          to_string(*vb) + " to the same reader";
          return report;
        }
      }
    }
  }

  Workload shape = chain_workload(cfg, true);
  for (int k = 0; k < budget; ++k) {
    Schedule schedule = random_schedule(cfg, shape, seed + std::uint64_t(k));
    ExecutionTrace trace = run(cfg, protocol, schedule);
    AtomicityVerdict verdict = check_atomic(trace.history);
    if (!verdict.atomic) {
      report.violation = true;
      report.kind = "atomicity";
      report.source = "random[" + std::to_string(k) +
                      ", seed=" + std::to_string(seed + std::uint64_t(k)) +
                      "]";
      report.trace = std::move(trace);
      report.verdict = std::move(verdict);
      return report;
    }
  }

  report.kind = "exhausted";
  report.detail = "no violation across " +
                  std::to_string(alpha.elements.size()) +
                  " alpha elements, " +
                  std::to_string(2 * (cfg.servers + 1)) +
                  " beta elements, and " + std::to_string(budget) +
                  " random schedules";
  return report;
}

}  // namespace quorumlab
