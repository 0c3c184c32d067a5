#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "quorumlab/chains.hpp"
#include "quorumlab/experiment.hpp"
#include "quorumlab/histories.hpp"
#include "quorumlab/simnet.hpp"
#include "quorumlab/trace_io.hpp"

using namespace quorumlab;

namespace {

constexpr int kSchedulesPerConfig = 10000;
constexpr std::uint64_t kWorkloadSalt = 0x9E3779B97F4A7C15ULL;

bool g_all_passed = true;

void report(int criterion, bool passed, const std::string& text) {
  std::cout << (passed ? "PASS" : "FAIL") << " criterion " << criterion << " "
            << text << "\n";
  if (!passed) g_all_passed = false;
}

Value val(std::int64_t ts, int w) { return Value{ts, WriterId::of(w)}; }

struct SafetySweep {
  int atomicity_violations = 0;
  int mwa_violations = 0;
  int completed_reads = 0;
  int completed_writes = 0;
  int fast_reads = 0;       // completed reads at the expected round trips
  int two_round_writes = 0;
  std::string first_failure;
};

SafetySweep sweep(const SystemConfig& cfg, const std::string& protocol,
                  int schedules, int expected_read_rt) {
  SafetySweep tally;
  for (int i = 0; i < schedules; ++i) {
    std::uint64_t seed = std::uint64_t(i);
    Workload workload = random_workload(cfg, 10, seed ^ kWorkloadSalt);
    Schedule schedule = random_schedule(cfg, workload, seed);
    ExecutionTrace trace = run(cfg, protocol, schedule);
    AtomicityVerdict verdict = check_atomic(trace.history);
    if (!verdict.atomic) {
      ++tally.atomicity_violations;
      if (tally.first_failure.empty())
        tally.first_failure = "seed " + std::to_string(i) + ": " + verdict.detail;
    }
    MwaReport mwa = check_mwa(trace.history);
    if (!mwa.clean) {
      ++tally.mwa_violations;
      if (tally.first_failure.empty())
        tally.first_failure =
            "seed " + std::to_string(i) + ": " + mwa.violations.front();
    }
    for (const auto& op : trace.history.ops) {
      if (op.pending()) continue;
      if (op.kind == OpKind::Read) {
        ++tally.completed_reads;
        if (op.round_trips == expected_read_rt) ++tally.fast_reads;
      } else {
        ++tally.completed_writes;
        if (op.round_trips == 2) ++tally.two_round_writes;
      }
    }
  }
  return tally;
}

OpRecord record(int id, OpKind kind, int client, std::int64_t invoke,
                std::int64_t response, std::optional<Value> value, int rt) {
  OpRecord op;
  op.id = id;
  op.kind = kind;
  op.client = client;
  op.invoke = invoke;
  op.response = response;
  op.value = value;
  op.round_trips = rt;
  return op;
}

History corner(const std::vector<OpRecord>& ops) {
  History h;
  h.config = SystemConfig{5, 2, 2, 1};
  h.ops = ops;
  return h;
}

std::vector<History> corner_corpus() {
  std::vector<History> corpus;
  // empty history
  corpus.push_back(corner({}));
  // write then read
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, 10, val(1, 0), 2),
                           record(1, OpKind::Read, 2, 12, 20, val(1, 0), 1)}));
  // initial-value read before any write responds
  corpus.push_back(corner({record(0, OpKind::Write, 0, 5, 30, val(1, 0), 2),
                           record(1, OpKind::Read, 2, 0, 4, Value::initial(), 1)}));
  // stale initial-value read after the write completed
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, 10, val(1, 0), 2),
                           record(1, OpKind::Read, 2, 12, 14, val(1, 0), 1),
                           record(2, OpKind::Read, 3, 16, 20, Value::initial(), 1)}));
  // concurrent writes, read sees either
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, 10, val(1, 0), 2),
                           record(1, OpKind::Write, 1, 0, 10, val(1, 1), 2),
                           record(2, OpKind::Read, 2, 12, 14, val(1, 0), 1)}));
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, 10, val(1, 0), 2),
                           record(1, OpKind::Write, 1, 0, 10, val(1, 1), 2),
                           record(2, OpKind::Read, 2, 12, 14, val(1, 1), 1)}));
  // two readers crossing while the second write still runs
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, 10, val(1, 0), 2),
                           record(1, OpKind::Write, 1, 0, 14, val(2, 1), 2),
                           record(2, OpKind::Read, 2, 11, 12, val(2, 1), 1),
                           record(3, OpKind::Read, 3, 15, 16, val(1, 0), 1)}));
  // the same crossing after both writes completed
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, 10, val(1, 0), 2),
                           record(1, OpKind::Write, 1, 0, 10, val(2, 1), 2),
                           record(2, OpKind::Read, 2, 12, 13, val(2, 1), 1),
                           record(3, OpKind::Read, 3, 15, 16, val(1, 0), 1)}));
  // pending write whose value was read
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, -1, val(1, 0), 1),
                           record(1, OpKind::Read, 2, 5, 9, val(1, 0), 1)}));
  // pending write read and then forgotten
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, -1, val(1, 0), 1),
                           record(1, OpKind::Read, 2, 5, 9, val(1, 0), 1),
                           record(2, OpKind::Read, 3, 11, 14, Value::initial(), 1)}));
  // unread pending write
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, 10, val(1, 0), 2),
                           record(1, OpKind::Write, 1, 4, -1, val(2, 1), 1),
                           record(2, OpKind::Read, 2, 12, 14, val(1, 0), 1)}));
  // a read of a value nobody wrote
  corpus.push_back(corner({record(0, OpKind::Write, 0, 0, 10, val(1, 0), 2),
                           record(1, OpKind::Read, 2, 12, 14, val(7, 1), 1)}));
  // a read completing before its write was invoked
  corpus.push_back(corner({record(0, OpKind::Read, 2, 0, 4, val(1, 0), 1),
                           record(1, OpKind::Write, 0, 6, 10, val(1, 0), 2)}));
  return corpus;
}

History random_history(std::mt19937_64& rng) {
  SystemConfig cfg{5, 2, 2, 1};
  History h;
  h.config = cfg;
  int n = 1 + int(rng_below(rng, 8));
  std::vector<std::int64_t> clock(cfg.clients(), 0);
  std::vector<Value> pool = {Value::initial()};
  int write_seq = 0;
  for (int id = 0; id < n; ++id) {
    OpRecord op;
    op.id = id;
    bool is_write = rng_below(rng, 2) == 0;
    op.kind = is_write ? OpKind::Write : OpKind::Read;
    int idx = int(rng_below(rng, 2));
    op.client = is_write ? cfg.writer_client(idx) : cfg.reader_client(idx);
    op.invoke = std::int64_t(clock[op.client] + 1 + rng_below(rng, 6));
    op.response = op.invoke + 1 + std::int64_t(rng_below(rng, 8));
    clock[op.client] = op.response;
    op.round_trips = 1 + int(rng_below(rng, 2));
    if (is_write) {
      op.value = val(++write_seq, op.client);
      pool.push_back(*op.value);
    } else {
      std::uint64_t roll = rng_below(rng, 100);
      if (roll < 15)
        op.value = Value::initial();
      else if (roll < 18)
        op.value = val(90, 0);
      else
        op.value = pool[rng_below(rng, pool.size())];
    }
    h.ops.push_back(std::move(op));
  }
  if (rng_below(rng, 4) == 0 && !h.ops.empty()) {
    OpRecord& tail = h.ops.back();
    tail.response = -1;
    if (tail.kind == OpKind::Read) tail.value.reset();
  }
  return h;
}

void criterion_1_and_2() {
  struct Case {
    SystemConfig cfg;
  };
  std::vector<SystemConfig> cfgs = {{5, 2, 2, 1}, {7, 2, 2, 1}, {9, 2, 2, 2}};
  int atomicity = 0, mwa = 0, reads = 0, fast = 0, writes = 0, two_rt = 0;
  std::string failure;
  try {
    for (const auto& cfg : cfgs) {
      SafetySweep tally = sweep(cfg, "w2r1", kSchedulesPerConfig, 1);
      atomicity += tally.atomicity_violations;
      mwa += tally.mwa_violations;
      reads += tally.completed_reads;
      fast += tally.fast_reads;
      writes += tally.completed_writes;
      two_rt += tally.two_round_writes;
      if (failure.empty()) failure = tally.first_failure;
    }
  } catch (const std::exception& e) {
    report(1, false, std::string("w2r1 safety sweep aborted: ") + e.what());
    report(2, false, "fast-read optimality unverifiable, sweep aborted");
    return;
  }
  std::ostringstream line1;
  line1 << "w2r1 safety: " << 3 * kSchedulesPerConfig
        << " random schedules over (5,1,2) (7,1,2) (9,2,2), "
        << atomicity << " atomicity violations, " << mwa << " mwa violations";
  if (!failure.empty()) line1 << "; first: " << failure;
  report(1, atomicity == 0 && mwa == 0, line1.str());

  std::ostringstream line2;
  line2 << "fast-read optimality: " << fast << "/" << reads
        << " completed reads took 1 round trip, " << two_rt << "/" << writes
        << " completed writes took 2";
  report(2, reads > 0 && fast == reads && writes > 0 && two_rt == writes,
         line2.str());
}

void criterion_3() {
  try {
    SafetySweep tally =
        sweep(SystemConfig{5, 2, 2, 1}, "w2r2-abd", kSchedulesPerConfig, 2);
    std::ostringstream line;
    line << "w2r2 baseline: " << kSchedulesPerConfig
         << " random schedules at (5,1,2), " << tally.atomicity_violations
         << " atomicity violations, " << tally.mwa_violations
         << " mwa violations, " << tally.fast_reads << "/"
         << tally.completed_reads << " reads at 2 round trips, "
         << tally.two_round_writes << "/" << tally.completed_writes
         << " writes at 2";
    bool ok = tally.atomicity_violations == 0 && tally.mwa_violations == 0 &&
              tally.completed_reads > 0 &&
              tally.fast_reads == tally.completed_reads &&
              tally.completed_writes > 0 &&
              tally.two_round_writes == tally.completed_writes;
    report(3, ok, line.str());
  } catch (const std::exception& e) {
    report(3, false, std::string("w2r2 baseline sweep aborted: ") + e.what());
  }
}

void criterion_4() {
  int disagreements = 0;
  int checked = 0;
  int atomic_count = 0;
  std::string failure;
  try {
    auto compare = [&](const History& h, const std::string& label) {
      AtomicityVerdict verdict = check_atomic(h);
      bool oracle = brute_force_atomic(h);
      ++checked;
      if (verdict.atomic) ++atomic_count;
      if (verdict.atomic != oracle) {
        ++disagreements;
        if (failure.empty())
          failure = label + ": checker says " +
                    (verdict.atomic ? "atomic" : "nonatomic") +
                    ", oracle disagrees";
      }
      if (verdict.atomic && !serialization_valid(h, verdict.serialization)) {
        ++disagreements;
        if (failure.empty()) failure = label + ": bad serialization";
      }
    };
    std::mt19937_64 rng(0xC4C4C4ULL);
    for (int i = 0; i < 1000; ++i)
      compare(random_history(rng), "random " + std::to_string(i));
    auto corpus = corner_corpus();
    for (size_t i = 0; i < corpus.size(); ++i)
      compare(corpus[i], "corner " + std::to_string(i));
  } catch (const std::exception& e) {
    report(4, false, std::string("checker-oracle comparison aborted: ") + e.what());
    return;
  }
  std::ostringstream line;
  line << "checker-oracle equivalence: " << checked << " histories ("
       << atomic_count << " atomic, " << checked - atomic_count
       << " nonatomic), " << disagreements << " disagreements";
  if (!failure.empty()) line << "; first: " << failure;
  report(4, disagreements == 0 && checked == 1000 + int(corner_corpus().size()),
         line.str());
}

void criterion_5() {
  try {
    auto start = std::chrono::steady_clock::now();
    SearchReport result =
        contradiction_search(SystemConfig{3, 2, 2, 1}, "w1r2-naive", 1, 1000);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    bool reverified =
        result.violation && !check_atomic(result.trace.history).atomic;
    std::ostringstream line;
    line << "impossibility boundary: naive protocol at (3,1) "
         << (result.violation ? "convicted at " + result.source
                              : "not convicted")
         << ", certificate reverified " << (reverified ? "yes" : "no") << ", "
         << elapsed << " ms";
    report(5, result.violation && reverified && elapsed < 60000, line.str());
  } catch (const std::exception& e) {
    report(5, false, std::string("contradiction search aborted: ") + e.what());
  }
}

void criterion_6() {
  try {
    bool ok = true;
    std::string failure;
    auto fail = [&](const std::string& why) {
      ok = false;
      if (failure.empty()) failure = why;
    };

    for (int S : {3, 5, 7}) {
      SystemConfig cfg{S, 2, 2, 1};
      AlphaChain chain = build_chain_alpha(cfg, "w2r2-abd");
      if (int(chain.elements.size()) != S + 1)
        fail("S=" + std::to_string(S) + " produced " +
             std::to_string(chain.elements.size()) + " elements");
      std::vector<std::string> prev;
      for (size_t i = 0; i < chain.elements.size(); ++i) {
        ExecutionTrace trace = run(cfg, "w2r2-abd", chain.elements[i]);
        std::vector<std::string> info;
        for (int srv = 0; srv < S; ++srv)
          info.push_back(crucial_info(trace, srv));
        if (i == 0 && info != std::vector<std::string>(S, "12"))
          fail("S=" + std::to_string(S) + " head is not all 12");
        if (i + 1 == chain.elements.size() &&
            info != std::vector<std::string>(S, "21"))
          fail("S=" + std::to_string(S) + " tail is not all 21");
        if (i > 0) {
          int flips = 0;
          for (int srv = 0; srv < S; ++srv)
            if (info[srv] != prev[srv]) ++flips;
          if (flips != 1)
            fail("S=" + std::to_string(S) + " step " + std::to_string(i) +
                 " flips " + std::to_string(flips) + " servers");
        }
        prev = std::move(info);
      }
    }

    struct ProtoCase {
      SystemConfig cfg;
      const char* protocol;
    };
    std::vector<ProtoCase> runs = {
        {{3, 2, 2, 1}, "w2r2-abd"}, {{5, 2, 2, 1}, "w2r2-abd"},
        {{7, 2, 2, 1}, "w2r2-abd"}, {{5, 2, 2, 1}, "w2r1"},
        {{7, 2, 2, 1}, "w2r1"},     {{9, 2, 2, 2}, "w2r1"},
    };
    for (const auto& c : runs) {
      std::string label = std::string(c.protocol) + " S=" +
                          std::to_string(c.cfg.servers);
      AlphaChain chain = build_chain_alpha(c.cfg, c.protocol);
      ExecutionTrace head = run(c.cfg, c.protocol, chain.elements.front());
      ExecutionTrace tail = run(c.cfg, c.protocol, chain.elements.back());
      auto value_of = [](const ExecutionTrace& trace, int id) {
        for (const auto& op : trace.history.ops)
          if (op.id == id && !op.pending() && op.value) return *op.value;
        throw protocol_violation("chain op missing");
      };
      if (value_of(head, 2) != value_of(head, 1))
        fail(label + ": the head read did not return the second write");
      if (value_of(tail, 2) != value_of(tail, 0))
        fail(label + ": the tail read did not return the first write");
      CriticalServerReport found = find_critical_server(chain);
      if (!found.found) fail(label + ": no critical server found");
      if (found.found &&
          (found.flip_index < 1 || found.flip_index > c.cfg.servers))
        fail(label + ": flip index out of range");
    }

    std::ostringstream line;
    line << "chain structure: alpha chains at S in {3,5,7} have S+1 elements, "
            "12-heads, 21-tails, one flip per step; critical server found on "
            "6 correct protocol runs";
    if (!failure.empty()) line << "; first failure: " << failure;
    report(6, ok, line.str());
  } catch (const std::exception& e) {
    report(6, false, std::string("chain reproduction aborted: ") + e.what());
  }
}

void criterion_7() {
  try {
    std::vector<int> servers, tolerances, readers;
    for (int s = 3; s <= 12; ++s) servers.push_back(s);
    for (int t = 1; t <= 3; ++t) tolerances.push_back(t);
    for (int r = 1; r <= 6; ++r) readers.push_back(r);
    auto rows = matrix_rows(servers, tolerances, readers);
    int mismatches = 0;
    std::string failure;
    size_t expected_rows = servers.size() * tolerances.size() * readers.size();
    for (const auto& row : rows) {
      std::string w2r1 = (row.readers + 2) * row.crash_tolerance < row.servers
                             ? "yes"
                             : "no";
      std::string w2r2 = 2 * row.crash_tolerance < row.servers ? "yes" : "no";
      std::string w1 = row.readers >= 2 ? "no" : "n/a";
      if (row.w2r1 != w2r1 || row.w2r2 != w2r2 || row.w1r2 != w1 ||
          row.w1r1 != w1) {
        ++mismatches;
        if (failure.empty())
          failure = "S=" + std::to_string(row.servers) +
                    " t=" + std::to_string(row.crash_tolerance) +
                    " R=" + std::to_string(row.readers);
      }
    }
    std::ostringstream line;
    line << "feasibility matrix: " << rows.size() << " cells over S=[3..12] "
         << "t=[1..3] R=[1..6], " << mismatches
         << " mismatches against the closed forms";
    if (!failure.empty()) line << "; first: " << failure;
    report(7, mismatches == 0 && rows.size() == expected_rows, line.str());
  } catch (const std::exception& e) {
    report(7, false, std::string("matrix check aborted: ") + e.what());
  }
}

void criterion_8() {
  try {
    int mismatches = 0;
    int configs = 0;
    std::string failure;
    const char* protocols[] = {"w2r1", "w2r2-abd", "w1r2-naive"};
    for (int i = 0; i < 100; ++i) {
      ExperimentConfig config;
      config.protocol = protocols[i % 3];
      int S = 3 + (i % 5) * 2;  // 3,5,7,9,11
      int t = i % 3 == 0 ? 0 : (i % 7 == 0 ? 2 : 1);
      config.system = SystemConfig{S, 2, 2, t};
      if (i % 10 == 9) {
        config.mode = "chain";
        config.chain_element = i % (S + 1);
        if (config.protocol == std::string("w2r1")) config.protocol = "w2r2-abd";
      } else {
        config.mode = "random";
        config.seed = 1000 + std::uint64_t(i);
        config.has_seed = true;
        config.ops = 5 + i % 10;
      }
      ++configs;
      RunArtifacts first = run_experiment(config);
      RunArtifacts second = run_experiment(config);
      if (first.trace_text != second.trace_text ||
          first.history_text != second.history_text) {
        ++mismatches;
        if (failure.empty())
          failure = "config " + std::to_string(i) + " (" + config.protocol +
                    ", S=" + std::to_string(S) + ")";
      }
    }
    std::ostringstream line;
    line << "determinism: " << configs
         << " configs rerun, " << mismatches << " trace mismatches";
    if (!failure.empty()) line << "; first: " << failure;
    report(8, mismatches == 0 && configs == 100, line.str());
  } catch (const std::exception& e) {
    report(8, false, std::string("determinism check aborted: ") + e.what());
  }
}

}  // namespace

int main() {
  auto start = std::chrono::steady_clock::now();
  criterion_1_and_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  std::cout << (g_all_passed ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED")
            << " (" << elapsed << " s)\n";
  return g_all_passed ? 0 : 1;
}
