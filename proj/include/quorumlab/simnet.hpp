#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "quorumlab/automata.hpp"
#include "quorumlab/core.hpp"
#include "quorumlab/histories.hpp"

namespace quorumlab {

struct WorkloadOp {
  int id = -1;
  OpKind kind = OpKind::Read;
  int client = -1;
  std::int64_t at_step = 0;
  std::vector<int> deps;
};

struct Workload {
  std::vector<WorkloadOp> ops;
};

// Adversarial schedule.  The plan assigns per-server delivery order keys to
// round trips: a planned message is deliverable only once every smaller-keyed
// planned message at that server has been delivered, skipped, voided, or lost
// to a crash.  Unplanned messages carry key 0.  A skip withholds one round
// trip from one server past the end of the run.
struct Schedule {
  Workload workload;
  std::map<std::tuple<int, int, int>, std::int64_t> plan;  // (op,rt,server)
  std::set<std::tuple<int, int, int>> skips;
  std::map<int, std::int64_t> crashes;  // server -> step
};

void validate_schedule(const SystemConfig& cfg, const Schedule& s);

struct TraceEvent {
  std::int64_t time = 0;
  int seq = 0;
  std::string kind;  // invoke | deliver | crash
  int client = -1;
  int server = -1;
  int op = -1;
  int rt = -1;
  std::string payload;
  std::string reply;
  std::string state;
};

struct ExecutionTrace {
  SystemConfig config;
  std::string protocol;
  Schedule schedule;
  std::vector<TraceEvent> events;
  std::vector<std::string> final_states;
  History history;
};

// Deterministic discrete-event run.  Per step: due crashes fire, due
// operations invoke in workload order, then exactly one deliverable message
// (smallest key, then send order) is processed; the reply reaches the client
// within the same event.  A round trip completes at its (S-t)-th reply.
ExecutionTrace run(const SystemConfig& cfg, const std::string& protocol,
                   const Schedule& schedule);

Workload random_workload(const SystemConfig& cfg, int ops,
                         std::uint64_t seed);

// Random plan whose keys follow one global order over round trips, so holds
// never form cross-server cycles; random skips and up to t crashes never
// deprive a round trip of its S-t quorum.
Schedule random_schedule(const SystemConfig& cfg, const Workload& workload,
                         std::uint64_t seed);

std::map<int, int> round_trip_counts(const ExecutionTrace& trace);

// Arrival order of the two distinguished writes' final-round messages at one
// server, as a string over "1" (first write in the workload) and "2".
std::string crucial_info(const ExecutionTrace& trace, int server);

std::vector<std::string> server_state_diff(const ExecutionTrace& a,
                                           const ExecutionTrace& b);

// Uniform draw from [0, bound) by multiply-and-shift with rejection.
std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t bound);

}  // namespace quorumlab
