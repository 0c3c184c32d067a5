#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quorumlab/core.hpp"

namespace quorumlab {

enum class OpKind { Write, Read };

// Invocation/response record for one client operation.  response < 0 marks a
// pending operation.  A pending write may still carry its value when the
// value had already left the client (some server received it).
struct OpRecord {
  int id = -1;
  OpKind kind = OpKind::Read;
  int client = -1;
  std::int64_t invoke = 0;
  std::int64_t response = -1;  // negative means pending
  std::optional<Value> value;  // written or returned value
  int round_trips = 0;         // completed round trips

  bool pending() const { return response < 0; }
};

struct History {
  SystemConfig config;
  std::vector<OpRecord> ops;
};

// Nonatomic verdicts carry a certificate: either a short real-time cycle over
// written values (each must-precede edge violated by serializing the other
// way) or a structural defect described in `detail`.
struct AtomicityVerdict {
  bool atomic = false;
  // for atomic == true: op ids in a legal serialization order
  std::vector<int> serialization;
  // for atomic == false: the value clusters forming a precedence cycle
  std::vector<Value> cycle;
  std::string detail;
};

void check_wellformed(const History& h);

// Decides atomicity of a unique-value multi-writer register history.
// Pending writes whose value is known are tried both included and excluded;
// pending reads and value-less pending writes are excluded.
AtomicityVerdict check_atomic(const History& h);

// Reference decision procedure: enumerates every permutation of the completed
// ops (plus included pending writes).  Throws oracle_limit_error above
// max_ops.
bool brute_force_atomic(const History& h, int max_ops = 9);

// Checks a claimed serialization: legality of the sequential register runs
// and respect for real-time precedence.
bool serialization_valid(const History& h,
                         const std::vector<int>& serialization);

struct MwaReport {
  bool clean = true;
  std::vector<std::string> violations;
};

// Structural sanity sweep: sequential writes value-ordered, timestamps
// nonnegative, reads no smaller than preceding writes, no read preceding the
// write of its value, sequential reads per client monotone.
MwaReport check_mwa(const History& h);

}  // namespace quorumlab
