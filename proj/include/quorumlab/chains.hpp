#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quorumlab/core.hpp"
#include "quorumlab/histories.hpp"
#include "quorumlab/simnet.hpp"

namespace quorumlab {

// Two concurrent writes W1, W2 followed by a dependent read R1.  Element i
// reverses the writes' arrival order on the first i servers; the read and
// the trailing write round are held behind both writes at every server.
struct AlphaChain {
  SystemConfig config;
  std::string protocol;
  std::vector<Schedule> elements;  // S + 1 of them
};

AlphaChain build_chain_alpha(const SystemConfig& cfg,
                             const std::string& protocol);

struct CriticalServerReport {
  std::string chain_id;
  bool found = false;
  int flip_index = -1;      // elements flip_index-1 and flip_index disagree
  int critical_server = -1;  // zero-based server whose order change flips R1
  std::vector<Value> returns;
  ExecutionTrace before;
  ExecutionTrace after;
  std::string detail;
};

CriticalServerReport find_critical_server(const AlphaChain& chain);

enum class BetaVariant { Prime, DoublePrime };

// Extends one alpha element with a second read R2.  Element j reverses the
// two reads' second round trips on the first j servers; skip_critical
// withholds all of R2's messages from the critical server.
struct BetaChain {
  SystemConfig config;
  std::string protocol;
  BetaVariant variant = BetaVariant::Prime;
  int base_element = -1;
  int critical_server = -1;
  bool skip_critical = false;
  std::vector<Schedule> elements;  // S + 1 of them
};

BetaChain build_chain_beta(const AlphaChain& alpha, int i1,
                           BetaVariant variant, bool skip_critical);

// Groups trace indices by the observer's delivered-input sequence: the
// ordered (server, round trip, reply) list of everything the observer's
// operations received.
std::vector<std::vector<int>> indistinguishability_classes(
    const std::vector<ExecutionTrace>& traces, int observer_client);

struct SearchReport {
  bool violation = false;
  std::string kind;    // atomicity | class-conflict | exhausted
  std::string source;  // schedule that produced the certificate
  ExecutionTrace trace;
  AtomicityVerdict verdict;
  CriticalServerReport alpha_report;
  std::string detail;
};

// Pipeline over a one-round-trip-write candidate: alpha chain, critical
// server, both beta variants with R2 skipping it, then seeded random
// schedules over the same workload shape, checking every history.
SearchReport contradiction_search(const SystemConfig& cfg,
                                  const std::string& protocol,
                                  std::uint64_t seed, int budget);

}  // namespace quorumlab
