#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace quorumlab {

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct protocol_violation : std::logic_error {
  using std::logic_error::logic_error;
};

struct oracle_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writer identifier with a distinguished bottom element that sorts below
// every real writer.  Bottom is encoded as a negative raw id.
struct WriterId {
  int raw = -1;

  static constexpr WriterId bottom() { return WriterId{-1}; }
  static WriterId of(int id);

  constexpr bool is_bottom() const { return raw < 0; }
  auto operator<=>(const WriterId&) const = default;
};

// Register value: a timestamp paired with the id of the writer that produced
// it.  Ordering is lexicographic, timestamps first.
struct Value {
  std::int64_t ts = 0;
  WriterId wid{};

  auto operator<=>(const Value&) const = default;
  static constexpr Value initial() { return Value{0, WriterId{-1}}; }
};

std::string to_string(const WriterId& w);
std::string to_string(const Value& v);

struct SystemConfig {
  int servers = 0;
  int writers = 0;
  int readers = 0;
  int crash_tolerance = 0;

  int quorum() const { return servers - crash_tolerance; }
  int clients() const { return writers + readers; }
  int writer_client(int w) const { return w; }
  int reader_client(int r) const { return writers + r; }
  bool is_writer_client(int c) const { return c >= 0 && c < writers; }
  bool is_reader_client(int c) const {
    return c >= writers && c < writers + readers;
  }
  bool operator==(const SystemConfig&) const = default;

  void validate() const;
};

bool feasible_w2r1(const SystemConfig& cfg);
bool feasible_w2r2(const SystemConfig& cfg);

// One server's reply to a read query: the full set of values it stores,
// each with the set of reader client ids registered as having seen it.
struct ReadAck {
  int server = -1;
  std::map<Value, std::set<int>> vector;

  bool contains(const Value& v) const { return vector.count(v) > 0; }
};

struct AdmissibilityWitness {
  Value value;
  int degree = 0;
  std::vector<ReadAck> mu;
  std::set<int> pi;
};

// A value is admissible with degree a when some subset mu of the acks all
// contain it, |mu| >= max(S - a*t, 1), and at least a distinct readers are
// registered for it at every ack in mu.  Returns the lexicographically first
// witness under the ascending-bitmask enumeration, or nullopt.
std::optional<AdmissibilityWitness> admissible(const Value& v,
                                               const std::vector<ReadAck>& acks,
                                               int degree,
                                               const SystemConfig& cfg);

bool witness_valid(const AdmissibilityWitness& w,
                   const std::vector<ReadAck>& acks, const SystemConfig& cfg);

struct MaxAdmissible {
  Value value;
  AdmissibilityWitness witness;
};

// Repeatedly tries the largest value present in the acks at degrees
// 1..readers+1; a value that fails at every degree is erased everywhere and
// the scan restarts.  Throws protocol_violation if no value qualifies.
MaxAdmissible max_admissible(std::vector<ReadAck> acks,
                             const SystemConfig& cfg);

}  // namespace quorumlab
