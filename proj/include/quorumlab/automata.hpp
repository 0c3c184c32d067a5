#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "quorumlab/core.hpp"

namespace quorumlab {

// Request payloads, broadcast by clients to every server.
struct ReadRequest {
  int reader = -1;             // client id to register
  std::set<Value> val_queue;   // values the reader vouches for
};
struct WriteQuery {};
struct WriteRequest {
  Value value;
  int sender = -1;  // client id registered for the value
};
struct NaiveQuery {};
struct NaiveWrite {
  Value value;
};
using RequestPayload =
    std::variant<ReadRequest, WriteQuery, WriteRequest, NaiveQuery, NaiveWrite>;

// Reply payloads, produced when the server processes a request.
struct VectorAck {
  std::map<Value, std::set<int>> vector;
};
struct WriteAck {};
struct LatestAck {
  Value value;
};
struct NaiveWriteAck {};
using ReplyPayload = std::variant<VectorAck, WriteAck, LatestAck, NaiveWriteAck>;

// Server store.  Full-information servers keep every value ever received
// together with the clients registered as having read it.  Naive servers
// additionally track the value that arrived last, which is all they report.
struct ServerState {
  std::map<Value, std::set<int>> vector{{Value::initial(), {}}};
  Value last_arrival = Value::initial();

  bool operator==(const ServerState&) const = default;
};

ServerState initial_server_state();

// Applies one request to the store and returns the reply.  A write store
// registers its sender for the value.  A read query first adopts every
// vouched value (registering the reader for it), then registers the reader
// in every value held, then snapshots, so the reply always shows the
// querying client in every value's reader set.
ReplyPayload server_process(bool naive, ServerState& state,
                            const RequestPayload& request);

// One client operation, driven round by round.  Each round broadcasts one
// request; the round completes when a quorum of replies arrived.
class ClientOp {
 public:
  virtual ~ClientOp() = default;
  virtual int total_rounds() const = 0;
  virtual RequestPayload request(int round) = 0;
  virtual void complete_round(
      int round, const std::vector<std::pair<int, ReplyPayload>>& replies) = 0;
  virtual Value result() const = 0;
};

// Readers carry a value queue across their operations: every value a reader
// has seen or returned travels with its next query, so servers that missed a
// write learn it from the reader.  The queue object outlives each operation.
std::unique_ptr<ClientOp> make_quorum_writer(const SystemConfig& cfg,
                                             int writer, int seq);
std::unique_ptr<ClientOp> make_fast_reader(const SystemConfig& cfg, int reader,
                                           std::set<Value>* val_queue);
std::unique_ptr<ClientOp> make_abd_reader(const SystemConfig& cfg, int reader,
                                          std::set<Value>* val_queue);
std::unique_ptr<ClientOp> make_naive_writer(const SystemConfig& cfg,
                                            int writer, int seq);
std::unique_ptr<ClientOp> make_naive_reader(const SystemConfig& cfg, int reader,
                                            std::set<Value>* val_queue);

struct ProtocolFamily {
  std::string name;
  int write_round_trips = 0;
  int read_round_trips = 0;
  bool naive_servers = false;
  std::unique_ptr<ClientOp> (*make_write)(const SystemConfig&, int writer,
                                          int seq) = nullptr;
  std::unique_ptr<ClientOp> (*make_read)(const SystemConfig&, int reader,
                                         std::set<Value>* val_queue) = nullptr;
  bool (*feasible)(const SystemConfig&) = nullptr;
};

const ProtocolFamily& protocol_family(const std::string& name);
std::vector<std::string> protocol_names();

std::string client_name(const SystemConfig& cfg, int client);
int parse_client_name(const SystemConfig& cfg, const std::string& name);
std::string render_request(const SystemConfig& cfg, const RequestPayload& p);
std::string render_reply(const SystemConfig& cfg, const ReplyPayload& p);
std::string render_server_state(const SystemConfig& cfg,
                                const ServerState& state, bool naive);

}  // namespace quorumlab
