#include "quorumlab/automata.hpp"

#include <algorithm>

namespace quorumlab {

ServerState initial_server_state() { return ServerState{}; }

ReplyPayload server_process(bool naive, ServerState& state,
                            const RequestPayload& request) {
  if (std::holds_alternative<ReadRequest>(request)) {
    if (naive) throw protocol_violation("read query sent to a naive server");
    const auto& read = std::get<ReadRequest>(request);
    for (const Value& v : read.val_queue) state.vector[v].insert(read.reader);
    for (auto& [v, regs] : state.vector) regs.insert(read.reader);
    return VectorAck{state.vector};
  }
  if (std::holds_alternative<WriteQuery>(request)) {
    if (naive) throw protocol_violation("write query sent to a naive server");
    return VectorAck{state.vector};
  }
  if (std::holds_alternative<WriteRequest>(request)) {
    if (naive) throw protocol_violation("write store sent to a naive server");
    const auto& write = std::get<WriteRequest>(request);
    state.vector[write.value].insert(write.sender);
    return WriteAck{};
  }
  if (std::holds_alternative<NaiveQuery>(request)) {
    if (!naive)
      throw protocol_violation("latest query sent to a full-info server");
    return LatestAck{state.last_arrival};
  }
  const Value& v = std::get<NaiveWrite>(request).value;
  if (!naive)
    throw protocol_violation("latest store sent to a full-info server");
  state.last_arrival = v;
  state.vector.try_emplace(v);
  return NaiveWriteAck{};
}

namespace {

const VectorAck& as_vector(const ReplyPayload& r) {
  const auto* p = std::get_if<VectorAck>(&r);
  if (!p) throw protocol_violation("expected a vector reply");
  return *p;
}

const LatestAck& as_latest(const ReplyPayload& r) {
  const auto* p = std::get_if<LatestAck>(&r);
  if (!p) throw protocol_violation("expected a latest reply");
  return *p;
}

class QuorumWriter : public ClientOp {
 public:
  QuorumWriter(const SystemConfig& cfg, int writer) : cfg_(cfg), writer_(writer) {}

  int total_rounds() const override { return 2; }

  RequestPayload request(int round) override {
    if (round == 0) return WriteQuery{};
    return WriteRequest{value_, cfg_.writer_client(writer_)};
  }

  void complete_round(
      int round,
      const std::vector<std::pair<int, ReplyPayload>>& replies) override {
    if (round != 0) return;
    std::int64_t max_ts = 0;
    for (const auto& [server, reply] : replies)
      for (const auto& [v, regs] : as_vector(reply).vector)
        max_ts = std::max(max_ts, v.ts);
    value_ = Value{max_ts + 1, WriterId::of(writer_)};
  }

  Value result() const override { return value_; }

 private:
  SystemConfig cfg_;
  int writer_;
  Value value_;
};

class FastReader : public ClientOp {
 public:
  FastReader(const SystemConfig& cfg, int reader, std::set<Value>* val_queue)
      : cfg_(cfg), client_(cfg.reader_client(reader)), queue_(val_queue) {}

  int total_rounds() const override { return 1; }

  RequestPayload request(int) override { return ReadRequest{client_, *queue_}; }

  void complete_round(
      int, const std::vector<std::pair<int, ReplyPayload>>& replies) override {
    std::vector<ReadAck> acks;
    std::int64_t max_ts = 0;
    for (const auto& [server, reply] : replies) {
      acks.push_back(ReadAck{server, as_vector(reply).vector});
      for (const auto& [v, regs] : acks.back().vector) {
        max_ts = std::max(max_ts, v.ts);
        queue_->insert(v);
      }
    }
    result_ = max_admissible(acks, cfg_).value;
    queue_->insert(result_);
    if (feasible_w2r1(cfg_) && result_.ts + 1 < max_ts)
      throw protocol_violation(
          "read fell more than one timestamp behind its own quorum");
  }

  Value result() const override { return result_; }

 private:
  SystemConfig cfg_;
  int client_;
  std::set<Value>* queue_;
  Value result_;
};

class AbdReader : public ClientOp {
 public:
  AbdReader(const SystemConfig& cfg, int reader)
      : client_(cfg.reader_client(reader)) {}

  int total_rounds() const override { return 2; }

  RequestPayload request(int round) override {
    if (round == 0) return ReadRequest{client_, {}};
    return WriteRequest{result_, client_};
  }

  void complete_round(
      int round,
      const std::vector<std::pair<int, ReplyPayload>>& replies) override {
    if (round != 0) return;
    Value best = Value::initial();
    for (const auto& [server, reply] : replies)
      for (const auto& [v, regs] : as_vector(reply).vector)
        best = std::max(best, v);
    result_ = best;
  }

  Value result() const override { return result_; }

 private:
  int client_;
  Value result_;
};

class NaiveWriter : public ClientOp {
 public:
  NaiveWriter(int writer, int seq) : value_{seq, WriterId::of(writer)} {}

  int total_rounds() const override { return 1; }

  RequestPayload request(int) override { return NaiveWrite{value_}; }

  void complete_round(
      int, const std::vector<std::pair<int, ReplyPayload>>&) override {}

  Value result() const override { return value_; }

 private:
  Value value_;
};

class NaiveReader : public ClientOp {
 public:
  int total_rounds() const override { return 2; }

  RequestPayload request(int round) override {
    if (round == 0) return NaiveQuery{};
    return NaiveWrite{result_};
  }

  void complete_round(
      int round,
      const std::vector<std::pair<int, ReplyPayload>>& replies) override {
    if (round != 0) return;
    Value best = Value::initial();
    for (const auto& [server, reply] : replies)
      best = std::max(best, as_latest(reply).value);
    result_ = best;
  }

  Value result() const override { return result_; }

 private:
  Value result_;
};

bool feasible_w1r2(const SystemConfig& cfg) { return cfg.crash_tolerance == 0; }

}  // namespace

std::unique_ptr<ClientOp> make_quorum_writer(const SystemConfig& cfg,
                                             int writer, int) {
  return std::make_unique<QuorumWriter>(cfg, writer);
}

std::unique_ptr<ClientOp> make_fast_reader(const SystemConfig& cfg, int reader,
                                           std::set<Value>* val_queue) {
  return std::make_unique<FastReader>(cfg, reader, val_queue);
}

std::unique_ptr<ClientOp> make_abd_reader(const SystemConfig& cfg, int reader,
                                          std::set<Value>*) {
  return std::make_unique<AbdReader>(cfg, reader);
}

std::unique_ptr<ClientOp> make_naive_writer(const SystemConfig&, int writer,
                                            int seq) {
  return std::make_unique<NaiveWriter>(writer, seq);
}

std::unique_ptr<ClientOp> make_naive_reader(const SystemConfig&, int,
                                            std::set<Value>*) {
  return std::make_unique<NaiveReader>();
}

const ProtocolFamily& protocol_family(const std::string& name) {
  static const ProtocolFamily families[] = {
      {"w2r1", 2, 1, false, make_quorum_writer, make_fast_reader,
       feasible_w2r1},
      {"w2r2-abd", 2, 2, false, make_quorum_writer, make_abd_reader,
       feasible_w2r2},
      {"w1r2-naive", 1, 2, true, make_naive_writer, make_naive_reader,
       feasible_w1r2},
  };
  for (const auto& f : families)
    if (f.name == name) return f;
  throw validation_error("unknown protocol " + name);
}

std::vector<std::string> protocol_names() {
  return {"w2r1", "w2r2-abd", "w1r2-naive"};
}

std::string client_name(const SystemConfig& cfg, int client) {
  if (cfg.is_writer_client(client)) return "w" + std::to_string(client);
  if (cfg.is_reader_client(client))
    return "r" + std::to_string(client - cfg.writers);
  throw validation_error("unknown client id " + std::to_string(client));
}

int parse_client_name(const SystemConfig& cfg, const std::string& name) {
  if (name.size() < 2 || (name[0] != 'w' && name[0] != 'r'))
    throw parse_error("bad client name " + name);
  int idx = 0;
  try {
    idx = std::stoi(name.substr(1));
  } catch (const std::exception&) {
    throw parse_error("bad client name " + name);
  }
  if (name[0] == 'w') {
    if (idx < 0 || idx >= cfg.writers)
      throw parse_error("writer out of range in " + name);
    return cfg.writer_client(idx);
  }
  if (idx < 0 || idx >= cfg.readers)
    throw parse_error("reader out of range in " + name);
  return cfg.reader_client(idx);
}

namespace {

std::string render_value_list(const std::set<Value>& vals) {
  std::string out = "[";
  bool first = true;
  for (const Value& v : vals) {
    if (!first) out += ",";
    first = false;
    out += to_string(v);
  }
  out += "]";
  return out;
}

std::string render_vector_field(const SystemConfig& cfg,
                                const std::map<Value, std::set<int>>& vec) {
  std::string out = "{";
  bool first_v = true;
  for (const auto& [v, regs] : vec) {
    if (!first_v) out += ",";
    first_v = false;
    out += to_string(v) + ":[";
    bool first_r = true;
    for (int c : regs) {
      if (!first_r) out += ",";
      first_r = false;
      out += client_name(cfg, c);
    }
    out += "]";
  }
  out += "}";
  return out;
}

}  // namespace

std::string render_request(const SystemConfig& cfg, const RequestPayload& p) {
  if (const auto* r = std::get_if<ReadRequest>(&p))
    return "read-query " + client_name(cfg, r->reader) + " " +
           render_value_list(r->val_queue);
  if (std::holds_alternative<WriteQuery>(p)) return "write-query";
  if (const auto* w = std::get_if<WriteRequest>(&p))
    return "write-store " + to_string(w->value) + " by " +
           client_name(cfg, w->sender);
  if (std::holds_alternative<NaiveQuery>(p)) return "latest-query";
  return "latest-store " + to_string(std::get<NaiveWrite>(p).value);
}

std::string render_reply(const SystemConfig& cfg, const ReplyPayload& p) {
  if (const auto* v = std::get_if<VectorAck>(&p))
    return "vector " + render_vector_field(cfg, v->vector);
  if (std::holds_alternative<WriteAck>(p)) return "stored";
  if (const auto* l = std::get_if<LatestAck>(&p))
    return "latest " + to_string(l->value);
  return "latest-stored";
}

std::string render_server_state(const SystemConfig& cfg,
                                const ServerState& state, bool naive) {
  std::string out;
  if (naive) out += "last " + to_string(state.last_arrival) + " ";
  out += "store " + render_vector_field(cfg, state.vector);
  return out;
}

}  // namespace quorumlab
