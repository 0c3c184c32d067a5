#include "quorumlab/trace_io.hpp"

#include <sstream>
#include <vector>

namespace quorumlab {

namespace {

constexpr const char* kHeader = "quorumlab-trace v1";

std::string quote(const std::string& s) { return "\"" + s + "\""; }

std::string join_deps(const std::vector<int>& deps) {
  std::string out;
  for (size_t i = 0; i < deps.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(deps[i]);
  }
  return out;
}

std::string server_name(int s) { return "s" + std::to_string(s); }

std::string opt_client(const SystemConfig& cfg, int c) {
  return c < 0 ? "-" : client_name(cfg, c);
}

std::string opt_num(std::int64_t v) {
  return v < 0 ? "-" : std::to_string(v);
}

std::string config_digest_input(const SystemConfig& cfg,
                                const std::string& protocol) {
  return "servers=" + std::to_string(cfg.servers) +
         " writers=" + std::to_string(cfg.writers) +
         " readers=" + std::to_string(cfg.readers) +
         " crash_tolerance=" + std::to_string(cfg.crash_tolerance) +
         " protocol=" + protocol;
}

void write_config(std::ostringstream& out, const SystemConfig& cfg,
                  const std::string& protocol) {
  out << "@config\n";
  out << "version = 1\n";
  if (!protocol.empty()) out << "protocol = " << protocol << "\n";
  out << "servers = " << cfg.servers << "\n";
  out << "writers = " << cfg.writers << "\n";
  out << "readers = " << cfg.readers << "\n";
  out << "crash_tolerance = " << cfg.crash_tolerance << "\n";
  std::ostringstream hash;
  hash << std::hex << fnv1a64(config_digest_input(cfg, protocol));
  out << "hash = " << hash.str() << "\n";
}

void write_workload(std::ostringstream& out, const SystemConfig& cfg,
                    const Workload& w) {
  out << "@workload\n";
  for (const auto& op : w.ops)
    out << "op id=" << op.id
        << " kind=" << (op.kind == OpKind::Write ? "write" : "read")
        << " client=" << client_name(cfg, op.client) << " at=" << op.at_step
        << " deps=" << join_deps(op.deps) << "\n";
}

void write_plan(std::ostringstream& out, const Schedule& s) {
  out << "@plan\n";
  for (const auto& [slot, key] : s.plan)
    out << "entry op=" << std::get<0>(slot) << " rt=" << std::get<1>(slot)
        << " server=" << server_name(std::get<2>(slot)) << " key=" << key
        << "\n";
  for (const auto& slot : s.skips)
    out << "skip op=" << std::get<0>(slot) << " rt=" << std::get<1>(slot)
        << " server=" << server_name(std::get<2>(slot)) << "\n";
  for (const auto& [server, step] : s.crashes)
    out << "crash server=" << server_name(server) << " at=" << step << "\n";
}

void write_ops(std::ostringstream& out, const SystemConfig& cfg,
               const History& h) {
  out << "@ops\n";
  for (const auto& op : h.ops)
    out << "op id=" << op.id
        << " kind=" << (op.kind == OpKind::Write ? "write" : "read")
        << " client=" << client_name(cfg, op.client)
        << " invoke=" << op.invoke << " response=" << opt_num(op.response)
        << " rt=" << op.round_trips
        << " value=" << (op.value ? to_string(*op.value) : "-") << "\n";
}

struct Fields {
  std::vector<std::pair<std::string, std::string>> kv;

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : kv)
      if (k == key) return &v;
    return nullptr;
  }
  const std::string& need(const std::string& key) const {
    const auto* v = find(key);
    if (!v) throw parse_error("missing field " + key);
    return *v;
  }
};

// splits "word key=value key=\"value with spaces\"" after the record word
Fields parse_fields(const std::string& line, size_t start) {
  Fields f;
  size_t i = start;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    size_t eq = line.find('=', i);
    if (eq == std::string::npos)
      throw parse_error("malformed field in line: " + line);
    std::string key = line.substr(i, eq - i);
    i = eq + 1;
    std::string value;
    if (i < line.size() && line[i] == '"') {
      size_t close = line.find('"', i + 1);
      if (close == std::string::npos)
        throw parse_error("unterminated quote in line: " + line);
      value = line.substr(i + 1, close - i - 1);
      i = close + 1;
    } else {
      size_t end = line.find(' ', i);
      if (end == std::string::npos) end = line.size();
      value = line.substr(i, end - i);
      i = end;
    }
    f.kv.emplace_back(std::move(key), std::move(value));
  }
  return f;
}

std::int64_t parse_num(const std::string& s) {
  try {
    size_t used = 0;
    std::int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw parse_error("bad number " + s);
    return v;
  } catch (const parse_error&) {
    throw;
  } catch (const std::exception&) {
    throw parse_error("bad number " + s);
  }
}

std::int64_t parse_opt_num(const std::string& s) {
  return s == "-" ? -1 : parse_num(s);
}

int parse_server(const std::string& s, const SystemConfig& cfg) {
  if (s.size() < 2 || s[0] != 's') throw parse_error("bad server name " + s);
  std::int64_t v = parse_num(s.substr(1));
  if (v < 0 || v >= cfg.servers)
    throw parse_error("server out of range in " + s);
  return int(v);
}

std::vector<int> parse_deps(const std::string& s) {
  std::vector<int> deps;
  size_t i = 0;
  while (i < s.size()) {
    size_t comma = s.find(',', i);
    if (comma == std::string::npos) comma = s.size();
    deps.push_back(int(parse_num(s.substr(i, comma - i))));
    i = comma + 1;
  }
  return deps;
}

OpKind parse_kind(const std::string& s) {
  if (s == "write") return OpKind::Write;
  if (s == "read") return OpKind::Read;
  throw parse_error("bad op kind " + s);
}

struct Container {
  SystemConfig config;
  std::string protocol;
  bool has_config = false;
  Workload workload;
  Schedule schedule;
  std::vector<TraceEvent> events;
  std::vector<std::string> final_states;
  History history;
  bool has_ops = false;
};

Container parse_container(const std::string& text) {
  Container c;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw parse_error("missing trace header");
  std::string section;
  bool ended = false;
  std::string hash_claim;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (ended) throw parse_error("content after @end");
    if (line[0] == '@') {
      section = line.substr(1);
      if (section == "end") ended = true;
      continue;
    }
    if (section == "config") {
      size_t eq = line.find(" = ");
      if (eq == std::string::npos)
        throw parse_error("malformed config line: " + line);
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 3);
      if (key == "version") {
        if (value != "1") throw parse_error("unsupported version " + value);
      } else if (key == "protocol") {
        c.protocol = value;
      } else if (key == "servers") {
        c.config.servers = int(parse_num(value));
      } else if (key == "writers") {
        c.config.writers = int(parse_num(value));
      } else if (key == "readers") {
        c.config.readers = int(parse_num(value));
      } else if (key == "crash_tolerance") {
        c.config.crash_tolerance = int(parse_num(value));
      } else if (key == "hash") {
        hash_claim = value;
      } else {
        throw parse_error("unknown config key " + key);
      }
      c.has_config = true;
      continue;
    }
    if (!c.has_config)
      throw parse_error("@config must precede section " + section);
    size_t sp = line.find(' ');
    std::string word = sp == std::string::npos ? line : line.substr(0, sp);
    Fields f = parse_fields(line, sp == std::string::npos ? line.size() : sp);
    if (section == "workload") {
      if (word != "op") throw parse_error("unexpected record " + word);
      WorkloadOp op;
      op.id = int(parse_num(f.need("id")));
      op.kind = parse_kind(f.need("kind"));
      op.client = parse_client_name(c.config, f.need("client"));
      op.at_step = parse_num(f.need("at"));
      op.deps = parse_deps(f.need("deps"));
      c.workload.ops.push_back(std::move(op));
    } else if (section == "plan") {
      if (word == "entry") {
        c.schedule.plan[{int(parse_num(f.need("op"))),
                         int(parse_num(f.need("rt"))),
                         parse_server(f.need("server"), c.config)}] =
            parse_num(f.need("key"));
      } else if (word == "skip") {
        c.schedule.skips.insert({int(parse_num(f.need("op"))),
                                 int(parse_num(f.need("rt"))),
                                 parse_server(f.need("server"), c.config)});
      } else if (word == "crash") {
        c.schedule.crashes[parse_server(f.need("server"), c.config)] =
            parse_num(f.need("at"));
      } else {
        throw parse_error("unexpected record " + word);
      }
    } else if (section == "events") {
      if (word != "event") throw parse_error("unexpected record " + word);
      TraceEvent ev;
      ev.time = parse_num(f.need("t"));
      ev.seq = int(parse_num(f.need("seq")));
      ev.kind = f.need("kind");
      if (const auto* v = f.find("client"))
        ev.client = *v == "-" ? -1 : parse_client_name(c.config, *v);
      if (const auto* v = f.find("server"))
        ev.server = *v == "-" ? -1 : parse_server(*v, c.config);
      if (const auto* v = f.find("op")) ev.op = int(parse_opt_num(*v));
      if (const auto* v = f.find("rt")) ev.rt = int(parse_opt_num(*v));
      if (const auto* v = f.find("payload")) ev.payload = *v;
      if (const auto* v = f.find("reply")) ev.reply = *v;
      if (const auto* v = f.find("state")) ev.state = *v;
      c.events.push_back(std::move(ev));
    } else if (section == "states") {
      if (word != "state") throw parse_error("unexpected record " + word);
      int server = parse_server(f.need("server"), c.config);
      if (int(c.final_states.size()) <= server)
        c.final_states.resize(server + 1);
      c.final_states[server] = f.need("value");
    } else if (section == "ops") {
      if (word != "op") throw parse_error("unexpected record " + word);
      OpRecord op;
      op.id = int(parse_num(f.need("id")));
      op.kind = parse_kind(f.need("kind"));
      op.client = parse_client_name(c.config, f.need("client"));
      op.invoke = parse_num(f.need("invoke"));
      op.response = parse_opt_num(f.need("response"));
      op.round_trips = int(parse_num(f.need("rt")));
      const std::string& val = f.need("value");
      if (val != "-") op.value = parse_value(val);
      c.history.ops.push_back(std::move(op));
      c.has_ops = true;
    } else {
      throw parse_error("record outside any section: " + line);
    }
  }
  if (!ended) throw parse_error("truncated file, missing @end");
  if (!c.has_config) throw parse_error("missing @config section");
  if (!hash_claim.empty()) {
    std::ostringstream expect;
    expect << std::hex << fnv1a64(config_digest_input(c.config, c.protocol));
    if (hash_claim != expect.str())
      throw parse_error("config hash mismatch");
  }
  c.history.config = c.config;
  return c;
}

}  // namespace

std::string serialize_trace(const ExecutionTrace& trace) {
  std::ostringstream out;
  out << kHeader << "\n";
  write_config(out, trace.config, trace.protocol);
  write_workload(out, trace.config, trace.schedule.workload);
  write_plan(out, trace.schedule);
  out << "@events\n";
  for (const auto& ev : trace.events) {
    out << "event t=" << ev.time << " seq=" << ev.seq << " kind=" << ev.kind;
    out << " client=" << opt_client(trace.config, ev.client);
    out << " server=" << (ev.server < 0 ? "-" : server_name(ev.server));
    out << " op=" << opt_num(ev.op) << " rt=" << opt_num(ev.rt);
    if (!ev.payload.empty()) out << " payload=" << quote(ev.payload);
    if (!ev.reply.empty()) out << " reply=" << quote(ev.reply);
    if (!ev.state.empty()) out << " state=" << quote(ev.state);
    out << "\n";
  }
  out << "@states\n";
  for (size_t s = 0; s < trace.final_states.size(); ++s)
    out << "state server=" << server_name(int(s))
        << " value=" << quote(trace.final_states[s]) << "\n";
  write_ops(out, trace.config, trace.history);
  out << "@end\n";
  return out.str();
}

ExecutionTrace parse_trace(const std::string& text) {
  Container c = parse_container(text);
  ExecutionTrace trace;
  trace.config = c.config;
  trace.protocol = c.protocol;
  trace.schedule = std::move(c.schedule);
  trace.schedule.workload = std::move(c.workload);
  trace.events = std::move(c.events);
  trace.final_states = std::move(c.final_states);
  trace.history = std::move(c.history);
  return trace;
}

std::string serialize_history(const History& h) {
  std::ostringstream out;
  out << kHeader << "\n";
  write_config(out, h.config, "");
  write_ops(out, h.config, h);
  out << "@end\n";
  return out.str();
}

History parse_history(const std::string& text) {
  Container c = parse_container(text);
  if (!c.has_ops) throw parse_error("missing @ops section");
  return std::move(c.history);
}

std::string serialize_schedule(const SystemConfig& cfg, const Schedule& s) {
  std::ostringstream out;
  out << kHeader << "\n";
  write_config(out, cfg, "");
  write_workload(out, cfg, s.workload);
  write_plan(out, s);
  out << "@end\n";
  return out.str();
}

std::pair<SystemConfig, Schedule> parse_schedule(const std::string& text) {
  Container c = parse_container(text);
  Schedule s = std::move(c.schedule);
  s.workload = std::move(c.workload);
  return {c.config, std::move(s)};
}

Value parse_value(const std::string& text) {
  if (text.size() < 5 || text.front() != '(' || text.back() != ')')
    throw parse_error("bad value " + text);
  size_t comma = text.find(',');
  if (comma == std::string::npos) throw parse_error("bad value " + text);
  Value v;
  v.ts = parse_num(text.substr(1, comma - 1));
  std::string wid = text.substr(comma + 1, text.size() - comma - 2);
  if (wid == "_") {
    v.wid = WriterId::bottom();
  } else if (wid.size() >= 2 && wid[0] == 'w') {
    v.wid = WriterId::of(int(parse_num(wid.substr(1))));
  } else {
    throw parse_error("bad writer id " + wid);
  }
  return v;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace quorumlab
