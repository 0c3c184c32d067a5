#include "quorumlab/experiment.hpp"

#include <fstream>
#include <sstream>

#include "quorumlab/automata.hpp"
#include "quorumlab/chains.hpp"
#include "quorumlab/trace_io.hpp"

namespace quorumlab {

namespace {

constexpr std::uint64_t kWorkloadSalt = 0x9E3779B97F4A7C15ULL;

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig config;
  bool saw_version = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find(" = ");
    if (eq == std::string::npos)
      throw parse_error("malformed config line: " + line);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 3);
    auto num = [&]() -> std::int64_t {
      try {
        size_t used = 0;
        std::int64_t v = std::stoll(value, &used);
        if (used != value.size()) throw parse_error("bad number " + value);
        return v;
      } catch (const parse_error&) {
        throw;
      } catch (const std::exception&) {
        throw parse_error("bad number " + value);
      }
    };
    if (key == "version") {
      if (value != "1") throw parse_error("unsupported version " + value);
      saw_version = true;
    } else if (key == "protocol") {
      config.protocol = value;
    } else if (key == "servers") {
      config.system.servers = int(num());
    } else if (key == "writers") {
      config.system.writers = int(num());
    } else if (key == "readers") {
      config.system.readers = int(num());
    } else if (key == "crash_tolerance") {
      config.system.crash_tolerance = int(num());
    } else if (key == "mode") {
      config.mode = value;
    } else if (key == "seed") {
      config.seed = std::uint64_t(num());
      config.has_seed = true;
    } else if (key == "ops") {
      config.ops = int(num());
    } else if (key == "schedule_file") {
      config.schedule_file = value;
    } else if (key == "chain") {
      config.chain = value;
    } else if (key == "chain_element") {
      config.chain_element = int(num());
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else {
      throw parse_error("unknown config key " + key);
    }
  }
  if (!saw_version) throw parse_error("config is missing version = 1");
  return config;
}

std::string serialize_experiment_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "version = 1\n";
  out << "protocol = " << config.protocol << "\n";
  out << "servers = " << config.system.servers << "\n";
  out << "writers = " << config.system.writers << "\n";
  out << "readers = " << config.system.readers << "\n";
  out << "crash_tolerance = " << config.system.crash_tolerance << "\n";
  out << "mode = " << config.mode << "\n";
  if (config.has_seed) out << "seed = " << config.seed << "\n";
  if (config.mode == "random") out << "ops = " << config.ops << "\n";
  if (config.mode == "file")
    out << "schedule_file = " << config.schedule_file << "\n";
  if (config.mode == "chain") {
    out << "chain = " << config.chain << "\n";
    out << "chain_element = " << config.chain_element << "\n";
  }
  out << "out_dir = " << config.out_dir << "\n";
  return out.str();
}

std::uint64_t experiment_config_hash(const ExperimentConfig& config) {
  return fnv1a64(serialize_experiment_config(config));
}

RunArtifacts run_experiment(const ExperimentConfig& config) {
  config.system.validate();
  protocol_family(config.protocol);

  Schedule schedule;
  if (config.mode == "random") {
    if (!config.has_seed)
      throw validation_error("random mode needs a seed");
    Workload workload = random_workload(config.system, config.ops,
                                        config.seed ^ kWorkloadSalt);
    schedule = random_schedule(config.system, workload, config.seed);
  } else if (config.mode == "chain") {
    if (config.chain != "alpha")
      throw validation_error("unknown chain " + config.chain);
    AlphaChain chain = build_chain_alpha(config.system, config.protocol);
    if (config.chain_element < 0 ||
        config.chain_element >= int(chain.elements.size()))
      throw validation_error("chain element out of range");
    schedule = chain.elements[config.chain_element];
  } else if (config.mode == "file") {
    std::ifstream in(config.schedule_file);
    if (!in) throw validation_error("cannot open " + config.schedule_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto [cfg, parsed] = parse_schedule(buf.str());
    if (!(cfg == config.system))
      throw validation_error("schedule file disagrees with the config");
    schedule = std::move(parsed);
  } else {
    throw validation_error("unknown mode " + config.mode);
  }

  RunArtifacts artifacts;
  artifacts.trace = run(config.system, config.protocol, schedule);
  artifacts.trace_text = serialize_trace(artifacts.trace);
  artifacts.history_text = serialize_history(artifacts.trace.history);

  std::ostringstream summary;
  std::ostringstream hash;
  hash << std::hex << experiment_config_hash(config);
  summary << "experiment " << hash.str() << "\n";
  summary << "protocol " << config.protocol << " servers "
          << config.system.servers << " writers " << config.system.writers
          << " readers " << config.system.readers << " crash_tolerance "
          << config.system.crash_tolerance << "\n";
  int completed = 0, pending = 0;
  int wmin = -1, wmax = -1, rmin = -1, rmax = -1;
  for (const auto& op : artifacts.trace.history.ops) {
    if (op.pending()) {
      ++pending;
      continue;
    }
    ++completed;
    int& mn = op.kind == OpKind::Write ? wmin : rmin;
    int& mx = op.kind == OpKind::Write ? wmax : rmax;
    if (mn < 0 || op.round_trips < mn) mn = op.round_trips;
    if (mx < 0 || op.round_trips > mx) mx = op.round_trips;
  }
  summary << "ops " << artifacts.trace.history.ops.size() << " completed "
          << completed << " pending " << pending << "\n";
  for (const auto& op : artifacts.trace.history.ops)
    summary << "op " << op.id << " "
            << (op.kind == OpKind::Write ? "write" : "read")
            << " round_trips " << op.round_trips
            << (op.pending() ? " pending" : "") << "\n";
  if (wmin >= 0)
    summary << "completed writes round_trips min " << wmin << " max " << wmax
            << "\n";
  if (rmin >= 0)
    summary << "completed reads round_trips min " << rmin << " max " << rmax
            << "\n";
  artifacts.summary_text = summary.str();
  return artifacts;
}

std::vector<MatrixRow> matrix_rows(const std::vector<int>& servers,
                                   const std::vector<int>& tolerances,
                                   const std::vector<int>& readers) {
  if (servers.empty() || tolerances.empty() || readers.empty())
    throw validation_error("matrix ranges must be nonempty");
  std::vector<MatrixRow> rows;
  for (int S : servers) {
    for (int t : tolerances) {
      for (int R : readers) {
        if (S < 1 || t < 0 || R < 1)
          throw validation_error("matrix ranges out of bounds");
        MatrixRow row;
        row.servers = S;
        row.crash_tolerance = t;
        row.readers = R;
        SystemConfig cfg{S, 2, R, t};
        row.w2r1 = feasible_w2r1(cfg) ? "yes" : "no";
        row.w2r2 = feasible_w2r2(cfg) ? "yes" : "no";
        std::string w1 = t == 0 ? "yes" : (R >= 2 ? "no" : "n/a");
        row.w1r2 = w1;
        row.w1r1 = w1;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace quorumlab
