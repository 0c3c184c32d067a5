#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quorumlab/chains.hpp"
#include "quorumlab/experiment.hpp"
#include "quorumlab/histories.hpp"
#include "quorumlab/trace_io.hpp"

using nlohmann::json;
using namespace quorumlab;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path);
  out << content;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << v;
  return out.str();
}

struct CommonFlags {
  std::string config_path;
  std::string protocol;
  std::string out_dir;
  std::string format = "text";
  std::uint64_t seed = 0;
  bool has_seed = false;
};

int cmd_run(const CommonFlags& flags) {
  ExperimentConfig config;
  if (!flags.config_path.empty())
    config = parse_experiment_config(read_file(flags.config_path));
  if (!flags.protocol.empty()) config.protocol = flags.protocol;
  if (flags.has_seed) {
    config.seed = flags.seed;
    config.has_seed = true;
  }
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;

  RunArtifacts artifacts = run_experiment(config);
  std::filesystem::create_directories(config.out_dir);
  std::string trace_path = config.out_dir + "/trace.txt";
  std::string history_path = config.out_dir + "/history.txt";
  write_file(trace_path, artifacts.trace_text);
  write_file(history_path, artifacts.history_text);

  if (flags.format == "machine") {
    json report;
    report["config_hash"] = hex64(experiment_config_hash(config));
    report["protocol"] = config.protocol;
    report["trace_file"] = trace_path;
    report["history_file"] = history_path;
    json ops = json::array();
    for (const auto& op : artifacts.trace.history.ops) {
      json o;
      o["id"] = op.id;
      o["kind"] = op.kind == OpKind::Write ? "write" : "read";
      o["round_trips"] = op.round_trips;
      o["pending"] = op.pending();
      if (op.value) o["value"] = to_string(*op.value);
      ops.push_back(o);
    }
    report["ops"] = ops;
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << artifacts.summary_text;
    std::cout << "trace " << trace_path << "\n";
    std::cout << "history " << history_path << "\n";
  }
  return 0;
}

int cmd_check(const std::string& path, const CommonFlags& flags) {
  History history = parse_history(read_file(path));
  AtomicityVerdict verdict = check_atomic(history);
  MwaReport mwa = check_mwa(history);

  json report;
  report["file"] = path;
  report["atomic"] = verdict.atomic;
  if (verdict.atomic) {
    report["serialization"] = verdict.serialization;
  } else {
    json cycle = json::array();
    for (const auto& v : verdict.cycle) cycle.push_back(to_string(v));
    report["cycle"] = cycle;
    report["detail"] = verdict.detail;
  }
  report["mwa_clean"] = mwa.clean;
  report["mwa_violations"] = mwa.violations;

  if (flags.format == "machine") {
    std::cout << report.dump(2) << "\n";
  } else {
    if (verdict.atomic) {
      std::cout << "atomic: yes\nserialization:";
      for (int id : verdict.serialization) std::cout << " " << id;
      std::cout << "\n";
    } else {
      std::cout << "atomic: no\n";
      if (!verdict.cycle.empty()) {
        std::cout << "cycle:";
        for (const auto& v : verdict.cycle) std::cout << " " << to_string(v);
        std::cout << "\n";
      }
      std::cout << "detail: " << verdict.detail << "\n";
    }
    std::cout << "mwa: " << (mwa.clean ? "clean" : "violations") << "\n";
    for (const auto& v : mwa.violations) std::cout << "  " << v << "\n";
  }
  if (!flags.out_dir.empty()) {
    std::filesystem::create_directories(flags.out_dir);
    write_file(flags.out_dir + "/check-report.json", report.dump(2) + "\n");
  }
  return verdict.atomic && mwa.clean ? 0 : 1;
}

int cmd_explore(const CommonFlags& flags, int servers, int tolerance,
                int budget) {
  SystemConfig cfg{servers, 2, 2, tolerance};
  std::string protocol = flags.protocol.empty() ? "w1r2-naive" : flags.protocol;
  SearchReport report =
      contradiction_search(cfg, protocol, flags.seed, budget);

  std::string out_dir = flags.out_dir.empty() ? "." : flags.out_dir;
  std::filesystem::create_directories(out_dir);

  std::ostringstream text;
  text << "protocol " << protocol << " servers " << servers
       << " crash_tolerance " << tolerance << "\n";
  if (report.alpha_report.found) {
    text << "alpha flip at element " << report.alpha_report.flip_index
         << ", critical server s" << report.alpha_report.critical_server
         << "\n";
  }
  for (size_t i = 0; i < report.alpha_report.returns.size(); ++i)
    text << "alpha[" << i << "] read "
         << to_string(report.alpha_report.returns[i]) << "\n";
  json jreport;
  jreport["protocol"] = protocol;
  jreport["servers"] = servers;
  jreport["crash_tolerance"] = tolerance;
  jreport["violation"] = report.violation;
  jreport["kind"] = report.kind;
  if (report.violation) {
    std::string trace_path = out_dir + "/certificate.trace";
    write_file(trace_path, serialize_trace(report.trace));
    AtomicityVerdict again = check_atomic(report.trace.history);
    text << "violation " << report.source << "\n";
    text << "detail "
         << (report.detail.empty() ? report.verdict.detail : report.detail)
         << "\n";
    text << "certificate " << trace_path << " reverified "
         << (again.atomic ? "no" : "yes") << "\n";
    jreport["source"] = report.source;
    jreport["certificate"] = trace_path;
    jreport["reverified"] = !again.atomic;
  } else {
    text << "exhausted: " << report.detail << "\n";
  }
  write_file(out_dir + "/explore-report.txt", text.str());
  write_file(out_dir + "/explore-report.json", jreport.dump(2) + "\n");
  if (flags.format == "machine")
    std::cout << jreport.dump(2) << "\n";
  else
    std::cout << text.str();
  return report.violation ? 1 : 0;
}

std::vector<int> parse_range(const std::string& text) {
  size_t dots = text.find("..");
  std::vector<int> out;
  try {
    if (dots == std::string::npos) {
      out.push_back(std::stoi(text));
    } else {
      int lo = std::stoi(text.substr(0, dots));
      int hi = std::stoi(text.substr(dots + 2));
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
  } catch (const std::exception&) {
    throw validation_error("bad range " + text);
  }
  if (out.empty()) throw validation_error("empty range " + text);
  return out;
}

int cmd_matrix(const std::string& s_range, const std::string& t_range,
               const std::string& r_range, int writers,
               const CommonFlags& flags) {
  if (writers < 2) {
    std::cout << "single-writer regime is out of scope for this tool\n";
    return 0;
  }
  auto rows = matrix_rows(parse_range(s_range), parse_range(t_range),
                          parse_range(r_range));
  if (flags.format == "machine") {
    json out = json::array();
    for (const auto& row : rows) {
      json r;
      r["servers"] = row.servers;
      r["crash_tolerance"] = row.crash_tolerance;
      r["readers"] = row.readers;
      r["w2r1"] = row.w2r1;
      r["w2r2"] = row.w2r2;
      r["w1r2"] = row.w1r2;
      r["w1r1"] = row.w1r1;
      out.push_back(r);
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "S t R w2r1 w2r2 w1r2 w1r1\n";
    for (const auto& row : rows)
      std::cout << row.servers << " " << row.crash_tolerance << " "
                << row.readers << " " << row.w2r1 << " " << row.w2r2 << " "
                << row.w1r2 << " " << row.w1r1 << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic simulator and checkers for quorum register protocols"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags flags;
  app.add_option("--config", flags.config_path, "experiment config file");
  app.add_option("--protocol", flags.protocol, "protocol name");
  app.add_option("--out-dir", flags.out_dir, "output directory");
  app.add_option("--format", flags.format, "text or machine")
      ->check(CLI::IsMember({"text", "machine"}));
  auto* seed_opt =
      app.add_option("--seed", flags.seed, "seed for random choices");

  auto* run_cmd = app.add_subcommand("run", "simulate one experiment");
  auto* check_cmd =
      app.add_subcommand("check", "check a trace or history file");
  std::string check_path;
  check_cmd->add_option("file", check_path, "trace or history file")
      ->required();
  auto* explore_cmd = app.add_subcommand(
      "explore", "search one-round-write protocols for violations");
  int explore_servers = 3;
  int explore_tolerance = 1;
  int explore_budget = 1000;
  explore_cmd->add_option("--servers", explore_servers, "server count");
  explore_cmd->add_option("--crash-tolerance", explore_tolerance,
                          "crash tolerance");
  explore_cmd->add_option("--budget", explore_budget,
                          "random schedule budget");
  auto* matrix_cmd = app.add_subcommand("matrix", "feasibility table");
  std::string s_range = "3..12", t_range = "1..3", r_range = "1..6";
  int matrix_writers = 2;
  matrix_cmd->add_option("--servers", s_range, "range, e.g. 3..12");
  matrix_cmd->add_option("--crash-tolerance", t_range, "range, e.g. 1..3");
  matrix_cmd->add_option("--readers", r_range, "range, e.g. 1..6");
  matrix_cmd->add_option("--writers", matrix_writers, "writer count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  flags.has_seed = seed_opt->count() > 0;

  try {
    if (run_cmd->parsed()) return cmd_run(flags);
    if (check_cmd->parsed()) return cmd_check(check_path, flags);
    if (explore_cmd->parsed())
      return cmd_explore(flags, explore_servers, explore_tolerance,
                         explore_budget);
    if (matrix_cmd->parsed())
      return cmd_matrix(s_range, t_range, r_range, matrix_writers, flags);
  } catch (const parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
