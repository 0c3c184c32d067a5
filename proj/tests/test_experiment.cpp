#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "quorumlab/chains.hpp"
#include "quorumlab/experiment.hpp"
#include "quorumlab/trace_io.hpp"

using namespace quorumlab;

namespace {

ExperimentConfig random_config() {
  ExperimentConfig c;
  c.system = SystemConfig{5, 2, 2, 1};
  c.protocol = "w2r1";
  c.mode = "random";
  c.seed = 7;
  c.has_seed = true;
  c.ops = 10;
  c.out_dir = "out";
  return c;
}

std::string write_temp(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << text;
  out.close();
  return path.string();
}

}  // namespace

TEST_CASE("experiment configs round-trip through their file form") {
  ExperimentConfig random = random_config();

  ExperimentConfig chain;
  chain.system = SystemConfig{3, 2, 2, 1};
  chain.protocol = "w1r2-naive";
  chain.mode = "chain";
  chain.chain = "alpha";
  chain.chain_element = 2;
  chain.out_dir = ".";

  ExperimentConfig file;
  file.system = SystemConfig{7, 3, 3, 2};
  file.protocol = "w2r2-abd";
  file.mode = "file";
  file.schedule_file = "plans/replay.trace";
  file.seed = 0;
  file.has_seed = true;

  for (const auto& config : {random, chain, file}) {
    std::string text = serialize_experiment_config(config);
    ExperimentConfig parsed = parse_experiment_config(text);
    CHECK(parsed == config);
    CHECK(serialize_experiment_config(parsed) == text);
  }
}

TEST_CASE("config files tolerate comments and blank lines") {
  std::string text =
      "# quorumlab experiment\n"
      "\n"
      "version = 1\n"
      "protocol = w2r1\n"
      "servers = 5\n"
      "# five servers, one crash\n"
      "crash_tolerance = 1\n"
      "mode = random\n"
      "seed = 3\n";
  ExperimentConfig c = parse_experiment_config(text);
  CHECK(c.protocol == "w2r1");
  CHECK(c.system.servers == 5);
  CHECK(c.system.crash_tolerance == 1);
  CHECK(c.seed == 3);
  CHECK(c.has_seed);
  CHECK(c.system.writers == 2);  // defaults survive
}

TEST_CASE("config parsing rejects malformed input") {
  CHECK_THROWS_WITH_AS(parse_experiment_config("protocol = w2r1\n"),
                       "config is missing version = 1", parse_error);
  CHECK_THROWS_WITH_AS(parse_experiment_config("version = 2\n"),
                       "unsupported version 2", parse_error);
  CHECK_THROWS_WITH_AS(parse_experiment_config("version = 1\ncolor = red\n"),
                       "unknown config key color", parse_error);
  CHECK_THROWS_WITH_AS(parse_experiment_config("version = 1\nservers=5\n"),
                       "malformed config line: servers=5", parse_error);
  CHECK_THROWS_WITH_AS(parse_experiment_config("version = 1\nservers = x\n"),
                       "bad number x", parse_error);
}

TEST_CASE("the config hash tracks the config content") {
  ExperimentConfig a = random_config();
  ExperimentConfig b = a;
  CHECK(experiment_config_hash(a) == experiment_config_hash(b));
  b.seed = 8;
  CHECK(experiment_config_hash(a) != experiment_config_hash(b));
  b = a;
  b.protocol = "w2r2-abd";
  CHECK(experiment_config_hash(a) != experiment_config_hash(b));
  CHECK(experiment_config_hash(a) ==
        fnv1a64(serialize_experiment_config(a)));
}

TEST_CASE("random experiments are reproducible") {
  ExperimentConfig config = random_config();
  RunArtifacts a = run_experiment(config);
  RunArtifacts b = run_experiment(config);
  CHECK(a.trace_text == b.trace_text);
  CHECK(a.history_text == b.history_text);
  CHECK(a.summary_text == b.summary_text);
  CHECK(!a.trace_text.empty());

  ExperimentConfig other = config;
  other.seed = config.seed + 1;
  RunArtifacts c = run_experiment(other);
  CHECK(a.trace_text != c.trace_text);
}

TEST_CASE("the summary reports round trips per operation kind") {
  RunArtifacts artifacts = run_experiment(random_config());
  CHECK(artifacts.summary_text.find("protocol w2r1 servers 5") !=
        std::string::npos);
  CHECK(artifacts.summary_text.find("completed writes round_trips min 2 max 2") !=
        std::string::npos);
  CHECK(artifacts.summary_text.find("completed reads round_trips min 1 max 1") !=
        std::string::npos);
  CHECK(artifacts.summary_text.find("ops 10") != std::string::npos);
}

TEST_CASE("random mode requires a seed") {
  ExperimentConfig config = random_config();
  config.has_seed = false;
  CHECK_THROWS_WITH_AS(run_experiment(config), "random mode needs a seed",
                       validation_error);
}

TEST_CASE("chain mode replays one alpha element") {
  ExperimentConfig config;
  config.system = SystemConfig{3, 2, 2, 1};
  config.protocol = "w1r2-naive";
  config.mode = "chain";
  config.chain_element = 1;
  RunArtifacts artifacts = run_experiment(config);

  auto chain = build_chain_alpha(config.system, config.protocol);
  auto direct = run(config.system, config.protocol, chain.elements[1]);
  CHECK(artifacts.trace_text == serialize_trace(direct));

  config.chain_element = 4;
  CHECK_THROWS_WITH_AS(run_experiment(config), "chain element out of range",
                       validation_error);
  config.chain_element = 0;
  config.chain = "gamma";
  CHECK_THROWS_WITH_AS(run_experiment(config), "unknown chain gamma",
                       validation_error);
}

TEST_CASE("file mode replays a stored schedule") {
  SystemConfig system{5, 2, 2, 1};
  Workload workload = random_workload(system, 6, 11);
  Schedule schedule = random_schedule(system, workload, 12);
  std::string path = write_temp("quorumlab-test-schedule.trace",
                                serialize_schedule(system, schedule));

  ExperimentConfig config;
  config.system = system;
  config.protocol = "w2r1";
  config.mode = "file";
  config.schedule_file = path;
  RunArtifacts artifacts = run_experiment(config);
  auto direct = run(system, "w2r1", schedule);
  CHECK(artifacts.trace_text == serialize_trace(direct));

  config.system.servers = 7;
  CHECK_THROWS_WITH_AS(run_experiment(config),
                       "schedule file disagrees with the config",
                       validation_error);

  config.system = system;
  config.schedule_file = "/nonexistent/schedule.trace";
  CHECK_THROWS_WITH_AS(run_experiment(config),
                       "cannot open /nonexistent/schedule.trace",
                       validation_error);
}

TEST_CASE("unknown modes and protocols are rejected") {
  ExperimentConfig config = random_config();
  config.mode = "stream";
  CHECK_THROWS_WITH_AS(run_experiment(config), "unknown mode stream",
                       validation_error);
  config = random_config();
  config.protocol = "w9r9";
  CHECK_THROWS_AS(run_experiment(config), validation_error);
}

TEST_CASE("the feasibility matrix matches the closed-form conditions") {
  std::vector<int> servers, tolerances, readers;
  for (int s = 3; s <= 12; ++s) servers.push_back(s);
  for (int t = 1; t <= 3; ++t) tolerances.push_back(t);
  for (int r = 1; r <= 6; ++r) readers.push_back(r);
  auto rows = matrix_rows(servers, tolerances, readers);
  REQUIRE(rows.size() == servers.size() * tolerances.size() * readers.size());

  size_t i = 0;
  for (int S : servers) {
    for (int t : tolerances) {
      for (int R : readers) {
        const MatrixRow& row = rows[i++];
        CHECK(row.servers == S);
        CHECK(row.crash_tolerance == t);
        CHECK(row.readers == R);
        CHECK(row.w2r1 == ((R + 2) * t < S ? "yes" : "no"));
        CHECK(row.w2r2 == (2 * t < S ? "yes" : "no"));
        std::string w1 = R >= 2 ? "no" : "n/a";
        CHECK(row.w1r2 == w1);
        CHECK(row.w1r1 == w1);
      }
    }
  }
}

TEST_CASE("five servers one crash supports at most two fast readers") {
  auto rows = matrix_rows({5}, {1}, {1, 2, 3, 4});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].w2r1 == "yes");
  CHECK(rows[1].w2r1 == "yes");
  CHECK(rows[2].w2r1 == "no");
  CHECK(rows[3].w2r1 == "no");
}

TEST_CASE("half or more crashing servers defeat the baseline") {
  auto rows = matrix_rows({4, 5}, {2, 3}, {2});
  for (const auto& row : rows)
    CHECK(row.w2r2 ==
          (2 * row.crash_tolerance < row.servers ? "yes" : "no"));
  CHECK(rows[0].w2r2 == "no");   // S=4, t=2
  CHECK(rows[3].w2r2 == "no");   // S=5, t=3
}

TEST_CASE("a crash-free system makes every family feasible") {
  auto rows = matrix_rows({3}, {0}, {1, 2});
  for (const auto& row : rows) {
    CHECK(row.w2r1 == "yes");
    CHECK(row.w2r2 == "yes");
    CHECK(row.w1r2 == "yes");
    CHECK(row.w1r1 == "yes");
  }
}

TEST_CASE("matrix ranges must be sane") {
  CHECK_THROWS_WITH_AS(matrix_rows({}, {1}, {2}),
                       "matrix ranges must be nonempty", validation_error);
  CHECK_THROWS_WITH_AS(matrix_rows({5}, {1}, {}),
                       "matrix ranges must be nonempty", validation_error);
  CHECK_THROWS_WITH_AS(matrix_rows({0}, {1}, {2}),
                       "matrix ranges out of bounds", validation_error);
  CHECK_THROWS_WITH_AS(matrix_rows({5}, {-1}, {2}),
                       "matrix ranges out of bounds", validation_error);
  CHECK_THROWS_WITH_AS(matrix_rows({5}, {1}, {0}),
                       "matrix ranges out of bounds", validation_error);
}
