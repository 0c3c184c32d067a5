#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quorumlab/core.hpp"
#include "quorumlab/simnet.hpp"

namespace quorumlab {

// Flat key-value experiment description; round-trips losslessly through its
// file form.  Random mode derives the workload and the schedule from the
// seed; chain mode takes one element of the alpha chain; file mode replays a
// schedule file.
struct ExperimentConfig {
  SystemConfig system{5, 2, 2, 1};
  std::string protocol = "w2r1";
  std::string mode = "random";  // random | file | chain
  std::uint64_t seed = 0;
  bool has_seed = false;
  int ops = 10;
  std::string schedule_file;
  std::string chain = "alpha";
  int chain_element = 0;
  std::string out_dir = ".";

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_experiment_config(const std::string& text);
std::string serialize_experiment_config(const ExperimentConfig& config);
std::uint64_t experiment_config_hash(const ExperimentConfig& config);

struct RunArtifacts {
  ExecutionTrace trace;
  std::string trace_text;
  std::string history_text;
  std::string summary_text;
};

RunArtifacts run_experiment(const ExperimentConfig& config);

struct MatrixRow {
  int servers = 0;
  int crash_tolerance = 0;
  int readers = 0;
  std::string w2r1;
  std::string w2r2;
  std::string w1r2;
  std::string w1r1;
};

// Feasibility per family at two writers; "n/a" marks single-reader cells the
// impossibility results do not cover.
std::vector<MatrixRow> matrix_rows(const std::vector<int>& servers,
                                   const std::vector<int>& tolerances,
                                   const std::vector<int>& readers);

}  // namespace quorumlab
