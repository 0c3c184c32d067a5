#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "quorumlab/histories.hpp"
#include "quorumlab/simnet.hpp"

namespace quorumlab {

// Line-oriented container, header "quorumlab-trace v1", sections introduced
// by @config/@workload/@plan/@events/@states/@ops and closed by @end.
// History and schedule files reuse the container with fewer sections.
std::string serialize_trace(const ExecutionTrace& trace);
ExecutionTrace parse_trace(const std::string& text);

std::string serialize_history(const History& h);
History parse_history(const std::string& text);

std::string serialize_schedule(const SystemConfig& cfg, const Schedule& s);
std::pair<SystemConfig, Schedule> parse_schedule(const std::string& text);

Value parse_value(const std::string& text);

std::uint64_t fnv1a64(std::string_view s);

}  // namespace quorumlab
