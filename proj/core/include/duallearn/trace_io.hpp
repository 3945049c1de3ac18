#pragma once

#include <filesystem>

#include "duallearn/primal_dual.hpp"

namespace duallearn {

inline constexpr const char* kTraceFileName = "trace.jsonl";
inline constexpr const char* kThetaFileName = "thetas.txt";

// Writes `dir`/trace.jsonl, one JSON object per iteration with keys
// t, objective, slacks, mu, lagrangian, theta_ref, and `dir`/thetas.txt
// holding the architecture on line 1 and one space-separated snapshot per
// following line. theta_ref is {"path": "thetas.txt", "line": k} or null.
void write_trace(const TrainTrace& trace, const std::filesystem::path& dir);

// Inverse of write_trace. Throws ParseError on malformed records.
TrainTrace read_trace(const std::filesystem::path& dir);

}  // namespace duallearn
