#pragma once

#include <filesystem>
#include <string>

#include "config.hpp"

namespace duallearn::cli {

// Every command writes config.resolved.json, seed.txt, trace.jsonl and
// summary.json into `run_dir`; train also writes model.txt and thetas.txt.
void run_train(const RunConfig& cfg, const std::filesystem::path& run_dir);
void run_eval(const RunConfig& cfg, const std::filesystem::path& run_dir);
void run_example1(const RunConfig& cfg, const std::filesystem::path& run_dir, std::size_t workers);
void run_bounds(const RunConfig& cfg, const std::filesystem::path& run_dir);

// --out, then output.dir, then $DUALLEARN_OUT/<command>-<seed>, then
// runs/<command>-<seed>.
std::filesystem::path resolve_run_dir(const std::string& command, const RunConfig& cfg, const std::string& out_flag);

}  // namespace duallearn::cli
