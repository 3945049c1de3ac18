#include "duallearn/trace_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "duallearn/error.hpp"

namespace duallearn {
namespace {

using nlohmann::json;

constexpr const char* kArchPrefix = "arch ";
constexpr const char* kStridePrefix = "stride ";

}  // namespace

void write_trace(const TrainTrace& trace, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream records(dir / kTraceFileName);
  std::ofstream thetas(dir / kThetaFileName);
  if (!records || !thetas) throw InputError("trace", "cannot write trace files under '" + dir.string() + "'");
  thetas << kArchPrefix << trace.arch.describe() << '\n';
  thetas << kStridePrefix << trace.snapshot_stride << '\n';
  thetas << std::setprecision(std::numeric_limits<double>::max_digits10);
  std::size_t line = 2;
  for (const TrainRecord& r : trace.records) {
    json j;
    j["t"] = r.t;
    j["objective"] = r.objective;
    j["slacks"] = r.slacks;
    j["mu"] = r.mu;
    j["lagrangian"] = r.lagrangian;
    if (r.theta) {
      ++line;
      for (std::size_t i = 0; i < r.theta->size(); ++i) thetas << (i ? " " : "") << (*r.theta)[i];
      thetas << '\n';
      j["theta_ref"] = {{"path", kThetaFileName}, {"line", line}};
    } else {
      j["theta_ref"] = nullptr;
    }
    records << j.dump() << '\n';
  }
  if (!records || !thetas) throw InputError("trace", "failed writing trace files under '" + dir.string() + "'");
}

TrainTrace read_trace(const std::filesystem::path& dir) {
  std::ifstream thetas(dir / kThetaFileName);
  std::ifstream records(dir / kTraceFileName);
  if (!records || !thetas) throw InputError("trace", "cannot open trace files under '" + dir.string() + "'");

  TrainTrace trace;
  std::string line;
  if (!std::getline(thetas, line) || line.rfind(kArchPrefix, 0) != 0) {
    throw ParseError("trace", std::string(kThetaFileName) + " line 1: expected architecture");
  }
  trace.arch = Architecture::parse(line.substr(std::string(kArchPrefix).size()));
  if (!std::getline(thetas, line) || line.rfind(kStridePrefix, 0) != 0) {
    throw ParseError("trace", std::string(kThetaFileName) + " line 2: expected stride");
  }
  trace.snapshot_stride = std::stoull(line.substr(std::string(kStridePrefix).size()));
  std::vector<std::vector<double>> snapshots;
  while (std::getline(thetas, line)) {
    std::istringstream in(line);
    std::vector<double> theta;
    double v = 0.0;
    while (in >> v) theta.push_back(v);
    if (!in.eof()) {
      throw ParseError("trace", std::string(kThetaFileName) + " line " + std::to_string(snapshots.size() + 3) +
                                    ": not a number");
    }
    snapshots.push_back(std::move(theta));
  }

  std::size_t line_no = 0;
  while (std::getline(records, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      TrainRecord r;
      r.t = j.at("t").get<std::size_t>();
      r.objective = j.at("objective").get<double>();
      r.slacks = j.at("slacks").get<std::vector<double>>();
      r.mu = j.at("mu").get<std::vector<double>>();
      r.lagrangian = j.at("lagrangian").get<double>();
      const json& ref = j.at("theta_ref");
      if (!ref.is_null()) {
        const std::size_t k = ref.at("line").get<std::size_t>();
        if (k < 3 || k - 3 >= snapshots.size()) throw ParseError("trace", "theta_ref line out of range");
        r.theta = snapshots[k - 3];
      }
      trace.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError("trace", std::string(kTraceFileName) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

}  // namespace duallearn
