#pragma once

#include <map>
#include <string>
#include <vector>

#include "lrsdp/prox_linear.hpp"

namespace lrsdp {

inline constexpr const char* kVersion = "0.1.0";

// Instance files are JSON with symmetric matrices stored as row-major upper
// triangles. Round trips reproduce every numeric field exactly.
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

std::string instance_to_json_string(const Instance& inst);
Instance instance_from_json_string(const std::string& text);

// Trace CSV: header
//   iter,phi,f_val,feas,grad_map_norm,dist_to_solution,inner_iters,wall_time
// with empty optional fields serialized as the empty string. Values use 17
// significant digits. The three-argument form prepends a method column.
void trace_to_csv(const std::vector<TraceRecord>& trace, const std::string& path);
void trace_to_csv(const std::string& method, const std::vector<TraceRecord>& trace,
                  const std::string& path);
std::vector<TraceRecord> trace_from_csv(const std::string& path);

// Factor files (JSON, row-major entries).
void save_factor(const Factor& R, const std::string& path);
Factor load_factor(const std::string& path);

// Every CLI command writes one of these next to its outputs; rerunning a
// manifest reproduces the outputs byte for byte.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  std::string timestamp;
  std::string version = kVersion;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};
void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

}  // namespace lrsdp
