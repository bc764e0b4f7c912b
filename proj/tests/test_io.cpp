#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lrsdp/generators.hpp"
#include "lrsdp/io.hpp"

using namespace lrsdp;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("instance round trip is exact") {
  auto [inst, cert] = gen_random_quadratics(9, 2, 5, 0.3, 11);
  const std::string first = instance_to_json_string(inst);
  const Instance reloaded = instance_from_json_string(first);
  CHECK(instance_to_json_string(reloaded) == first);

  CHECK(reloaded.n == inst.n);
  CHECK(reloaded.objective.Y.mat() == inst.objective.Y.mat());
  CHECK(reloaded.constraints.b == inst.constraints.b);
  REQUIRE(reloaded.certificate.has_value());
  CHECK(reloaded.certificate->R_star == inst.certificate->R_star);
  CHECK(reloaded.certificate->Z_star.mat() == inst.certificate->Z_star.mat());

  const std::string path = temp_path("lrsdp_roundtrip.json");
  save_instance(inst, path);
  const Instance from_file = load_instance(path);
  CHECK(instance_to_json_string(from_file) == first);
  std::remove(path.c_str());
}

TEST_CASE("sensing and z2 instances round trip") {
  auto [sense, cert] = gen_matrix_sensing(7, 2, 20, 4);
  const std::string s = instance_to_json_string(sense);
  CHECK(instance_to_json_string(instance_from_json_string(s)) == s);

  auto [z2, signs] = gen_z2_sync(6, 1.2, 5);
  const std::string z = instance_to_json_string(z2);
  const Instance z2_back = instance_from_json_string(z);
  CHECK(instance_to_json_string(z2_back) == z);
  REQUIRE(z2_back.planted_signs.has_value());
  CHECK(*z2_back.planted_signs == signs);
}

TEST_CASE("schema errors name the offending field") {
  auto [inst, cert] = gen_maxcut_planted(5, 1, 2);
  std::string text = instance_to_json_string(inst);

  // Remove the "b" field from constraints.
  const auto pos = text.find("\"b\":");
  REQUIRE(pos != std::string::npos);
  const auto end = text.find("]", pos);
  text.erase(pos, end - pos + 2);
  try {
    instance_from_json_string(text);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "constraints.b");
  }

  CHECK_THROWS_AS(instance_from_json_string("{\"name\": 3"), SchemaError);
  CHECK_THROWS_AS(instance_from_json_string("{}"), SchemaError);
}

TEST_CASE("n=50 maxcut file stays small") {
  auto [inst, cert] = gen_maxcut_planted(50, 2, 6);
  const std::string text = instance_to_json_string(inst);
  CHECK(text.size() < 5u * 1024u * 1024u);
}

TEST_CASE("trace csv") {
  const std::string path = temp_path("lrsdp_trace.csv");

  trace_to_csv({}, path);
  CHECK(slurp(path) ==
        "iter,phi,f_val,feas,grad_map_norm,dist_to_solution,inner_iters,wall_time\n");

  std::vector<TraceRecord> trace(3);
  trace[0] = TraceRecord{0, 1.25, 1.0, 0.25, 3.5, std::nullopt, 10, 0.125};
  trace[1] = TraceRecord{1, 0.7531975913, 0.5, 0.2531975913, 1.0 / 3.0, 0.9, 12, 0.25};
  trace[2] = TraceRecord{2, 0.5, 0.5, 1e-300, 1e-17, 2e-16, 7, 0.5};
  trace_to_csv(trace, path);
  const std::string text = slurp(path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);

  const auto parsed = trace_from_csv(path);
  REQUIRE(parsed.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(parsed[i].iter == trace[i].iter);
    CHECK(parsed[i].phi == trace[i].phi);
    CHECK(parsed[i].feas == trace[i].feas);
    CHECK(parsed[i].grad_map_norm == trace[i].grad_map_norm);
    CHECK(parsed[i].dist_to_solution.has_value() == trace[i].dist_to_solution.has_value());
    if (parsed[i].dist_to_solution)
      CHECK(*parsed[i].dist_to_solution == *trace[i].dist_to_solution);
    CHECK(parsed[i].inner_iters == trace[i].inner_iters);
    CHECK(parsed[i].wall_time == trace[i].wall_time);
  }

  trace_to_csv("pgd", trace, path);
  const std::string with_method = slurp(path);
  CHECK(with_method.rfind("method,iter,", 0) == 0);
  CHECK(trace_from_csv(path).size() == 3);
  std::remove(path.c_str());
}

TEST_CASE("factor files") {
  const std::string path = temp_path("lrsdp_factor.json");
  Factor R(3, 2);
  R << 1.5, -2.25, 0.125, 3.0, 1e-17, -0.75;
  save_factor(R, path);
  CHECK(load_factor(path) == R);
  std::remove(path.c_str());
}

TEST_CASE("manifest round trip") {
  const std::string path = temp_path("lrsdp_manifest.json");
  RunManifest m;
  m.command = "solve";
  m.params = {{"instance", "inst.json"}, {"lambda", "100"}, {"out", "trace.csv"}};
  m.seed = 17;
  m.inputs = {"inst.json"};
  m.outputs = {"trace.csv"};
  save_manifest(m, path);
  const RunManifest back = load_manifest(path);
  CHECK(back.command == m.command);
  CHECK(back.params == m.params);
  CHECK(back.seed == m.seed);
  CHECK(back.inputs == m.inputs);
  CHECK(back.outputs == m.outputs);
  CHECK(!back.timestamp.empty());
  std::remove(path.c_str());
}
