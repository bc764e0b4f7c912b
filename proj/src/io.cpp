#include "lrsdp/io.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lrsdp {

using nlohmann::json;

namespace {

json upper_triangle(const SymMat& S) {
  const Eigen::Index n = S.n();
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) vals.push_back(S(i, j));
  return json(vals);
}

SymMat sym_from_upper(const json& arr, Eigen::Index n, const std::string& field) {
  if (!arr.is_array()) throw SchemaError(field, "expected an array");
  if (static_cast<Eigen::Index>(arr.size()) != n * (n + 1) / 2)
    throw SchemaError(field, "expected " + std::to_string(n * (n + 1) / 2) +
                                 " upper-triangle entries, got " + std::to_string(arr.size()));
  Matrix m(n, n);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (!arr[idx].is_number()) throw SchemaError(field, "non-numeric entry");
      const double v = arr[idx++].get<double>();
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return SymMat(m);
}

json vector_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from(const json& arr, const std::string& field) {
  if (!arr.is_array()) throw SchemaError(field, "expected an array");
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw SchemaError(field, "non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

json matrix_json(const Matrix& m) {
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) vals.push_back(m(i, j));
  return json(vals);
}

Matrix matrix_from(const json& arr, Eigen::Index rows, Eigen::Index cols,
                   const std::string& field) {
  if (!arr.is_array()) throw SchemaError(field, "expected an array");
  if (static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw SchemaError(field, "expected " + std::to_string(rows * cols) + " entries, got " +
                                 std::to_string(arr.size()));
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!arr[idx].is_number()) throw SchemaError(field, "non-numeric entry");
      m(i, j) = arr[idx++].get<double>();
    }
  return m;
}

const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where.empty() ? key : where + "." + key, "missing field");
  return *it;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string instance_to_json_string(const Instance& inst) {
  json j;
  j["name"] = inst.name;
  j["n"] = inst.n;

  json obj;
  switch (inst.objective.kind) {
    case Objective::Kind::Linear:
      obj["kind"] = "linear";
      obj["C"] = upper_triangle(inst.objective.C);
      break;
    case Objective::Kind::QuadDistance:
      obj["kind"] = "quad_distance";
      obj["Y"] = upper_triangle(inst.objective.Y);
      break;
    case Objective::Kind::MatrixSensing: {
      obj["kind"] = "matrix_sensing";
      json vecs = json::array();
      for (const auto& c : inst.objective.sensing) vecs.push_back(vector_json(c));
      obj["vectors"] = std::move(vecs);
      obj["d"] = vector_json(inst.objective.d);
      break;
    }
  }
  j["objective"] = std::move(obj);

  json cons;
  cons["k"] = inst.constraints.k();
  json mats = json::array();
  for (const auto& m : inst.constraints.mats) mats.push_back(upper_triangle(m));
  cons["mats"] = std::move(mats);
  cons["b"] = vector_json(inst.constraints.b);
  j["constraints"] = std::move(cons);

  if (inst.certificate) {
    const Certificate& c = *inst.certificate;
    json cert;
    cert["r_star"] = c.r_star;
    cert["R_star"] = matrix_json(c.R_star);
    cert["y_star"] = vector_json(c.y_star);
    cert["Z_star"] = upper_triangle(c.Z_star);
    j["certificate"] = std::move(cert);
  }
  if (inst.planted_signs) j["planted_signs"] = vector_json(*inst.planted_signs);
  return j.dump(2) + "\n";
}

Instance instance_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("<root>", std::string("invalid JSON: ") + e.what());
  }
  Instance inst;
  inst.name = require(j, "name", "").get<std::string>();
  const auto& nj = require(j, "n", "");
  if (!nj.is_number_integer() || nj.get<long long>() < 1)
    throw SchemaError("n", "expected a positive integer");
  inst.n = nj.get<Eigen::Index>();

  const json& obj = require(j, "objective", "");
  const std::string kind = require(obj, "kind", "objective").get<std::string>();
  if (kind == "linear") {
    inst.objective = Objective::linear(sym_from_upper(require(obj, "C", "objective"), inst.n,
                                                      "objective.C"));
  } else if (kind == "quad_distance") {
    inst.objective = Objective::quadDistance(
        sym_from_upper(require(obj, "Y", "objective"), inst.n, "objective.Y"));
  } else if (kind == "matrix_sensing") {
    const json& vecs = require(obj, "vectors", "objective");
    if (!vecs.is_array()) throw SchemaError("objective.vectors", "expected an array");
    std::vector<Vector> c;
    c.reserve(vecs.size());
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      Vector ci = vector_from(vecs[i], "objective.vectors[" + std::to_string(i) + "]");
      if (ci.size() != inst.n)
        throw SchemaError("objective.vectors[" + std::to_string(i) + "]",
                          "length must equal n");
      c.push_back(std::move(ci));
    }
    Vector d = vector_from(require(obj, "d", "objective"), "objective.d");
    if (d.size() != static_cast<Eigen::Index>(c.size()))
      throw SchemaError("objective.d", "length must equal the number of sensing vectors");
    inst.objective = Objective::matrixSensing(std::move(c), std::move(d));
  } else {
    throw SchemaError("objective.kind", "unknown kind '" + kind + "'");
  }

  const json& cons = require(j, "constraints", "");
  const auto& kj = require(cons, "k", "constraints");
  if (!kj.is_number_integer() || kj.get<long long>() < 1)
    throw SchemaError("constraints.k", "expected a positive integer");
  const Eigen::Index k = kj.get<Eigen::Index>();
  const json& mats = require(cons, "mats", "constraints");
  if (!mats.is_array() || static_cast<Eigen::Index>(mats.size()) != k)
    throw SchemaError("constraints.mats", "expected k matrices");
  std::vector<SymMat> ms;
  ms.reserve(mats.size());
  for (std::size_t i = 0; i < mats.size(); ++i)
    ms.push_back(sym_from_upper(mats[i], inst.n, "constraints.mats[" + std::to_string(i) + "]"));
  Vector b = vector_from(require(cons, "b", "constraints"), "constraints.b");
  if (b.size() != k) throw SchemaError("constraints.b", "length must equal k");
  inst.constraints = LinOpA(std::move(ms), std::move(b));

  if (j.contains("certificate")) {
    const json& cj = j["certificate"];
    Certificate cert;
    const auto& rj = require(cj, "r_star", "certificate");
    if (!rj.is_number_integer() || rj.get<long long>() < 1 || rj.get<long long>() > inst.n)
      throw SchemaError("certificate.r_star", "expected an integer in [1, n]");
    cert.r_star = rj.get<int>();
    cert.R_star = matrix_from(require(cj, "R_star", "certificate"), inst.n, cert.r_star,
                              "certificate.R_star");
    cert.y_star = vector_from(require(cj, "y_star", "certificate"), "certificate.y_star");
    if (cert.y_star.size() != k)
      throw SchemaError("certificate.y_star", "length must equal k");
    cert.Z_star = sym_from_upper(require(cj, "Z_star", "certificate"), inst.n,
                                 "certificate.Z_star");
    inst.certificate = std::move(cert);
  }
  if (j.contains("planted_signs")) {
    Vector s = vector_from(j["planted_signs"], "planted_signs");
    if (s.size() != inst.n) throw SchemaError("planted_signs", "length must equal n");
    inst.planted_signs = std::move(s);
  }
  return inst;
}

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_instance: cannot open '" + path + "'");
  out << instance_to_json_string(inst);
  if (!out) throw std::runtime_error("save_instance: write failed for '" + path + "'");
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_instance: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return instance_from_json_string(ss.str());
}

namespace {

void write_trace(std::ofstream& out, const std::string* method,
                 const std::vector<TraceRecord>& trace) {
  if (method) out << "method,";
  out << "iter,phi,f_val,feas,grad_map_norm,dist_to_solution,inner_iters,wall_time\n";
  for (const auto& r : trace) {
    if (method) out << *method << ",";
    out << r.iter << "," << format17(r.phi) << "," << format17(r.f_val) << ","
        << format17(r.feas) << "," << format17(r.grad_map_norm) << ",";
    if (r.dist_to_solution) out << format17(*r.dist_to_solution);
    out << "," << r.inner_iters << "," << format17(r.wall_time) << "\n";
  }
}

}  // namespace

void trace_to_csv(const std::vector<TraceRecord>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trace_to_csv: cannot open '" + path + "'");
  write_trace(out, nullptr, trace);
  if (!out) throw std::runtime_error("trace_to_csv: write failed for '" + path + "'");
}

void trace_to_csv(const std::string& method, const std::vector<TraceRecord>& trace,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trace_to_csv: cannot open '" + path + "'");
  write_trace(out, &method, trace);
  if (!out) throw std::runtime_error("trace_to_csv: write failed for '" + path + "'");
}

std::vector<TraceRecord> trace_from_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("trace_from_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("header", "empty trace file");
  const bool has_method = line.rfind("method,", 0) == 0;
  std::vector<TraceRecord> trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < static_cast<std::size_t>(has_method ? 9 : 8)) cells.emplace_back();
    std::size_t at = has_method ? 1 : 0;
    TraceRecord r;
    r.iter = std::stoi(cells[at++]);
    r.phi = std::stod(cells[at++]);
    r.f_val = std::stod(cells[at++]);
    r.feas = std::stod(cells[at++]);
    r.grad_map_norm = std::stod(cells[at++]);
    if (!cells[at].empty()) r.dist_to_solution = std::stod(cells[at]);
    ++at;
    r.inner_iters = std::stoi(cells[at++]);
    r.wall_time = std::stod(cells[at++]);
    trace.push_back(std::move(r));
  }
  return trace;
}

void save_factor(const Factor& R, const std::string& path) {
  json j;
  j["n"] = R.rows();
  j["r"] = R.cols();
  j["entries"] = matrix_json(R);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_factor: cannot open '" + path + "'");
  out << j.dump(2) << "\n";
}

Factor load_factor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_factor: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError("<root>", std::string("invalid JSON: ") + e.what());
  }
  const Eigen::Index n = require(j, "n", "").get<Eigen::Index>();
  const Eigen::Index r = require(j, "r", "").get<Eigen::Index>();
  if (n < 1 || r < 1 || r > n) throw SchemaError("r", "need 1 <= r <= n");
  return matrix_from(require(j, "entries", ""), n, r, "entries");
}

void save_manifest(const RunManifest& m, const std::string& path) {
  json j;
  j["command"] = m.command;
  j["params"] = m.params;
  j["seed"] = m.seed;
  j["timestamp"] = m.timestamp.empty() ? iso_timestamp() : m.timestamp;
  j["version"] = m.version;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_manifest: cannot open '" + path + "'");
  out << j.dump(2) << "\n";
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_manifest: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError("<root>", std::string("invalid JSON: ") + e.what());
  }
  RunManifest m;
  m.command = require(j, "command", "").get<std::string>();
  if (j.contains("params")) m.params = j["params"].get<std::map<std::string, std::string>>();
  if (j.contains("seed")) m.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("timestamp")) m.timestamp = j["timestamp"].get<std::string>();
  if (j.contains("version")) m.version = j["version"].get<std::string>();
  if (j.contains("inputs")) m.inputs = j["inputs"].get<std::vector<std::string>>();
  if (j.contains("outputs")) m.outputs = j["outputs"].get<std::vector<std::string>>();
  return m;
}

}  // namespace lrsdp
