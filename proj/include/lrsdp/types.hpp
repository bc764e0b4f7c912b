#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lrsdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A factor R in R^{n x r} representing the PSD matrix R*R^T implicitly.
// Plain dense storage; shape checks happen at operation boundaries.
using Factor = Eigen::MatrixXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& field, const std::string& what)
      : std::runtime_error("schema error at '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense symmetric matrix. Symmetry is enforced on construction by the
// (M + M^T)/2 projection, so entries(i,j) == entries(j,i) holds exactly.
class SymMat {
 public:
  SymMat() = default;

  explicit SymMat(const Matrix& m) {
    if (m.rows() != m.cols()) {
      throw DimensionError("SymMat: input must be square, got " + std::to_string(m.rows()) +
                           "x" + std::to_string(m.cols()));
    }
    if (!m.allFinite()) throw std::invalid_argument("SymMat: entries must be finite");
    m_ = 0.5 * (m + m.transpose());
  }

  static SymMat Zero(Eigen::Index n) { return SymMat(Matrix::Zero(n, n)); }
  static SymMat Identity(Eigen::Index n) { return SymMat(Matrix::Identity(n, n)); }

  Eigen::Index n() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double frobeniusNorm() const { return m_.norm(); }

 private:
  Matrix m_;
};

// Extremal eigenpair with its self-reported backward error.
struct EigPair {
  double value = 0.0;
  Vector vector;
  double residual = 0.0;  // ||S v - value * v||_2
};

class EigSolveError : public std::runtime_error {
 public:
  EigSolveError(const std::string& what, EigPair best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const EigPair& best() const { return best_; }

 private:
  EigPair best_;
};

class OpNormError : public std::runtime_error {
 public:
  OpNormError(const std::string& what, double last_estimate)
      : std::runtime_error(what), last_estimate_(last_estimate) {}
  double lastEstimate() const { return last_estimate_; }

 private:
  double last_estimate_;
};

class CgError : public std::runtime_error {
 public:
  CgError(const std::string& what, Matrix best, double residual)
      : std::runtime_error(what), best_(std::move(best)), residual_(residual) {}
  const Matrix& best() const { return best_; }
  double residual() const { return residual_; }

 private:
  Matrix best_;
  double residual_;
};

}  // namespace lrsdp
