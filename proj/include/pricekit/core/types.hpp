#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace pricekit {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
/// Compressed sparse row storage, used for every sparse matrix in the library.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Largest exponent argument accepted before we report an overflow.
inline constexpr double kMaxExponent = 700.0;

enum class ErrorCode {
  DimensionMismatch,
  NonFinite,
  ExponentOverflow,
  InvalidArgument,
  PreconditionViolated,
  TooLarge,
  UnknownName,
  Infeasible,
  Io,
  Parse,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::ExponentOverflow: return "exponent overflow";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::PreconditionViolated: return "precondition violated";
    case ErrorCode::TooLarge: return "problem too large";
    case ErrorCode::UnknownName: return "unknown name";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
  }
  return "error";
}

/// Structured error carrying a code and, where it applies, the offending index.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<Index> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<Index> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<Index> index_;
};

inline void require(bool condition, ErrorCode code, const std::string& what,
                    std::optional<Index> index = std::nullopt) {
  if (!condition) throw Error(code, what, index);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline bool all_finite(const SparseMatrix& m) {
  for (Index k = 0; k < m.nonZeros(); ++k) {
    if (!std::isfinite(m.valuePtr()[k])) return false;
  }
  return true;
}

}  // namespace pricekit
