#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "totalctl/trajectory.h"

namespace totalctl {

/// Evaluator for a strongly continuous semigroup T(t) and its adjoint on a
/// finite-dimensional state space. Implementations are immutable and safe
/// for concurrent read-only use.
class SemigroupOperator {
 public:
  virtual ~SemigroupOperator() = default;

  virtual int dim() const = 0;
  /// Declared uniform bound K >= 1 on ||T(t)|| over the horizon.
  virtual double declared_bound() const = 0;
  /// Inner product the adjoint is taken with respect to.
  virtual StateNorm norm() const = 0;

  /// T(t) v. Throws std::invalid_argument for t < 0 or a size mismatch.
  virtual State apply(double t, const State& v) const = 0;
  /// T(t)* v.
  virtual State apply_adjoint(double t, const State& v) const = 0;
  /// Dense representation of T(t) in state coordinates.
  virtual Eigen::MatrixXd matrix(double t) const = 0;

  /// The generator matrix, when the backend has one.
  virtual std::optional<Eigen::MatrixXd> generator() const { return std::nullopt; }

  /// Whether T(h)^k reproduces T(kh) to round-off for every step h.
  virtual bool composes_exactly() const = 0;

  /// Spectral norm of T(t).
  double operator_norm(double t) const;

 protected:
  void check_arguments(double t, const State& v) const;
};

/// T(t) = exp(tA) for a dense generator A; adjoint exp(tA^T).
class MatrixExponentialSemigroup final : public SemigroupOperator {
 public:
  explicit MatrixExponentialSemigroup(Eigen::MatrixXd generator,
                                      double declared_bound = 1.0);

  int dim() const override { return static_cast<int>(generator_.rows()); }
  double declared_bound() const override { return declared_bound_; }
  StateNorm norm() const override { return StateNorm{}; }
  State apply(double t, const State& v) const override;
  State apply_adjoint(double t, const State& v) const override;
  Eigen::MatrixXd matrix(double t) const override;
  std::optional<Eigen::MatrixXd> generator() const override { return generator_; }
  bool composes_exactly() const override { return true; }

 private:
  Eigen::MatrixXd generator_;
  double declared_bound_;
};

/// Left shift (T(t)v)(x) = v(x + t), zero once x + t reaches pi, on the
/// nodes x_i = i*pi/N, i = 0..N-1 (the endpoint pi, where v vanishes, is not
/// stored). Off-grid shifts interpolate linearly. The inner product uses
/// uniform weights pi/N, so the adjoint is the transposed right shift.
class ShiftSemigroup final : public SemigroupOperator {
 public:
  explicit ShiftSemigroup(int nodes);

  int dim() const override { return nodes_; }
  double declared_bound() const override { return 1.0; }
  StateNorm norm() const override { return StateNorm(spacing()); }
  State apply(double t, const State& v) const override;
  State apply_adjoint(double t, const State& v) const override;
  Eigen::MatrixXd matrix(double t) const override;
  bool composes_exactly() const override { return false; }

  double spacing() const;
  double node(int i) const { return spacing() * i; }

 private:
  struct Split {
    int whole;
    double frac;
  };
  Split split(double t) const;

  int nodes_;
};

/// Largest operator norm of T over the given time samples.
double growth_bound(const SemigroupOperator& op, std::span<const double> grid);

/// T(k * step) for k = 0..count, tabulated up front when the backend is a
/// dense exponential and evaluated on demand otherwise. Holds a reference
/// to `op`, which must outlive the table.
class PropagatorTable {
 public:
  PropagatorTable(const SemigroupOperator& op, double step, int count);

  int count() const { return count_; }
  double step() const { return step_; }
  State apply(int k, const State& v) const;
  State apply_adjoint(int k, const State& v) const;
  Eigen::MatrixXd matrix(int k) const;

 private:
  void check(int k) const;

  const SemigroupOperator* op_;
  double step_;
  int count_;
  std::vector<Eigen::MatrixXd> table_;
};

}  // namespace totalctl
