#include "totalctl/semigroup.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace totalctl {

double SemigroupOperator::operator_norm(double t) const {
  const Eigen::MatrixXd m = matrix(t);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

void SemigroupOperator::check_arguments(double t, const State& v) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("semigroup: time must be finite and >= 0");
  }
  if (v.size() != dim()) {
    throw std::invalid_argument("semigroup: state dimension mismatch");
  }
}

MatrixExponentialSemigroup::MatrixExponentialSemigroup(Eigen::MatrixXd generator,
                                                       double declared_bound)
    : generator_(std::move(generator)), declared_bound_(declared_bound) {
  if (generator_.rows() != generator_.cols() || generator_.rows() == 0) {
    throw std::invalid_argument("MatrixExponentialSemigroup: generator must be square");
  }
  if (!generator_.allFinite()) {
    throw std::invalid_argument("MatrixExponentialSemigroup: non-finite generator");
  }
  if (!(declared_bound_ >= 1.0)) {
    throw std::invalid_argument("MatrixExponentialSemigroup: declared bound K must be >= 1");
  }
}

Eigen::MatrixXd MatrixExponentialSemigroup::matrix(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("semigroup: time must be finite and >= 0");
  }
  if (t == 0.0) return Eigen::MatrixXd::Identity(dim(), dim());
  return (t * generator_).exp();
}

State MatrixExponentialSemigroup::apply(double t, const State& v) const {
  check_arguments(t, v);
  if (t == 0.0) return v;
  return matrix(t) * v;
}

State MatrixExponentialSemigroup::apply_adjoint(double t, const State& v) const {
  check_arguments(t, v);
  if (t == 0.0) return v;
  return matrix(t).transpose() * v;
}

ShiftSemigroup::ShiftSemigroup(int nodes) : nodes_(nodes) {
  if (nodes < 4) throw std::invalid_argument("ShiftSemigroup: need N >= 4 nodes");
}

double ShiftSemigroup::spacing() const { return std::numbers::pi / nodes_; }

ShiftSemigroup::Split ShiftSemigroup::split(double t) const {
  const double s = t / spacing();
  const double nearest = std::round(s);
  if (std::abs(s - nearest) <= 1e-10 * std::max(1.0, s)) {
    return {static_cast<int>(std::min(nearest, 2.0 * nodes_)), 0.0};
  }
  const double whole = std::floor(s);
  return {static_cast<int>(std::min(whole, 2.0 * nodes_)), s - whole};
}

State ShiftSemigroup::apply(double t, const State& v) const {
  check_arguments(t, v);
  const auto [c, r] = split(t);
  State out = State::Zero(nodes_);
  for (int i = 0; i < nodes_; ++i) {
    const int k = i + c;
    if (k < nodes_) out(i) += (1.0 - r) * v(k);
    if (r != 0.0 && k + 1 < nodes_) out(i) += r * v(k + 1);
  }
  return out;
}

State ShiftSemigroup::apply_adjoint(double t, const State& v) const {
  check_arguments(t, v);
  const auto [c, r] = split(t);
  State out = State::Zero(nodes_);
  for (int i = 0; i < nodes_; ++i) {
    const int k = i + c;
    if (k < nodes_) out(k) += (1.0 - r) * v(i);
    if (r != 0.0 && k + 1 < nodes_) out(k + 1) += r * v(i);
  }
  return out;
}

Eigen::MatrixXd ShiftSemigroup::matrix(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("semigroup: time must be finite and >= 0");
  }
  const auto [c, r] = split(t);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nodes_, nodes_);
  for (int i = 0; i < nodes_; ++i) {
    const int k = i + c;
    if (k < nodes_) m(i, k) += 1.0 - r;
    if (r != 0.0 && k + 1 < nodes_) m(i, k + 1) += r;
  }
  return m;
}

double growth_bound(const SemigroupOperator& op, std::span<const double> grid) {
  double bound = 0.0;
  for (double t : grid) bound = std::max(bound, op.operator_norm(t));
  return bound;
}

PropagatorTable::PropagatorTable(const SemigroupOperator& op, double step,
                                 int count)
    : op_(&op), step_(step), count_(count) {
  if (!(step > 0.0) || count < 0) {
    throw std::invalid_argument("PropagatorTable: need step > 0 and count >= 0");
  }
  if (op.generator().has_value()) {
    table_.reserve(count + 1);
    for (int k = 0; k <= count; ++k) table_.push_back(op.matrix(k * step));
  }
}

void PropagatorTable::check(int k) const {
  if (k < 0 || k > count_) throw std::out_of_range("PropagatorTable: index");
}

State PropagatorTable::apply(int k, const State& v) const {
  check(k);
  if (!table_.empty()) return table_[k] * v;
  return op_->apply(k * step_, v);
}

State PropagatorTable::apply_adjoint(int k, const State& v) const {
  check(k);
  if (!table_.empty()) return table_[k].transpose() * v;
  return op_->apply_adjoint(k * step_, v);
}

Eigen::MatrixXd PropagatorTable::matrix(int k) const {
  check(k);
  if (!table_.empty()) return table_[k];
  return op_->matrix(k * step_);
}

}  // namespace totalctl
