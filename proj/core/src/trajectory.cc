#include "totalctl/trajectory.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace totalctl {
namespace {

State lerp_columns(const Eigen::MatrixXd& values, double position) {
  const int last = static_cast<int>(values.cols()) - 1;
  if (position <= 0.0) return values.col(0);
  if (position >= last) return values.col(last);
  const int i0 = std::min(static_cast<int>(std::floor(position)), last - 1);
  const double frac = position - i0;
  if (frac == 0.0) return values.col(i0);
  return (1.0 - frac) * values.col(i0) + frac * values.col(i0 + 1);
}

}  // namespace

StateNorm::StateNorm(double weight) : weight_(weight) {
  if (!(weight > 0.0)) throw std::invalid_argument("StateNorm: weight <= 0");
}

double StateNorm::operator()(const Eigen::Ref<const State>& v) const {
  return std::sqrt(weight_) * v.norm();
}

double StateNorm::inner(const Eigen::Ref<const State>& a,
                        const Eigen::Ref<const State>& b) const {
  return weight_ * a.dot(b);
}

HistorySegment::HistorySegment(Eigen::MatrixXd samples, double delay,
                               StateNorm norm)
    : samples_(std::move(samples)), delay_(delay), norm_(norm) {
  if (!(delay_ > 0.0)) {
    throw std::invalid_argument("HistorySegment: delay must be positive");
  }
  if (samples_.cols() < 2 || samples_.rows() < 1) {
    throw std::invalid_argument("HistorySegment: need at least two samples");
  }
}

double HistorySegment::offset(int i) const {
  return -delay_ + delay_ * static_cast<double>(i) / grid_intervals();
}

State HistorySegment::at(double offset) const {
  return lerp_columns(samples_, (offset + delay_) / delay_ * grid_intervals());
}

HistorySegment HistorySegment::operator-(const HistorySegment& other) const {
  if (other.samples_.rows() != samples_.rows() ||
      other.samples_.cols() != samples_.cols() || other.delay_ != delay_) {
    throw std::invalid_argument("HistorySegment: layout mismatch");
  }
  return HistorySegment(samples_ - other.samples_, delay_, norm_);
}

double d_norm(const HistorySegment& segment) {
  const int h = segment.grid_intervals();
  const double dk = segment.delay() / h;
  double sum = 0.0;
  for (int i = 0; i <= h; ++i) {
    const double w = (i == 0 || i == h) ? 0.5 : 1.0;
    sum += w * segment.norm()(segment.samples().col(i));
  }
  return sum * dk / segment.delay();
}

double TrajectoryPiece::time(int i) const {
  if (i == steps()) return interval.end;
  return interval.start + interval.length() * static_cast<double>(i) / steps();
}

PiecewiseTrajectory::PiecewiseTrajectory(double delay, Eigen::MatrixXd history,
                                         std::vector<TrajectoryPiece> pieces,
                                         StateNorm norm)
    : delay_(delay),
      history_(std::move(history)),
      pieces_(std::move(pieces)),
      norm_(norm) {
  if (!(delay_ > 0.0)) {
    throw std::invalid_argument("PiecewiseTrajectory: delay must be positive");
  }
  if (history_.cols() < 2) {
    throw std::invalid_argument("PiecewiseTrajectory: history needs >= 2 samples");
  }
  if (pieces_.empty()) {
    throw std::invalid_argument("PiecewiseTrajectory: no pieces");
  }
  double previous_end = 0.0;
  for (const auto& piece : pieces_) {
    if (piece.values.rows() != history_.rows() || piece.values.cols() < 2) {
      throw std::invalid_argument("PiecewiseTrajectory: malformed piece");
    }
    if (piece.interval.start != previous_end ||
        !(piece.interval.end > piece.interval.start)) {
      throw std::invalid_argument("PiecewiseTrajectory: pieces must tile (0, b]");
    }
    if (!piece.values.allFinite()) {
      throw std::invalid_argument("PiecewiseTrajectory: non-finite sample");
    }
    previous_end = piece.interval.end;
  }
  if (!history_.allFinite()) {
    throw std::invalid_argument("PiecewiseTrajectory: non-finite history");
  }
}

State PiecewiseTrajectory::evaluate_history(double t) const {
  return lerp_columns(history_, (t + delay_) / delay_ * history_intervals());
}

State PiecewiseTrajectory::evaluate_piece(const TrajectoryPiece& piece,
                                          double t) const {
  return lerp_columns(piece.values, (t - piece.interval.start) / piece.step());
}

State PiecewiseTrajectory::operator()(double t) const {
  if (t < -delay_ || t > horizon() || std::isnan(t)) {
    throw std::invalid_argument("PiecewiseTrajectory: time outside [-delay, b]");
  }
  if (t <= 0.0) return evaluate_history(t);
  // First piece whose end is >= t: the left-limit convention.
  auto it = std::lower_bound(
      pieces_.begin(), pieces_.end(), t,
      [](const TrajectoryPiece& p, double value) { return p.interval.end < value; });
  return evaluate_piece(*it, t);
}

State PiecewiseTrajectory::right_limit(double t) const {
  if (t < 0.0 || t > horizon()) {
    throw std::invalid_argument("PiecewiseTrajectory: right limit outside [0, b]");
  }
  if (t == horizon()) return (*this)(t);
  auto it = std::upper_bound(
      pieces_.begin(), pieces_.end(), t,
      [](double value, const TrajectoryPiece& p) { return value < p.interval.end; });
  return evaluate_piece(*it, t);
}

bool PiecewiseTrajectory::same_layout(const PiecewiseTrajectory& other) const {
  if (delay_ != other.delay_ || history_.rows() != other.history_.rows() ||
      history_.cols() != other.history_.cols() ||
      pieces_.size() != other.pieces_.size()) {
    return false;
  }
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const auto& a = pieces_[k];
    const auto& b = other.pieces_[k];
    if (a.interval.start != b.interval.start || a.interval.end != b.interval.end ||
        a.values.cols() != b.values.cols()) {
      return false;
    }
  }
  return true;
}

PiecewiseTrajectory PiecewiseTrajectory::operator-(
    const PiecewiseTrajectory& other) const {
  if (!same_layout(other)) {
    throw std::invalid_argument("PiecewiseTrajectory: layout mismatch");
  }
  std::vector<TrajectoryPiece> pieces = pieces_;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    pieces[k].values -= other.pieces_[k].values;
  }
  return PiecewiseTrajectory(delay_, history_ - other.history_, std::move(pieces),
                             norm_);
}

PiecewiseTrajectory PiecewiseTrajectory::operator*(double scale) const {
  std::vector<TrajectoryPiece> pieces = pieces_;
  for (auto& piece : pieces) piece.values *= scale;
  return PiecewiseTrajectory(delay_, history_ * scale, std::move(pieces), norm_);
}

HistorySegment history_segment(const PiecewiseTrajectory& traj, double t) {
  if (!(t >= 0.0 && t <= traj.horizon())) {
    throw std::invalid_argument("history_segment: t outside [0, b]");
  }
  const int h = traj.history_intervals();
  const double delay = traj.delay();
  Eigen::MatrixXd samples(traj.dim(), h + 1);
  for (int i = 0; i <= h; ++i) {
    const double offset = (i == h) ? 0.0 : -delay + delay * i / h;
    double s = t + offset;
    if (s < -delay) s = -delay;
    samples.col(i) = traj(s);
  }
  return HistorySegment(std::move(samples), delay, traj.norm());
}

double pc_norm(const PiecewiseTrajectory& traj) {
  double sup = 0.0;
  for (const auto& piece : traj.pieces()) {
    for (Eigen::Index i = 0; i < piece.values.cols(); ++i) {
      sup = std::max(sup, traj.norm()(piece.values.col(i)));
    }
  }
  return sup;
}

}  // namespace totalctl
