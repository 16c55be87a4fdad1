#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "totalctl/mild_solver.h"

namespace totalctl::harness {

/// Columns: t, window_kind, side, x0.., u0... One row per stored sample.
/// side is R for the right limit at an interval start, L for the value at
/// an interval end, I otherwise; breakpoints therefore appear twice.
void write_trajectory_csv(const std::string& path, const PiecewiseTrajectory& traj,
                          const ControlSignal* control, bool include_history = true);

/// Columns: t, window_kind, side, u0...
void write_control_csv(const std::string& path, const ControlSignal& control);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<double> time;
  std::vector<std::string> kind;
  std::vector<std::string> side;
  Eigen::MatrixXd states;    ///< One column per row of the file.
  Eigen::MatrixXd controls;  ///< Empty when the file carries no control.
};

/// Reads a trajectory CSV written by write_trajectory_csv.
CsvTable read_trajectory_csv(const std::string& path);

/// Largest state norm over the non-history rows.
double csv_pc_norm(const CsvTable& table, const StateNorm& norm);

}  // namespace totalctl::harness
