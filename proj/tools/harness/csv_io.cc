#include "harness/csv_io.h"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace totalctl::harness {
namespace {

const char* kind_name(IntervalKind kind) {
  switch (kind) {
    case IntervalKind::kHistory: return "history";
    case IntervalKind::kImpulse: return "impulse";
    case IntervalKind::kControl: break;
  }
  return "control";
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path + ": " + std::strerror(errno));
  }
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

char side_of(int i, int last) {
  if (i == 0) return 'R';
  return i == last ? 'L' : 'I';
}

void append_columns(std::string& line, const Eigen::Ref<const Eigen::VectorXd>& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    line += ',';
    line += number(v(k));
  }
}

}  // namespace

void write_trajectory_csv(const std::string& path, const PiecewiseTrajectory& traj,
                          const ControlSignal* control, bool include_history) {
  std::ofstream out = open_for_write(path);
  const int dim = traj.dim();
  const int cdim = control ? control->dim() : 0;
  if (control && control->pieces.size() != traj.pieces().size()) {
    throw std::invalid_argument("write_trajectory_csv: control layout differs");
  }

  std::string line = "t,window_kind,side";
  for (int i = 0; i < dim; ++i) line += ",x" + std::to_string(i);
  for (int i = 0; i < cdim; ++i) line += ",u" + std::to_string(i);
  out << line << '\n';

  if (include_history) {
    const auto& h = traj.history();
    const int last = static_cast<int>(h.cols()) - 1;
    for (int i = 0; i <= last; ++i) {
      const double t = i == last ? 0.0 : -traj.delay() + traj.delay() * i / last;
      line = number(t) + ",history," + (i == last ? "L" : "I");
      append_columns(line, h.col(i));
      for (int k = 0; k < cdim; ++k) line += ",0";
      out << line << '\n';
    }
  }
  for (std::size_t p = 0; p < traj.pieces().size(); ++p) {
    const auto& piece = traj.pieces()[p];
    const int last = piece.steps();
    for (int i = 0; i <= last; ++i) {
      line = number(piece.time(i)) + "," + kind_name(piece.interval.kind) + "," +
             side_of(i, last);
      append_columns(line, piece.values.col(i));
      if (control) append_columns(line, control->pieces[p].values.col(i));
      out << line << '\n';
    }
  }
  finish(out, path);
}

void write_control_csv(const std::string& path, const ControlSignal& control) {
  std::ofstream out = open_for_write(path);
  std::string line = "t,window_kind,side";
  for (int i = 0; i < control.dim(); ++i) line += ",u" + std::to_string(i);
  out << line << '\n';
  for (const auto& piece : control.pieces) {
    const int last = piece.steps();
    for (int i = 0; i <= last; ++i) {
      line = number(piece.time(i)) + "," + kind_name(piece.interval.kind) + "," +
             side_of(i, last);
      append_columns(line, piece.values.col(i));
      out << line << '\n';
    }
  }
  finish(out, path);
}

CsvTable read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.header.push_back(cell);
  }
  int dim = 0, cdim = 0;
  for (const auto& name : table.header) {
    if (name.size() > 1 && name[0] == 'x') ++dim;
    if (name.size() > 1 && name[0] == 'u') ++cdim;
  }
  if (table.header.size() != static_cast<std::size_t>(3 + dim + cdim)) {
    throw std::runtime_error(path + ": unexpected header");
  }

  std::vector<std::vector<double>> states, controls;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream cells(line);
    std::string cell;
    std::vector<std::string> parts;
    while (std::getline(cells, cell, ',')) parts.push_back(cell);
    if (parts.size() != table.header.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(row) + " has the wrong width");
    }
    table.time.push_back(std::stod(parts[0]));
    table.kind.push_back(parts[1]);
    table.side.push_back(parts[2]);
    std::vector<double> x, u;
    for (int k = 0; k < dim; ++k) x.push_back(std::stod(parts[3 + k]));
    for (int k = 0; k < cdim; ++k) u.push_back(std::stod(parts[3 + dim + k]));
    states.push_back(std::move(x));
    controls.push_back(std::move(u));
  }
  const auto rows = static_cast<Eigen::Index>(states.size());
  table.states.resize(dim, rows);
  table.controls.resize(cdim, cdim ? rows : 0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (int k = 0; k < dim; ++k) table.states(k, r) = states[r][k];
    for (int k = 0; k < cdim; ++k) table.controls(k, r) = controls[r][k];
  }
  return table;
}

double csv_pc_norm(const CsvTable& table, const StateNorm& norm) {
  double sup = 0.0;
  for (std::size_t r = 0; r < table.kind.size(); ++r) {
    if (table.kind[r] == "history") continue;
    sup = std::max(sup, norm(table.states.col(static_cast<Eigen::Index>(r))));
  }
  return sup;
}

}  // namespace totalctl::harness
