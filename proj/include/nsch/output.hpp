#pragma once

#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsch/diagnostics.hpp"
#include "nsch/grid.hpp"
#include "nsch/state.hpp"

namespace nsch {

inline constexpr const char* kTimeseriesHeader =
    "time,mass,momentum,chi_mass,energy,sup_rho,sup_u,sup_chi,chi_min,chi_max,rho_min,rho_max,"
    "psi_min,psi_max,picard_iters";
inline constexpr const char* kSnapshotHeader = "x,rho,u,chi,mu";

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

/// Parses a full string as a double; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);

void write_timeseries(std::span<const DiagnosticsRecord> records, std::ostream& out);
/// Throws std::runtime_error naming the path on I/O failure.
void write_timeseries(std::span<const DiagnosticsRecord> records, const std::string& path);

/// Appends one CSV row to an already open stream; used for streaming output.
void write_timeseries_row(const DiagnosticsRecord& record, std::ostream& out);

/// Cell centers, fields and the chemical potential.
void write_snapshot(const State& state, const Params& params, const Grid& grid,
                    std::ostream& out);
void write_snapshot(const State& state, const Params& params, const Grid& grid,
                    const std::string& path);

struct Snapshot {
  std::vector<double> x;
  State state;
  std::vector<double> mu;
};

/// Reads a snapshot written by write_snapshot. The time field is left at 0.
Snapshot read_snapshot(const std::string& path);
Snapshot read_snapshot(std::istream& in);

std::vector<DiagnosticsRecord> read_timeseries(std::istream& in);

}  // namespace nsch
