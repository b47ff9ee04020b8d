#include "nsch/output.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "nsch/solver.hpp"

namespace nsch {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last || first == last) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_timeseries_row(const DiagnosticsRecord& r, std::ostream& out) {
  const double values[] = {r.time,    r.mass,    r.momentum, r.chi_mass, r.energy,
                           r.sup_rho, r.sup_u,   r.sup_chi,  r.chi_min,  r.chi_max,
                           r.rho_min, r.rho_max, r.psi_min,  r.psi_max};
  for (double v : values) out << format_double(v) << ',';
  out << r.picard_iters << '\n';
}

void write_timeseries(std::span<const DiagnosticsRecord> records, std::ostream& out) {
  out << kTimeseriesHeader << '\n';
  for (const auto& r : records) write_timeseries_row(r, out);
}

void write_timeseries(std::span<const DiagnosticsRecord> records, const std::string& path) {
  auto out = open_out(path);
  write_timeseries(records, out);
  finish(out, path);
}

void write_snapshot(const State& s, const Params& params, const Grid& grid, std::ostream& out) {
  const Field mu = chemical_potential(s, params, grid);
  out << kSnapshotHeader << '\n';
  for (int j = 0; j < grid.cells(); ++j) {
    out << format_double(grid.center(j)) << ',' << format_double(s.rho[j]) << ','
        << format_double(s.u[j]) << ',' << format_double(s.chi[j]) << ','
        << format_double(mu[j]) << '\n';
  }
}

void write_snapshot(const State& s, const Params& params, const Grid& grid,
                    const std::string& path) {
  auto out = open_out(path);
  write_snapshot(s, params, grid, out);
  finish(out, path);
}

Snapshot read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSnapshotHeader) {
    throw std::runtime_error("snapshot: missing header");
  }
  Snapshot snap;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cols = split_commas(line);
    if (cols.size() != 5) {
      throw std::runtime_error("snapshot: row " + std::to_string(row) + " has " +
                               std::to_string(cols.size()) + " columns");
    }
    snap.x.push_back(parse_double(cols[0]));
    snap.state.rho.push_back(parse_double(cols[1]));
    snap.state.u.push_back(parse_double(cols[2]));
    snap.state.chi.push_back(parse_double(cols[3]));
    snap.mu.push_back(parse_double(cols[4]));
  }
  return snap;
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_snapshot(in);
}

std::vector<DiagnosticsRecord> read_timeseries(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTimeseriesHeader) {
    throw std::runtime_error("timeseries: missing header");
  }
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_commas(line);
    if (c.size() != 15) throw std::runtime_error("timeseries: bad row '" + line + "'");
    DiagnosticsRecord r;
    double* fields[] = {&r.time,    &r.mass,    &r.momentum, &r.chi_mass, &r.energy,
                        &r.sup_rho, &r.sup_u,   &r.sup_chi,  &r.chi_min,  &r.chi_max,
                        &r.rho_min, &r.rho_max, &r.psi_min,  &r.psi_max};
    for (int i = 0; i < 14; ++i) *fields[i] = parse_double(c[i]);
    r.picard_iters = static_cast<int>(parse_double(c[14]));
    out.push_back(r);
  }
  return out;
}

}  // namespace nsch
