#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpl/config.hpp"

namespace dpl {

// Field CSV: header line "nx,ny,hx,hy" followed by one line of values
// "nx,ny,hx,hy" then ny rows (y = 0 first) of nx comma-separated values.
void write_field_csv(std::ostream& os, const BulkSurfaceField& field);
/// Throws std::invalid_argument naming the offending line.
BulkSurfaceField read_field_csv(std::istream& is, double period = 1.0,
                                double height = 1.0);
BulkSurfaceField load_field_csv(const std::filesystem::path& path,
                                double period = 1.0, double height = 1.0);

/// Header of estimates.csv; `member` prepends a member column.
std::string estimates_header(bool member);
/// One row per record; newton[k-1] is the iteration count of step k.
void write_estimates_rows(std::ostream& os,
                          const std::vector<EstimateRecord>& records,
                          const std::vector<int>& newton, int member = -1);

struct RunSummary {
  double wall_time_s = 0.0;
};

/// summary.json, estimates.csv and snapshots/ for a single run.
void write_run_outputs(const std::filesystem::path& dir,
                       const ExperimentConfig& config,
                       const Trajectory& trajectory, double wall_time_s);

/// cascade.json, estimates.csv (with member column) and summary.json.
void write_cascade_outputs(const std::filesystem::path& dir,
                           const ExperimentConfig& config,
                           const CascadeReport& report, double wall_time_s);

/// %.17g
std::string format_double(double x);

}  // namespace dpl
