#pragma once

#include <string>
#include <vector>

#include "runaway/integrator.hpp"

namespace runaway {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& content);

inline constexpr const char* kSeriesHeader = "t,Vx,Vy,Vz,T,Rx,Ry,Rz,mass,loss,ratio,dist";

std::string series_csv(const std::vector<TimeSeriesRecord>& records);
std::string series_csv_row(const TimeSeriesRecord& r);
/// Throws std::runtime_error on a missing file, wrong header or malformed row.
std::vector<TimeSeriesRecord> read_series_csv(const std::string& path);

}  // namespace runaway
