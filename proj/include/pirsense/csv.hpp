#pragma once

#include <iosfwd>
#include <string>

#include "pirsense/data.hpp"

namespace pirsense {

/// Read an RFC-4180-style CSV with a mandatory header row into a numeric
/// dataset. Quoted fields are unescaped before the numeric parse. Errors
/// carry the 1-based row and column of the offending cell.
Dataset read_csv(std::istream& in, const std::string& origin = "<stream>");
Dataset read_csv_file(const std::string& path);

/// Write a dataset back out (used by the simulation tooling and tests).
void write_csv(const Dataset& data, std::ostream& os);

/// Read a covariance matrix stored as a CSV: a header naming the variables
/// followed by the square matrix, one row per line.
std::pair<std::vector<std::string>, Matrix> read_covariance_csv(const std::string& path);

}  // namespace pirsense
