#pragma once

// Comma-separated sample files: one header row, one particle per line, LF
// endings. Floats are written with 17 significant digits so they round-trip.

#include <iosfwd>
#include <string>
#include <vector>

#include "cvxwgd/densela.hpp"

namespace cvxwgd {

std::string format_double(double v);

/// Header x0,x1,... then one row per particle.
void write_samples_csv(std::ostream& os, const Mat& x);
void write_samples_csv(const std::string& path, const Mat& x);

/// Parses a samples file; the first line must be a header. Throws ConfigError
/// naming the 1-based line on malformed rows.
Mat read_samples_csv(std::istream& is, const std::string& origin = "<csv>");
Mat read_samples_csv(const std::string& path);

}  // namespace cvxwgd
