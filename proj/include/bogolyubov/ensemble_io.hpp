// Path ensemble export.
//
// CSV: header "path_id,t,x_1,...,x_d", one row per (path, time).
// Binary: magic "BGLYB1", then little-endian uint32 d, uint64 n_paths,
// uint64 n_times, uint64 seed, then n_paths * n_times rows of (t, x_1..x_d)
// as IEEE-754 doubles, path-major.
#pragma once

#include <iosfwd>
#include <string>

#include "bogolyubov/sde.hpp"

namespace bogolyubov {

void write_csv(const PathEnsemble& ensemble, std::ostream& out);
void write_csv(const PathEnsemble& ensemble, const std::string& path);

void write_binary(const PathEnsemble& ensemble, std::ostream& out);
void write_binary(const PathEnsemble& ensemble, const std::string& path);

/// Reads a binary dump; the equation tag is not stored and comes back as
/// averaged.
PathEnsemble read_binary(std::istream& in);
PathEnsemble read_binary(const std::string& path);

}  // namespace bogolyubov
