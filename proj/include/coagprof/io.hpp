#pragma once

#include <string>

#include "coagprof/analyzer.hpp"
#include "coagprof/grid.hpp"
#include "coagprof/profiles.hpp"

namespace coagprof {

// File formats for profiles, sampled functions, and verification reports.
//
// Profiles persist as a self-describing JSON object carrying the kernel, the
// grid parameters, the samples, the headline moments, and the convergence
// record, under a "spec_version" field so later formats can coexist with
// stored files. Sampled functions persist as two-column CSV with the header
// line `y,g`. Numbers are written with enough digits that reading them back
// reproduces the stored doubles exactly, and serialization is deterministic:
// the same solution writes the same bytes on every run of the same build.

// A profile as stored on disk: the solution plus whether the producing run
// actually converged (a stalled run may persist its last iterate).
struct StoredProfile {
    ProfileSolution solution;
    bool converged = true;
};

// Serialized JSON text for the profile, trailing newline included.
std::string profile_to_json(const ProfileSolution& sol, bool converged);

// Parses profile JSON text. The kernel is revalidated, the grid is rebuilt
// from its parameters (bit-identical nodes come from sharing the
// construction code path), and every diagnostic field is recomputed from the
// stored samples, so a stale or tampered summary field cannot survive a
// round trip. Throws FormatError on structural problems (missing fields,
// sample count not matching the grid, non-finite values) and the kernel and
// grid constructors' own errors on invalid parameters.
StoredProfile profile_from_json(const std::string& text);

void save_profile(const std::string& path, const ProfileSolution& sol,
                  bool converged);

// Reads and parses a profile file; FormatError also covers an unreadable
// path.
StoredProfile load_profile(const std::string& path);

// Two-column CSV with header `y,g`, one row per node.
std::string function_to_csv(const GridFunction& f);
void save_function_csv(const std::string& path, const GridFunction& f);

// Parses two-column CSV and reconstructs the grid from the y column: node
// patterns matching a uniform grid (y_i = (i+1) h) or a geometric grid
// (constant ratio) are recognized, with 1e-9 relative slack; anything else
// throws GridKindError. FormatError on unreadable files, malformed rows, or
// fewer than two rows.
GridFunction load_function_csv(const std::string& path);

// Serialized JSON text for a verification report, trailing newline included.
std::string report_to_json(const VerificationReport& report);

}  // namespace coagprof
