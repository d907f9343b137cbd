#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "kcycle/kinematics.hpp"
#include "kcycle/observables.hpp"

namespace kcycle {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaVersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kStateSchemaVersion = 1;

struct StateDocument {
  int schema_version = kStateSchemaVersion;
  KaleidocycleState state;
  nlohmann::json metadata;  // free-form provenance (command line, seed, tolerances)
};

struct LoadReport {
  StateDocument doc;
  ValidationSummary validation;       // at tol 1e-8
  bool validation_warning = false;    // residual above tolerance; non-fatal
  bool nonstandard_gauge = false;     // b_0 differs from the solver convention
};

/// JSON state file; doubles serialized shortest-round-trip so b survives
/// bitwise. Writes are atomic (temp file + rename).
void save_state(const StateDocument& doc, const std::filesystem::path& path);
LoadReport load_state(const std::filesystem::path& path);

/// CSV with fixed header
/// arclength,c,e_bend,e_clmb,e_dipl,tw,wr,half_twists,gauss_area
/// The e_dipl column is empty for non-oriented states.
void export_trace_csv(const MotionTrace& trace,
                      const std::vector<ObservableSet>& observables,
                      const std::filesystem::path& path);

/// OBJ-style mesh: one tetrahedron per hinge pair, edge gamma_i +- l b_i
/// opposite edge gamma_{i+1} +- l b_{i+1}; 4 vertices and 4 outward-oriented
/// triangular faces per cell.
void export_mesh(const KaleidocycleState& state, double hinge_half_length,
                 const std::filesystem::path& path);

struct NetResult {
  int num_faces = 0;
  int num_margins = 0;
  bool overlap_warning = false;  // unfolded band self-overlaps (still emitted)
};

/// Unfolds the tetrahedron strip into a planar band of 4n triangles (SVG,
/// millimeter units). Fold edges dashed, cut edges solid, glue margins of
/// the given width on the cut edges that get glued when assembling.
NetResult export_net_svg(const KaleidocycleState& state, double hinge_half_length,
                         double margin_width, const std::filesystem::path& path);

}  // namespace kcycle
