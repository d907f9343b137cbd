#pragma once

#include <optional>

#include "kcycle/model.hpp"

namespace kcycle {

struct ModeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CoincidentCentersError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegralityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnergyParams {
  double alpha = 1.0;       // Coulomb exponent
  bool dipole = false;      // requires Oriented mode
};

struct ObservableSet {
  double e_bend = 0.0;
  double e_clmb = 0.0;
  double alpha = 1.0;
  std::optional<double> e_dipl;
  double tw = 0.0;
  double wr = 0.0;
  int half_twists = 0;
  double half_twist_defect = 0.0;
  double gauss_area = 0.0;  // representative in [0, 4pi)
};

/// Sum of squared turning angles between consecutive center-line segments.
double bend_energy(const KaleidocycleState& state);
double bend_energy_from_segments(const std::vector<Vec3>& segments);

/// Pairwise Coulomb potential sum_{i<j} |g_i - g_j|^{-alpha} over the hinge
/// centers. The _serial variant is the reference kernel kept for testing;
/// coulomb_energy dispatches to the OpenMP kernel.
double coulomb_energy_serial(const std::vector<Vec3>& centers, double alpha);
double coulomb_energy(const std::vector<Vec3>& centers, double alpha);
double coulomb_energy(const KaleidocycleState& state, double alpha);

/// Dipole-dipole interaction energy of unit dipoles b_i at the hinge
/// centers. Oriented states only (no consistent global dipole direction
/// exists otherwise).
double dipole_energy_serial(const std::vector<Vec3>& centers,
                            const std::vector<Vec3>& dipoles);
double dipole_energy(const std::vector<Vec3>& centers,
                     const std::vector<Vec3>& dipoles);
double dipole_energy(const KaleidocycleState& state);

/// Total twist in turns, n*arccos(c)/(2pi). Cross-checks the sum form
/// sum arccos(b_{i-1}.b_i)/(2pi) against the closed form.
double twist(const KaleidocycleState& state);

/// Discrete writhe of a closed polygon: sum over non-adjacent segment pairs
/// of the exact signed solid angle, divided by 2pi.
double writhe_serial(const std::vector<Vec3>& vertices);
double writhe(const std::vector<Vec3>& vertices);
double writhe(const CenterLine& cl);

struct HalfTwists {
  int count = 0;
  double defect = 0.0;  // |2(Tw+Wr) - count|
};

/// Half-twist count of the strip, round(2(Tw + Wr)). Throws
/// IntegralityViolation when the defect exceeds 1e-3.
HalfTwists half_twists(const KaleidocycleState& state);

/// Spherical area enclosed by the geodesic polygon of normalized tangents
/// (the discrete Gauss map), as a representative in [0, 4pi).
double gauss_area(const CenterLine& cl);

/// bend_weight * E_bend + twist_weight * n * arccos(c)^2.
double kirchhoff_energy(const KaleidocycleState& state, double bend_weight,
                        double twist_weight);

ObservableSet compute_observables(const KaleidocycleState& state,
                                  const EnergyParams& params = {});

}  // namespace kcycle
