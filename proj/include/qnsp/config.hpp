#pragma once

#include <cstdint>
#include <string>

#include "qnsp/model.hpp"

namespace qnsp {

enum class RunMode { collocation, galerkin };
enum class SchemeKind { imex_integrating_factor, explicit_rk4_reference };

struct StepScheme {
  SchemeKind kind = SchemeKind::imex_integrating_factor;
  double dt = 2.5e-4;
  double safety = 0.4;
  int rk_order = 3;       // Lawson stage order for the IMEX scheme (2, 3 or 4)
  bool adaptive = false;  // recompute dt from the CFL/explicit limits

  void validate() const;
};

struct InitialSpec {
  std::string preset = "cosine";  // constant | cosine | gaussian-density | vacuum-touching
  double mean = 1.0;
  double amplitude = 0.05;
  int mode = 1;
  double velocity_amplitude = 0.05;
  int velocity_mode = 1;
  double width = 0.5;        // gaussian-density
  bool pin_velocity = false; // hold u = 0, evolve the density alone
};

struct DopingSpec {
  std::string preset = "uniform";  // uniform | cosine | gaussian-bump | file
  int mode = 1;
  double amplitude = 0.0;
  double width = 0.5;
  std::string path;  // checkpoint file for preset "file"
};

/// One file fully determines a run.
struct RunConfig {
  int dim = 1;
  std::array<int, 3> n = {128, 8, 8};
  std::array<double, 3> length = {2 * std::numbers::pi, 2 * std::numbers::pi,
                                  2 * std::numbers::pi};
  ModelParams params;
  bool paper_faithful = false;  // tie r0 = r1 = eps
  InitialSpec initial;
  DopingSpec doping;
  double T = 1.0;
  StepScheme scheme;
  int save_every = 1;
  int checkpoint_every = 0;  // 0: final state only
  RunMode mode = RunMode::collocation;
  int galerkin_modes = 17;
  std::string output_dir = "out";

  Grid grid() const;
  ModelParams effective_params() const;
  /// Initial (rho, m) with the Poisson solve applied; validated and dealiased.
  State initial_state(const DopingProfile& dop) const;
  SpectralField initial_density() const;
  /// Doping profile mean-shifted to the target mass; the shift is reported.
  DopingProfile doping_profile(double target_mass, double* shift = nullptr) const;

  /// Canonical serialized form (stable ordering) and its FNV-1a hash.
  std::string canonical_text(const std::string& exclude_key = "") const;
  std::uint64_t hash(const std::string& exclude_key = "") const;

  void validate() const;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path);

/// Desk-scale default: d = 1, N = 128, T = 1, gamma = 2, cosine initial data.
RunConfig default_desk_config();
/// 3-D smoke profile: N = 16 per axis, T = 0.05.
RunConfig smoke3d_config();

}  // namespace qnsp
