#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnsp/model.hpp"

namespace qnsp {

enum class FieldRank : std::uint32_t { scalar = 0, vector = 1, matrix = 2 };

/// Portable field checkpoint: header {magic "QNSPF1", d, N_axis[], L_axis[],
/// rank, time}, then little-endian 64-bit float physical values in row-major
/// axis order, one block per component.
struct CheckpointField {
  FieldRank rank = FieldRank::scalar;
  double time = 0;
  std::vector<SpectralField> fields;  // 1, d or d*d components
};

void save_checkpoint_field(const std::string& path, const CheckpointField& cf);
CheckpointField load_checkpoint_field(const std::string& path);

/// A state is three checkpoint files: <prefix>.rho.qnspf, .mom.qnspf, .V.qnspf.
void save_state(const std::string& prefix, const State& s);
State load_state(const std::string& prefix);

}  // namespace qnsp
