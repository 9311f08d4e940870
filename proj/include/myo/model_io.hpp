#pragma once

// Versioned little-endian binary artifacts for RLSC-family models.
//
//   magic    8 bytes  "MYOMODEL"
//   version  u32      (currently 1)
//   method   u32      Method enumerator
//   lambda   f64
//   input_dim, feature_dim, classes   i64 each
//   samples_seen  u64
//   W, R, b  matrices: i64 rows, i64 cols, rows*cols f64 column-major
//   has_map  u8; if 1 a feature-map block follows:
//   map      magic "MYORFMAP", u32 version, u64 seed, f64 gamma,
//            frequencies matrix, offsets matrix (M x 1)
//
// Doubles are stored as raw IEEE-754 bits, so a save/load round trip is
// bit-exact.

#include <iosfwd>
#include <string>

#include "myo/classifier.hpp"

namespace myo {

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_feature_map(std::ostream& out, const RandomFeatureMap<double>& map);
RandomFeatureMap<double> load_feature_map(std::istream& in);

void save_model(std::ostream& out, const RlscClassifier& model);
RlscClassifier load_model(std::istream& in);

void save_model(const std::string& path, const RlscClassifier& model);
RlscClassifier load_model(const std::string& path);

}  // namespace myo
