#pragma once

// Prediction-tensor file format:
//   bytes 0..7   magic "ICALPT01"
//   bytes 8..31  n_points, m, c as little-endian uint64
//   then n_points*m*c little-endian float32, point-major, sample-major,
//   class-minor.

#include <string>

#include "ical/prediction_tensor.hpp"

namespace ical {

inline constexpr char kTensorMagic[8] = {'I', 'C', 'A', 'L', 'P', 'T', '0', '1'};

/// Throws FormatError (with byte offset) on bad magic, bad dims, truncation,
/// trailing bytes or non-finite payload.
PredictionTensor load_predictions(const std::string& path);

void save_predictions(const PredictionTensor& tensor, const std::string& path);

}  // namespace ical
