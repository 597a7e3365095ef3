#pragma once

#include <string>
#include <vector>

#include "petacat/master.hpp"
#include "petacat/record.hpp"
#include "petacat/store.hpp"

namespace petacat::cli {

/// Angle in radians; bare numbers take `default_unit` ("d", "s", ...).
double angle_arg(const std::string& text, const char* default_unit);

/// Raw .det or .csv detection file.
std::vector<Detection> read_detection_file(const std::string& path);

/// Master table of a store; throws ValidationError when not yet built.
std::vector<MasterObject> load_masters(const Store& store);

/// Number of distinct pass ids in a detection set.
std::uint32_t count_passes(const std::vector<Detection>& detections);

}  // namespace petacat::cli
