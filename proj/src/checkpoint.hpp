#pragma once

#include <string>

#include "net.hpp"
#include "optim.hpp"

namespace autotuner {

// Self-describing container: magic + format version + JSON header (layer
// specs, named tensor shapes, optional Adam hyperparameters) followed by
// little-endian float32 payloads in parameters() order. Adam moments, when
// present, follow the parameters as two flat arrays.
void save_checkpoint(const AutotunerNet<float>& net, const AdamState* adam,
                     const std::string& path);

// Loads into net (and *adam when non-null). Returns true when the file
// carried optimizer state and it was restored; otherwise *adam is reset to
// a fresh state. The net is only modified on full success.
bool load_checkpoint(const std::string& path, AutotunerNet<float>& net,
                     AdamState* adam = nullptr);

}  // namespace autotuner
