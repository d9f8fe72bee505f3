#pragma once

#include <string>

#include "egoav/model.hpp"

namespace egoav::checkpoint {

// Binary checkpoint: magic, version, JSON header (model config + tensor
// directory), raw float32 payload. Loading rebuilds the model from the stored
// config and verifies every tensor's shape.
void save(const model::Model<float>& model, const std::string& path);
model::Model<float> load(const std::string& path);

}  // namespace egoav::checkpoint
