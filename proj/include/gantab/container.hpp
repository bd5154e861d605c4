#pragma once

// Model container: a single versioned JSON document holding the schema, the
// fitted encoders, the auxiliary learner ensembles, the network parameters
// and the resolved training configuration. Keys are emitted in sorted order
// and tensors as base64 little-endian float64 payloads, so serializing the
// same model twice yields byte-identical text on any platform.

#include <filesystem>
#include <string>

#include "gantab/gan.hpp"

namespace gantab {

inline constexpr int kContainerFormatVersion = 1;

std::string serialize_model(const GanModel& model);
// `origin` names the source (a path or "<memory>") in error messages.
GanModel deserialize_model(const std::string& text, const std::string& origin);

// The resolved training configuration as a JSON object (same form the model
// container embeds); the run manifest includes it verbatim.
std::string serialize_config(const GanConfig& config);

void save_model(const GanModel& model, const std::filesystem::path& path);
GanModel load_model(const std::filesystem::path& path);

}  // namespace gantab
