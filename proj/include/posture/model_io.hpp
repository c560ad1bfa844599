#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "posture/classifier.hpp"
#include "posture/features.hpp"

namespace posture {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "posture-model";

// Everything needed to featurize and classify new skeletons.
struct ModelFile {
  MulticlassModel model;
  FeatureConfig features;
  std::string dataset_fingerprint;

  bool operator==(const ModelFile&) const = default;
};

std::string serialize_model(const ModelFile& file);
// Throws VersionMismatch, CorruptModel.
ModelFile parse_model(std::string_view text);

void save_model(const ModelFile& file, const std::filesystem::path& path);
// Throws IoError in addition to the parse errors.
ModelFile load_model(const std::filesystem::path& path);

}  // namespace posture
