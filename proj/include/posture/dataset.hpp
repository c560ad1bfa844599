#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "posture/skeleton.hpp"

namespace posture {

// Dataset files are JSON Lines: a header object on line 1, then one record per line.
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr const char* kDatasetFormatName = "posture-skeletons";

// Hash of the canonical joint-name order, stored in dataset headers.
std::string joint_order_checksum();

struct LabeledDataset {
  std::vector<Observation> records;
  // Free-form provenance (generator spec, source path), echoed into the header.
  std::string provenance;

  std::size_t size() const noexcept { return records.size(); }
  // Content hash over the canonical serialization of every record.
  std::string fingerprint() const;
};

// One canonical record line (no trailing newline).
std::string serialize_record(const Observation& obs);
std::string serialize_dataset(const LabeledDataset& ds);

// Errors carry 1-based line numbers: ParseError, MissingJoint, UnknownJoint,
// UnknownLabel, NonFiniteCoordinate, VersionMismatch. Records without a
// "label" field load with an empty label.
LabeledDataset parse_dataset(std::istream& in);
LabeledDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path);

}  // namespace posture
