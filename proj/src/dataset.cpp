#include "posture/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "posture/error.hpp"
#include "posture/util.hpp"

namespace posture {

using ordered_json = nlohmann::ordered_json;

std::string joint_order_checksum() {
  Fnv1a h;
  for (std::size_t i = 0; i < kJointCount; ++i) h.update(joint_name(joint_at(i))).update(",");
  return h.hex();
}

std::string serialize_record(const Observation& obs) {
  ordered_json rec;
  rec["participant"] = obs.meta.participant_id;
  if (obs.label) rec["label"] = std::string(label_name(*obs.label));
  rec["orientation_deg"] = obs.meta.orientation_deg;
  rec["distance_m"] = obs.meta.distance_m;
  ordered_json joints = ordered_json::object();
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const Point3& p = obs.skeleton.at(i);
    joints[std::string(joint_name(joint_at(i)))] = {p.x(), p.y(), p.z()};
  }
  rec["joints"] = std::move(joints);
  return rec.dump();
}

std::string LabeledDataset::fingerprint() const {
  Fnv1a h;
  for (const auto& obs : records) h.update(serialize_record(obs)).update("\n");
  return h.hex();
}

std::string serialize_dataset(const LabeledDataset& ds) {
  ordered_json header;
  header["format"] = kDatasetFormatName;
  header["version"] = kDatasetFormatVersion;
  header["joint_order"] = joint_order_checksum();
  header["records"] = ds.records.size();
  header["provenance"] = ds.provenance;
  std::string out = header.dump();
  out += '\n';
  for (const auto& obs : ds.records) {
    out += serialize_record(obs);
    out += '\n';
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::ParseError, {}, {}, line, message);
}

struct Header {
  std::string provenance;
  std::optional<std::size_t> records;
};

Header parse_header(const std::string& text) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    parse_fail(1, std::string("header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || header.value("format", "") != kDatasetFormatName) {
    parse_fail(1, std::string("missing header line with format \"") + kDatasetFormatName + "\"");
  }
  if (!header.contains("version") || !header["version"].is_number_integer()) {
    parse_fail(1, "header has no integer version");
  }
  const int version = header["version"].get<int>();
  if (version != kDatasetFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, "dataset", std::to_string(version), 1,
                "reader supports version " + std::to_string(kDatasetFormatVersion));
  }
  if (header.value("joint_order", "") != joint_order_checksum()) {
    parse_fail(1, "joint order checksum does not match this reader");
  }
  Header h;
  if (header.contains("provenance") && header["provenance"].is_string()) {
    h.provenance = header["provenance"].get<std::string>();
  }
  if (header.contains("records")) {
    if (!header["records"].is_number_unsigned()) parse_fail(1, "header records must be a count");
    h.records = header["records"].get<std::size_t>();
  }
  return h;
}

double number_field(const nlohmann::json& rec, const char* key, std::size_t line) {
  if (!rec.contains(key) || !rec[key].is_number()) {
    parse_fail(line, std::string("field \"") + key + "\" must be a number");
  }
  return rec[key].get<double>();
}

Observation parse_record(const std::string& text, std::size_t line) {
  nlohmann::json rec;
  try {
    rec = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    parse_fail(line, std::string("invalid JSON: ") + e.what());
  }
  if (!rec.is_object()) parse_fail(line, "record must be a JSON object");

  ObservationMeta meta;
  if (!rec.contains("participant") || !rec["participant"].is_string()) {
    parse_fail(line, "field \"participant\" must be a string");
  }
  meta.participant_id = rec["participant"].get<std::string>();
  meta.orientation_deg = number_field(rec, "orientation_deg", line);
  meta.distance_m = number_field(rec, "distance_m", line);
  if (!(meta.orientation_deg >= 0.0 && meta.orientation_deg < 360.0)) {
    parse_fail(line, "orientation_deg must be in [0, 360)");
  }
  if (!(meta.distance_m > 0.0) || !std::isfinite(meta.distance_m)) {
    parse_fail(line, "distance_m must be positive");
  }

  std::optional<PostureLabel> label;
  if (rec.contains("label")) {
    if (!rec["label"].is_string()) parse_fail(line, "field \"label\" must be a string");
    const auto name = rec["label"].get<std::string>();
    label = label_from_name(name);
    if (!label) throw Error(ErrorCode::UnknownLabel, name, {}, line);
  }

  if (!rec.contains("joints") || !rec["joints"].is_object()) {
    parse_fail(line, "field \"joints\" must be an object");
  }
  RawJointMap raw;
  for (const auto& [name, xyz] : rec["joints"].items()) {
    if (!xyz.is_array() || xyz.size() != 3) {
      parse_fail(line, "joint \"" + name + "\" must be an array of 3 numbers");
    }
    std::array<double, 3> p{};
    for (std::size_t a = 0; a < 3; ++a) {
      if (xyz[a].is_null()) {
        p[a] = std::numeric_limits<double>::quiet_NaN();
      } else if (xyz[a].is_number()) {
        p[a] = xyz[a].get<double>();
      } else {
        parse_fail(line, "joint \"" + name + "\" has a non-numeric coordinate");
      }
    }
    raw.emplace(name, p);
  }
  try {
    return Observation{validate_skeleton(raw), label, std::move(meta)};
  } catch (const Error& e) {
    throw with_line(e, line);
  }
}

bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

LabeledDataset parse_dataset(std::istream& in) {
  LabeledDataset ds;
  std::string text;
  std::size_t line = 0;
  bool header_seen = false;
  std::optional<std::size_t> expected;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (!header_seen) {
      Header h = parse_header(text);
      ds.provenance = std::move(h.provenance);
      expected = h.records;
      header_seen = true;
      continue;
    }
    if (is_blank(text)) continue;
    ds.records.push_back(parse_record(text, line));
  }
  if (!header_seen) parse_fail(1, "empty dataset file");
  if (expected && *expected != ds.size()) {
    parse_fail(line, "header announces " + std::to_string(*expected) + " records, found " +
                         std::to_string(ds.size()));
  }
  return ds;
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path.string(), {}, std::nullopt, "cannot open file");
  return parse_dataset(in);
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, path.string(), {}, std::nullopt, "cannot write file");
  out << serialize_dataset(ds);
  if (!out) throw Error(ErrorCode::IoError, path.string(), {}, std::nullopt, "write failed");
}

}  // namespace posture
