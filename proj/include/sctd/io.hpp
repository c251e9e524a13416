#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sctd/decompose.hpp"
#include "sctd/dictionary.hpp"
#include "sctd/kruskal.hpp"
#include "sctd/solver.hpp"
#include "sctd/synthetic.hpp"
#include "sctd/tensor.hpp"

namespace sctd::io {

// "ST3" tensor binary: magic "ST3\0", three 64-bit little-endian unsigned
// extents, then I1*I2*I3 little-endian IEEE-754 doubles, first index fastest.
void write_st3(const std::filesystem::path& path, const DenseTensor3& t);
DenseTensor3 read_st3(const std::filesystem::path& path);

// CSV of 1-based quadruples with header "i1,i2,i3,value"; missing entries are
// zero; extents are the maximum indices seen.
DenseTensor3 read_tensor_csv(const std::filesystem::path& path);

// Dispatch on extension: .st3 binary, anything else CSV.
DenseTensor3 read_tensor(const std::filesystem::path& path);

// Atomic write: temp file in the target directory, then rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::uint64_t file_digest(const std::filesystem::path& path);

nlohmann::json prototype_to_json(const PrototypeSpec& spec);
PrototypeSpec prototype_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const KruskalModel& model, const Dictionary& dict);
KruskalModel model_from_json(const nlohmann::json& j);

nlohmann::json baseline_model_to_json(const CpAlsModel& model);

std::string report_csv(const DecompositionReport& report);
std::string bic_trace_csv(const DecompositionReport& report);
std::string time_modes_csv(const std::vector<double>& time_axis,
                           const std::vector<std::vector<double>>& modes);
std::string error_curve_csv(const std::vector<ErrorCurvePoint>& curve);
std::string sweep_csv(const std::vector<SweepRow>& rows);
nlohmann::json eval_report_to_json(const EvalReport& report);

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::string dictionary_id;  // hex, empty when no dictionary involved
  std::string input_digest;   // hex, empty when inputs are generated
  std::uint64_t seed = 0;
  std::string artifact_version = "sctd 0.1.0";
  double duration_seconds = 0.0;
  std::vector<std::string> outputs;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

std::string hex_u64(std::uint64_t v);
std::uint64_t parse_hex_u64(const std::string& s);

// 12-significant-digit formatting for CSV cells.
std::string csv_num(double v);

}  // namespace sctd::io
