#include "sctd/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sctd::io {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'T', '3', '\0'};

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

double get_f64_le(const unsigned char* p) {
  return std::bit_cast<double>(get_u64_le(p));
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

nlohmann::json matrix_to_json(const DenseMatrix& m) {
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t c = 0; c < m.cols(); ++c) cols.push_back(m.column(c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"columns", std::move(cols)}};
}

DenseMatrix matrix_from_json(const nlohmann::json& j) {
  const std::size_t rows = j.at("rows").get<std::size_t>();
  const std::size_t cols = j.at("cols").get<std::size_t>();
  std::vector<double> values;
  values.reserve(rows * cols);
  const auto& columns = j.at("columns");
  if (columns.size() != cols)
    throw std::invalid_argument("matrix json: column count mismatch");
  for (const auto& col : columns) {
    if (col.size() != rows)
      throw std::invalid_argument("matrix json: column length mismatch");
    for (const auto& v : col) values.push_back(v.get<double>());
  }
  return DenseMatrix(rows, cols, std::move(values));
}

}  // namespace

std::string hex_u64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("bad hex id: " + s);
  return v;
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.parent_path().empty() ? std::filesystem::path(".")
                                              : path.parent_path();
  std::filesystem::create_directories(dir);
  const auto tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_st3(const std::filesystem::path& path, const DenseTensor3& t) {
  std::string out;
  out.reserve(4 + 24 + 8 * t.size());
  out.append(kMagic.data(), kMagic.size());
  put_u64_le(out, t.dims().i1);
  put_u64_le(out, t.dims().i2);
  put_u64_le(out, t.dims().i3);
  for (double v : t.values()) put_u64_le(out, std::bit_cast<std::uint64_t>(v));
  write_text_atomic(path, out);
}

DenseTensor3 read_st3(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 28 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0)
    throw std::invalid_argument(path.string() + ": not an ST3 file");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  Dims3 dims{get_u64_le(p + 4), get_u64_le(p + 12), get_u64_le(p + 20)};
  if (bytes.size() != 28 + 8 * dims.count())
    throw std::invalid_argument(path.string() + ": size does not match header");
  std::vector<double> values(dims.count());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = get_f64_le(p + 28 + 8 * i);
  return DenseTensor3(dims, std::move(values));
}

DenseTensor3 read_tensor_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "i1,i2,i3,value")
    throw std::invalid_argument(path.string() + ": expected header i1,i2,i3,value");

  struct Entry { std::size_t i1, i2, i3; double v; };
  std::vector<Entry> entries;
  Dims3 dims{};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t idx[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 3; ++k) {
      auto [next, ec] = std::from_chars(p, end, idx[k]);
      if (ec != std::errc{} || next == end || *next != ',' || idx[k] == 0)
        throw std::invalid_argument(path.string() + ": bad row at line " +
                                    std::to_string(line_no));
      p = next + 1;
    }
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || next != end)
      throw std::invalid_argument(path.string() + ": bad value at line " +
                                  std::to_string(line_no));
    entries.push_back({idx[0], idx[1], idx[2], v});
    dims.i1 = std::max(dims.i1, idx[0]);
    dims.i2 = std::max(dims.i2, idx[1]);
    dims.i3 = std::max(dims.i3, idx[2]);
  }
  if (entries.empty()) throw std::invalid_argument(path.string() + ": no data rows");
  DenseTensor3 t(dims);
  for (const auto& e : entries) t.at(e.i1 - 1, e.i2 - 1, e.i3 - 1) = e.v;
  return t;
}

DenseTensor3 read_tensor(const std::filesystem::path& path) {
  if (path.extension() == ".st3") return read_st3(path);
  return read_tensor_csv(path);
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

nlohmann::json prototype_to_json(const PrototypeSpec& spec) {
  nlohmann::json params;
  switch (spec.kind) {
    case PrototypeKind::windowed_sine:
    case PrototypeKind::windowed_cosine:
      params = {{"frequency", spec.frequency},
                {"window_center", spec.window_center},
                {"window_width", spec.window_width}};
      break;
    case PrototypeKind::gaussian:
      params = {{"mu", spec.mu}, {"sigma", spec.sigma}};
      break;
    case PrototypeKind::wrapped_cosine:
      params = {{"period_count", spec.period_count}, {"phase_shift", spec.phase_shift}};
      break;
  }
  return {{"kind", to_string(spec.kind)}, {"params", std::move(params)}};
}

PrototypeSpec prototype_from_json(const nlohmann::json& j) {
  PrototypeSpec spec;
  spec.kind = prototype_kind_from_string(j.at("kind").get<std::string>());
  const auto& params = j.at("params");
  auto get = [&](const char* key) { return params.at(key).get<double>(); };
  switch (spec.kind) {
    case PrototypeKind::windowed_sine:
    case PrototypeKind::windowed_cosine:
      spec.frequency = get("frequency");
      spec.window_center = get("window_center");
      spec.window_width = get("window_width");
      break;
    case PrototypeKind::gaussian:
      spec.mu = get("mu");
      spec.sigma = get("sigma");
      break;
    case PrototypeKind::wrapped_cosine:
      spec.period_count = get("period_count");
      spec.phase_shift = get("phase_shift");
      break;
  }
  return spec;
}

nlohmann::json model_to_json(const KruskalModel& model, const Dictionary& dict) {
  nlohmann::json components = nlohmann::json::array();
  for (std::size_t r = 0; r < model.rank(); ++r) {
    nlohmann::json selected = nlohmann::json::array();
    for (std::size_t p = 0; p < model.z.rows(); ++p) {
      const double coeff = model.z(p, r);
      if (coeff == 0.0) continue;
      nlohmann::json entry = prototype_to_json(dict.specs[p]);
      entry["coefficient"] = coeff;
      entry["prototype_index"] = p;
      selected.push_back(std::move(entry));
    }
    components.push_back({{"weight", model.weights[r]},
                          {"selected_prototypes", std::move(selected)}});
  }
  return {{"format", "sctd-model"},
          {"version", 1},
          {"dictionary_id", hex_u64(model.dictionary_id)},
          {"weights", model.weights},
          {"a", matrix_to_json(model.a)},
          {"b", matrix_to_json(model.b)},
          {"z", matrix_to_json(model.z)},
          {"components", std::move(components)}};
}

KruskalModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "sctd-model")
    throw std::invalid_argument("model json: unexpected format tag");
  KruskalModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.a = matrix_from_json(j.at("a"));
  m.b = matrix_from_json(j.at("b"));
  m.z = matrix_from_json(j.at("z"));
  m.dictionary_id = parse_hex_u64(j.at("dictionary_id").get<std::string>());
  if (m.a.cols() != m.weights.size() || m.b.cols() != m.weights.size() ||
      m.z.cols() != m.weights.size())
    throw std::invalid_argument("model json: factor ranks disagree with weights");
  return m;
}

nlohmann::json baseline_model_to_json(const CpAlsModel& model) {
  return {{"format", "cp-als-model"},
          {"version", 1},
          {"weights", model.weights},
          {"a", matrix_to_json(model.a)},
          {"b", matrix_to_json(model.b)},
          {"c", matrix_to_json(model.c)},
          {"fit", model.fit},
          {"fit_trace", model.fit_trace}};
}

std::string report_csv(const DecompositionReport& report) {
  std::string out = "round,lambda,tau,bic,nnz,residual_norm,relative_residual\n";
  for (const auto& r : report.rounds) {
    out += std::to_string(r.rank_index) + ',' + csv_num(r.lambda) + ',' +
           csv_num(r.tau) + ',' + csv_num(r.bic) + ',' + std::to_string(r.nnz) + ',' +
           csv_num(r.residual_norm) + ',' + csv_num(r.relative_residual) + '\n';
  }
  return out;
}

std::string bic_trace_csv(const DecompositionReport& report) {
  std::string out = "round,tau,bic,nnz\n";
  for (std::size_t i = 0; i < report.tau_traces.size(); ++i) {
    for (const auto& e : report.tau_traces[i].evaluated) {
      out += std::to_string(i + 1) + ',' + csv_num(e.tau) + ',' + csv_num(e.bic) + ',' +
             std::to_string(e.nnz) + '\n';
    }
  }
  return out;
}

std::string time_modes_csv(const std::vector<double>& time_axis,
                           const std::vector<std::vector<double>>& modes) {
  std::string out = "t";
  for (std::size_t r = 0; r < modes.size(); ++r) out += ",mode_" + std::to_string(r + 1);
  out += '\n';
  for (std::size_t i = 0; i < time_axis.size(); ++i) {
    out += csv_num(time_axis[i]);
    for (const auto& mode : modes) out += ',' + csv_num(mode.at(i));
    out += '\n';
  }
  return out;
}

std::string error_curve_csv(const std::vector<ErrorCurvePoint>& curve) {
  std::string out = "rank,error_vs_target,error_vs_clean\n";
  for (const auto& p : curve) {
    out += std::to_string(p.rank) + ',' + csv_num(p.error_vs_target) + ',';
    if (p.error_vs_clean) out += csv_num(*p.error_vs_clean);
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "param,relative_error_clean,relative_error_noisy,factor_accuracy,nnz_total,snr,seed\n";
  for (const auto& r : rows) {
    out += csv_num(r.param) + ',' + csv_num(r.relative_error_clean) + ',' +
           csv_num(r.relative_error_noisy) + ',' + csv_num(r.factor_accuracy) + ',' +
           std::to_string(r.nnz_total) + ',' + csv_num(r.snr) + ',' +
           std::to_string(r.seed) + '\n';
  }
  return out;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
  nlohmann::json j = {{"relative_error_noisy", report.relative_error_noisy},
                      {"factor_accuracy", report.factor_accuracy},
                      {"prototypes_chosen", report.prototypes_chosen}};
  if (report.relative_error_clean) j["relative_error_clean"] = *report.relative_error_clean;
  if (report.snr) j["snr"] = *report.snr;
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : report.top_modes) {
    if (!m.present) {
      modes.push_back(nullptr);
      continue;
    }
    modes.push_back({{"kind", to_string(m.kind)},
                     {"frequency", m.frequency},
                     {"prototype_index", m.prototype_index},
                     {"coefficient", m.coefficient}});
  }
  j["top_modes"] = std::move(modes);
  return j;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  nlohmann::json j = {{"command", manifest.command},
                      {"config", manifest.config},
                      {"seed", manifest.seed},
                      {"artifact_version", manifest.artifact_version},
                      {"duration_seconds", manifest.duration_seconds},
                      {"outputs", manifest.outputs}};
  if (!manifest.dictionary_id.empty()) j["dictionary_id"] = manifest.dictionary_id;
  if (!manifest.input_digest.empty()) j["input_digest"] = manifest.input_digest;
  write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace sctd::io
