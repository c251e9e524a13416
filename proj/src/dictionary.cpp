#include "sctd/dictionary.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sctd {
namespace {

void check_time_axis(const std::vector<double>& t) {
  if (t.empty()) throw std::invalid_argument("time_axis must be nonempty");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw std::invalid_argument("time_axis must be strictly increasing");
}

// Span of one full wrap for wrapped cosines: the interval length extended by
// one sample step, so the first and last-plus-one samples coincide.
double wrap_span(const std::vector<double>& t) {
  const std::size_t n = t.size();
  if (n < 2) return 1.0;
  return (t.back() - t.front()) * static_cast<double>(n) / static_cast<double>(n - 1);
}

std::vector<double> sample(const PrototypeSpec& spec, const std::vector<double>& t) {
  std::vector<double> v(t.size(), 0.0);
  switch (spec.kind) {
    case PrototypeKind::windowed_sine:
    case PrototypeKind::windowed_cosine: {
      const double lo = spec.window_center - spec.window_width / 2;
      const double hi = spec.window_center + spec.window_width / 2;
      const bool is_sine = spec.kind == PrototypeKind::windowed_sine;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi) continue;
        v[i] = is_sine ? std::sin(spec.frequency * t[i]) : std::cos(spec.frequency * t[i]);
      }
      break;
    }
    case PrototypeKind::gaussian: {
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = t[i] - spec.mu;
        v[i] = std::exp(-d * d / (2 * spec.sigma * spec.sigma));
      }
      break;
    }
    case PrototypeKind::wrapped_cosine: {
      const double span = wrap_span(t);
      const double w = 2 * std::numbers::pi * spec.period_count / span;
      for (std::size_t i = 0; i < t.size(); ++i)
        v[i] = std::cos(w * (t[i] - spec.phase_shift));
      break;
    }
  }
  return v;
}

struct Builder {
  std::vector<double> time_axis;
  std::vector<double> columns;  // column-major I3 x P
  std::vector<PrototypeSpec> specs;
  std::size_t dropped = 0;

  void add(const PrototypeSpec& spec) {
    std::vector<double> v = sample(spec, time_axis);
    const double n = norm2(v);
    if (n == 0.0) {
      ++dropped;
      return;
    }
    for (auto& x : v) x /= n;
    columns.insert(columns.end(), v.begin(), v.end());
    specs.push_back(spec);
  }

  Dictionary finish() {
    Dictionary d;
    d.matrix = DenseMatrix(time_axis.size(), specs.size(), std::move(columns));
    d.specs = std::move(specs);
    d.time_axis = std::move(time_axis);
    d.dropped_zero_columns = dropped;
    d.id = dictionary_content_hash(d.matrix, d.specs);
    return d;
  }
};

}  // namespace

std::string to_string(PrototypeKind kind) {
  switch (kind) {
    case PrototypeKind::windowed_sine: return "windowed_sine";
    case PrototypeKind::windowed_cosine: return "windowed_cosine";
    case PrototypeKind::gaussian: return "gaussian";
    case PrototypeKind::wrapped_cosine: return "wrapped_cosine";
  }
  return "unknown";
}

PrototypeKind prototype_kind_from_string(const std::string& s) {
  if (s == "windowed_sine") return PrototypeKind::windowed_sine;
  if (s == "windowed_cosine") return PrototypeKind::windowed_cosine;
  if (s == "gaussian") return PrototypeKind::gaussian;
  if (s == "wrapped_cosine") return PrototypeKind::wrapped_cosine;
  throw std::invalid_argument("unknown prototype kind: " + s);
}

std::optional<std::vector<double>> reconstruct(const PrototypeSpec& spec,
                                               const std::vector<double>& time_axis) {
  check_time_axis(time_axis);
  std::vector<double> v = sample(spec, time_axis);
  const double n = norm2(v);
  if (n == 0.0) return std::nullopt;
  for (auto& x : v) x /= n;
  return v;
}

Dictionary build_windowed_sinusoids(const std::vector<double>& time_axis,
                                    const std::vector<double>& frequencies,
                                    const std::vector<double>& centers,
                                    const std::vector<double>& widths,
                                    bool include_sine, bool include_cosine) {
  check_time_axis(time_axis);
  if (frequencies.empty() || centers.empty() || widths.empty())
    throw std::invalid_argument("build_windowed_sinusoids: empty parameter grid");
  if (!include_sine && !include_cosine)
    throw std::invalid_argument("build_windowed_sinusoids: no kind selected");
  for (double f : frequencies)
    if (f < 0) throw std::invalid_argument("frequency must be nonnegative");
  for (double w : widths)
    if (!(w > 0)) throw std::invalid_argument("window_width must be positive");

  Builder b;
  b.time_axis = time_axis;
  for (int pass = 0; pass < 2; ++pass) {
    const bool sine = pass == 1;
    if ((sine && !include_sine) || (!sine && !include_cosine)) continue;
    for (double f : frequencies)
      for (double c : centers)
        for (double w : widths) {
          PrototypeSpec s;
          s.kind = sine ? PrototypeKind::windowed_sine : PrototypeKind::windowed_cosine;
          s.frequency = f;
          s.window_center = c;
          s.window_width = w;
          b.add(s);
        }
  }
  return b.finish();
}

Dictionary build_gaussians(const std::vector<double>& time_axis,
                           const std::vector<double>& mus,
                           const std::vector<double>& sigmas) {
  check_time_axis(time_axis);
  if (mus.empty() || sigmas.empty())
    throw std::invalid_argument("build_gaussians: empty parameter grid");
  for (double s : sigmas)
    if (!(s > 0)) throw std::invalid_argument("sigma must be positive");

  Builder b;
  b.time_axis = time_axis;
  for (double mu : mus)
    for (double sigma : sigmas) {
      PrototypeSpec s;
      s.kind = PrototypeKind::gaussian;
      s.mu = mu;
      s.sigma = sigma;
      b.add(s);
    }
  return b.finish();
}

Dictionary build_wrapped_cosines(const std::vector<double>& time_axis,
                                 const std::vector<double>& period_counts,
                                 const std::vector<double>& shifts) {
  check_time_axis(time_axis);
  if (period_counts.empty() || shifts.empty())
    throw std::invalid_argument("build_wrapped_cosines: empty parameter grid");
  for (double k : period_counts)
    if (k < 0) throw std::invalid_argument("period_count must be nonnegative");

  Builder b;
  b.time_axis = time_axis;
  for (double k : period_counts)
    for (double shift : shifts) {
      PrototypeSpec s;
      s.kind = PrototypeKind::wrapped_cosine;
      s.period_count = k;
      s.phase_shift = shift;
      b.add(s);
    }
  return b.finish();
}

Dictionary concat(const std::vector<Dictionary>& dicts) {
  if (dicts.empty()) throw std::invalid_argument("concat: empty dictionary list");
  const auto& axis = dicts.front().time_axis;
  Dictionary out;
  out.time_axis = axis;
  std::size_t total = 0;
  for (const auto& d : dicts) {
    if (d.time_axis != axis) throw std::invalid_argument("concat: time-axis mismatch");
    total += d.prototype_count();
  }
  std::vector<double> values;
  values.reserve(axis.size() * total);
  out.specs.reserve(total);
  for (const auto& d : dicts) {
    values.insert(values.end(), d.matrix.values().begin(), d.matrix.values().end());
    out.specs.insert(out.specs.end(), d.specs.begin(), d.specs.end());
    out.dropped_zero_columns += d.dropped_zero_columns;
  }
  out.matrix = DenseMatrix(axis.size(), total, std::move(values));
  out.id = dictionary_content_hash(out.matrix, out.specs);
  return out;
}

std::uint64_t dictionary_content_hash(const DenseMatrix& matrix,
                                      const std::vector<PrototypeSpec>& specs) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t rows = matrix.rows(), cols = matrix.cols();
  feed(&rows, sizeof rows);
  feed(&cols, sizeof cols);
  feed(matrix.data(), matrix.rows() * matrix.cols() * sizeof(double));
  for (const auto& s : specs) {
    const std::uint8_t kind = static_cast<std::uint8_t>(s.kind);
    feed(&kind, 1);
    const double params[] = {s.frequency, s.window_center, s.window_width,
                             s.mu, s.sigma, s.period_count, s.phase_shift};
    feed(params, sizeof params);
  }
  return h;
}

namespace {

std::vector<double> parse_grid(const nlohmann::json& j, const std::string& what) {
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_object()) {
    if (j.contains("step")) {
      const double start = j.at("start").get<double>();
      const double step = j.at("step").get<double>();
      const std::size_t count = j.at("count").get<std::size_t>();
      std::vector<double> v(count);
      for (std::size_t i = 0; i < count; ++i) v[i] = start + step * static_cast<double>(i);
      return v;
    }
    const double start = j.at("start").get<double>();
    const double stop = j.at("stop").get<double>();
    const std::size_t count = j.at("count").get<std::size_t>();
    std::vector<double> v(count);
    if (count == 1) {
      v[0] = start;
    } else {
      const double step = (stop - start) / static_cast<double>(count - 1);
      for (std::size_t i = 0; i < count; ++i) v[i] = start + step * static_cast<double>(i);
    }
    return v;
  }
  throw std::invalid_argument("library config: " + what + " must be an array or a range object");
}

}  // namespace

Dictionary dictionary_from_config(const std::string& json_text) {
  const nlohmann::json cfg = nlohmann::json::parse(json_text);
  const std::vector<double> axis = parse_grid(cfg.at("time_axis"), "time_axis");
  std::vector<Dictionary> parts;
  for (const auto& fam : cfg.at("families")) {
    const std::string kind = fam.at("kind").get<std::string>();
    if (kind == "windowed_sinusoid" || kind == "windowed_sine" || kind == "windowed_cosine") {
      bool sine = kind != "windowed_cosine";
      bool cosine = kind != "windowed_sine";
      if (kind == "windowed_sinusoid") {
        sine = fam.value("include_sine", true);
        cosine = fam.value("include_cosine", true);
      }
      parts.push_back(build_windowed_sinusoids(
          axis, parse_grid(fam.at("frequencies"), "frequencies"),
          parse_grid(fam.at("centers"), "centers"),
          parse_grid(fam.at("widths"), "widths"), sine, cosine));
    } else if (kind == "gaussian") {
      parts.push_back(build_gaussians(axis, parse_grid(fam.at("mus"), "mus"),
                                      parse_grid(fam.at("sigmas"), "sigmas")));
    } else if (kind == "wrapped_cosine") {
      parts.push_back(build_wrapped_cosines(
          axis, parse_grid(fam.at("period_counts"), "period_counts"),
          parse_grid(fam.at("shifts"), "shifts")));
    } else {
      throw std::invalid_argument("library config: unknown family kind " + kind);
    }
  }
  return concat(parts);
}

}  // namespace sctd
