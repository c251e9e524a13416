#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sctd/tensor.hpp"

namespace sctd {

enum class PrototypeKind { windowed_sine, windowed_cosine, gaussian, wrapped_cosine };

std::string to_string(PrototypeKind kind);
PrototypeKind prototype_kind_from_string(const std::string& s);

// Parameters of one temporal prototype. Which fields are meaningful depends on
// kind: windowed sinusoids use (frequency, window_center, window_width),
// gaussians use (mu, sigma), wrapped cosines use (period_count, phase_shift).
struct PrototypeSpec {
  PrototypeKind kind = PrototypeKind::windowed_cosine;
  double frequency = 0.0;      // radians per time unit
  double window_center = 0.0;
  double window_width = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double period_count = 0.0;   // integer number of periods over the interval
  double phase_shift = 0.0;

  bool operator==(const PrototypeSpec&) const = default;
};

// Over-complete temporal library D (I3 x P). Columns are unit-normalized
// samples of the prototypes; specs carry full provenance, so any column can be
// regenerated from its spec alone.
struct Dictionary {
  DenseMatrix matrix;                 // I3 x P
  std::vector<PrototypeSpec> specs;   // length P
  std::vector<double> time_axis;      // length I3
  std::uint64_t id = 0;
  std::size_t dropped_zero_columns = 0;

  std::size_t prototype_count() const { return matrix.cols(); }
  std::size_t sample_count() const { return matrix.rows(); }
};

// Samples a prototype on the time axis and unit-normalizes. Returns nullopt if
// the sampled column is identically zero (unnormalizable).
std::optional<std::vector<double>> reconstruct(const PrototypeSpec& spec,
                                               const std::vector<double>& time_axis);

Dictionary build_windowed_sinusoids(const std::vector<double>& time_axis,
                                    const std::vector<double>& frequencies,
                                    const std::vector<double>& centers,
                                    const std::vector<double>& widths,
                                    bool include_sine, bool include_cosine);

Dictionary build_gaussians(const std::vector<double>& time_axis,
                           const std::vector<double>& mus,
                           const std::vector<double>& sigmas);

Dictionary build_wrapped_cosines(const std::vector<double>& time_axis,
                                 const std::vector<double>& period_counts,
                                 const std::vector<double>& shifts);

Dictionary concat(const std::vector<Dictionary>& dicts);

// Library configuration: JSON object with a time_axis descriptor
// {start, step, count} and a families array; see README for the schema.
Dictionary dictionary_from_config(const std::string& json_text);

std::uint64_t dictionary_content_hash(const DenseMatrix& matrix,
                                      const std::vector<PrototypeSpec>& specs);

}  // namespace sctd
