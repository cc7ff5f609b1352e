#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "riffle/distribution.hpp"
#include "riffle/kernels.hpp"
#include "riffle/measure.hpp"
#include "riffle/ordering.hpp"
#include "riffle/stats.hpp"

namespace riffle::io {

using Json = nlohmann::ordered_json;

/// What a measure argument resolved to. Candidates only arise from fixtures or
/// {"removed", "atoms"} JSON and are not usable for sampling.
struct ResolvedMeasure {
  std::string label;
  std::variant<QuasiUniformMeasure, MeasureMixture, CandidateMeasure> value;
};

/// Accepts a built-in name, inline JSON (starting with '{'), or a path to a
/// JSON file. Built-ins: lebesgue, gsr, gsr-conjugate, a-shuffle:K,
/// gap(lo,hi,left|right), identity, reversal, tent, mixed, shared-atom and
/// interior-atom. Gap terms and named atomic measures can be joined with '+'.
/// Throws Error(InvalidSpec) for anything unrecognised.
ResolvedMeasure resolve_measure(std::string_view text);
QuasiUniformMeasure resolve_quasi_uniform(std::string_view text);
OrderingSource resolve_ordering_source(std::string_view text);

/// Accepts a coupling JSON document, inline or from a file, or one of the
/// shorthands nu_mu:<measure>, nu_mu_star:<measure>, deterministic:<measure>
/// and identity.
CouplingSampler resolve_sampler(std::string_view text);

MeasureSpec measure_spec_from_json(const Json& j);
QuasiUniformMeasure measure_from_json(const Json& j);
Json to_json(const QuasiUniformMeasure& mu);
CandidateMeasure candidate_from_json(const Json& j);
Json to_json(const CandidateMeasure& c);
CouplingSampler sampler_from_json(const Json& j);

Json to_json(const PermutationDistribution& d);
PermutationDistribution distribution_from_json(const Json& j);
Json to_json(const stats::TestReport& r);
Json to_json(const ShuffleMap& map);

Rational rational_from_json(const Json& j);
std::string side_name(AtomSide side);

/// Shortest round-trip decimal, independent of locale.
std::string format_double(double x);

}  // namespace riffle::io
