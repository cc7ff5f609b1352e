#include "riffle/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "riffle/error.hpp"

namespace riffle::io {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

AtomSide parse_side(std::string_view text) {
  const auto s = lower(trim(text));
  if (s == "left" || s == "l") return AtomSide::Left;
  if (s == "right" || s == "r") return AtomSide::Right;
  throw Error(ErrorKind::InvalidSpec, "atom side must be left or right, got '" + std::string(text) + "'");
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string("malformed JSON: ") + e.what());
  }
}

std::optional<Json> json_argument(std::string_view text) {
  const auto s = trim(text);
  if (!s.empty() && s.front() == '{') return parse_json(s);
  std::error_code ec;
  const std::filesystem::path path{std::string(s)};
  if (s.find('(') == std::string_view::npos && std::filesystem::is_regular_file(path, ec)) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_json(buf.str());
  }
  return std::nullopt;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::InvalidSpec, std::string("missing field '") + key + "'");
  return j.at(key);
}

/// Gaps of a single '+'-free term, or nullopt if the term names a
/// non-atomic-combinable measure.
std::optional<std::vector<GapInterval>> term_gaps(std::string_view term) {
  const auto t = lower(trim(term));
  if (t.rfind("gap(", 0) == 0 && t.back() == ')') {
    const auto inner = std::string_view(t).substr(4, t.size() - 5);
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= inner.size(); ++i)
      if (i == inner.size() || inner[i] == ',') {
        parts.push_back(inner.substr(start, i - start));
        start = i + 1;
      }
    if (parts.size() != 3) throw Error(ErrorKind::InvalidSpec, "gap(lo,hi,side) needs three arguments");
    return std::vector<GapInterval>{{parse_rational(parts[0]), parse_rational(parts[1]), parse_side(parts[2])}};
  }
  if (t.rfind("a-shuffle:", 0) == 0) {
    const auto digits = t.substr(10);
    int k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || k < 1)
      throw Error(ErrorKind::InvalidSpec, "a-shuffle:K needs a positive integer K");
    return builtin::a_shuffle(k).gaps();
  }
  if (t == "lebesgue" || t == "uniform") return builtin::lebesgue().gaps();
  if (t == "gsr") return builtin::gsr().gaps();
  if (t == "gsr-conjugate" || t == "gsr'") return conjugate(builtin::gsr()).gaps();
  if (t == "identity") return builtin::identity().gaps();
  if (t == "reversal") return builtin::reversal().gaps();
  if (t == "tent") return builtin::tent().gaps();
  if (t == "mixed") return builtin::mixed().gaps();
  if (t == "shared-atom") return builtin::shared_atom().gaps();
  return std::nullopt;
}

bool is_candidate_name(std::string_view text) {
  const auto t = lower(trim(text));
  return t == "interior-atom" || t == "atom-in-gap-interior";
}

}  // namespace

std::string side_name(AtomSide side) { return side == AtomSide::Left ? "left" : "right"; }

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error(ErrorKind::OutOfRange, "cannot format value");
  return std::string(buf, ptr);
}

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(mpz_class{j.dump()});
  if (j.is_number_float()) return parse_rational(j.dump());
  throw Error(ErrorKind::InvalidSpec, "expected a rational, got " + j.dump());
}

MeasureSpec measure_spec_from_json(const Json& j) {
  const auto& gaps = field(j, "gaps");
  if (!gaps.is_array()) throw Error(ErrorKind::InvalidSpec, "'gaps' must be an array");
  MeasureSpec spec;
  for (const auto& g : gaps)
    spec.gaps.push_back({rational_from_json(field(g, "lo")), rational_from_json(field(g, "hi")),
                         parse_side(field(g, "atom_side").get<std::string>())});
  return spec;
}

QuasiUniformMeasure measure_from_json(const Json& j) { return validate(measure_spec_from_json(j)); }

Json to_json(const QuasiUniformMeasure& mu) {
  Json gaps = Json::array();
  for (const auto& g : mu.gaps())
    gaps.push_back({{"lo", to_string(g.lo)}, {"hi", to_string(g.hi)}, {"atom_side", side_name(g.atom_side)}});
  return Json{{"gaps", gaps}};
}

CandidateMeasure candidate_from_json(const Json& j) {
  CandidateMeasure c;
  for (const auto& r : field(j, "removed")) c.removed.push_back({rational_from_json(field(r, "lo")), rational_from_json(field(r, "hi"))});
  for (const auto& a : field(j, "atoms"))
    c.atoms.push_back({rational_from_json(field(a, "position")), rational_from_json(field(a, "mass"))});
  return c;
}

Json to_json(const CandidateMeasure& c) {
  Json removed = Json::array(), atoms = Json::array();
  for (const auto& r : c.removed) removed.push_back({{"lo", to_string(r.lo)}, {"hi", to_string(r.hi)}});
  for (const auto& a : c.atoms) atoms.push_back({{"position", to_string(a.position)}, {"mass", to_string(a.mass)}});
  return Json{{"removed", removed}, {"atoms", atoms}};
}

namespace {

ResolvedMeasure resolve_json_measure(const Json& j, std::string label) {
  if (j.contains("mixture")) {
    std::vector<MeasureMixture::Component> comps;
    for (const auto& c : field(j, "mixture")) {
      const auto& m = field(c, "measure");
      QuasiUniformMeasure mu = m.is_string() ? resolve_quasi_uniform(m.get<std::string>()) : measure_from_json(m);
      comps.push_back({rational_from_json(field(c, "weight")), std::move(mu)});
    }
    return {std::move(label), MeasureMixture(std::move(comps))};
  }
  if (j.contains("removed") || j.contains("atoms")) return {std::move(label), candidate_from_json(j)};
  return {std::move(label), measure_from_json(j)};
}

}  // namespace

ResolvedMeasure resolve_measure(std::string_view text) {
  const std::string label(trim(text));
  if (label.empty()) throw Error(ErrorKind::InvalidSpec, "empty measure specification");
  if (is_candidate_name(label)) return {label, builtin::interior_atom_candidate()};
  if (auto j = json_argument(label)) return resolve_json_measure(*j, label);
  MeasureSpec spec;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= label.size(); ++i) {
    if (i < label.size() && label[i] != '+') continue;
    const auto term = std::string_view(label).substr(start, i - start);
    auto gaps = term_gaps(term);
    if (!gaps) throw Error(ErrorKind::InvalidSpec, "unknown measure '" + std::string(trim(term)) + "'");
    spec.gaps.insert(spec.gaps.end(), gaps->begin(), gaps->end());
    start = i + 1;
  }
  return {label, validate(spec)};
}

QuasiUniformMeasure resolve_quasi_uniform(std::string_view text) {
  auto r = resolve_measure(text);
  if (auto* mu = std::get_if<QuasiUniformMeasure>(&r.value)) return *mu;
  throw Error(ErrorKind::InvalidSpec, "'" + r.label + "' is not a single quasi-uniform measure");
}

OrderingSource resolve_ordering_source(std::string_view text) {
  auto r = resolve_measure(text);
  if (auto* mu = std::get_if<QuasiUniformMeasure>(&r.value)) return *mu;
  if (auto* mix = std::get_if<MeasureMixture>(&r.value)) return *mix;
  throw Error(ErrorKind::InvalidSpec, "'" + r.label + "' is not quasi-uniform");
}

CouplingSampler sampler_from_json(const Json& j) {
  const auto type = lower(field(j, "type").get<std::string>());
  auto measure = [&]() {
    const auto& m = field(j, "measure");
    return m.is_string() ? resolve_quasi_uniform(m.get<std::string>()) : measure_from_json(m);
  };
  if (type == "nu_mu") return CouplingSampler::nu_mu(measure());
  if (type == "nu_mu_star") return CouplingSampler::nu_mu_star(measure());
  if (type == "identity") return CouplingSampler::identity();
  if (type == "deterministic") {
    if (j.contains("pieces")) {
      std::vector<AffinePiece> pieces;
      for (const auto& p : j.at("pieces"))
        pieces.push_back({rational_from_json(field(p, "lo")), rational_from_json(field(p, "hi")),
                          rational_from_json(field(p, "slope")), rational_from_json(field(p, "intercept"))});
      return CouplingSampler::deterministic(ShuffleMap(std::move(pieces)));
    }
    return CouplingSampler::deterministic(shuffle_map_from_measure(measure()));
  }
  if (type == "grid") {
    const auto& g = field(j, "grid");
    bool exact = true;
    for (const auto& row : g)
      for (const auto& c : row) exact = exact && (c.is_string() || c.is_number_integer());
    if (exact) {
      std::vector<std::vector<Rational>> cells;
      for (const auto& row : g) {
        cells.emplace_back();
        for (const auto& c : row) cells.back().push_back(rational_from_json(c));
      }
      return CouplingSampler::grid(GridCopula::from_rationals(std::move(cells)));
    }
    return CouplingSampler::grid(GridCopula::from_doubles(g.get<std::vector<std::vector<double>>>()));
  }
  if (type == "mixture") {
    std::vector<std::pair<Rational, CouplingSampler>> comps;
    for (const auto& c : field(j, "components")) {
      const auto& s = field(c, "sampler");
      comps.emplace_back(rational_from_json(field(c, "weight")),
                         s.is_string() ? resolve_sampler(s.get<std::string>()) : sampler_from_json(s));
    }
    return CouplingSampler::mixture(std::move(comps));
  }
  throw Error(ErrorKind::InvalidSpec, "unknown coupling type '" + type + "'");
}

CouplingSampler resolve_sampler(std::string_view text) {
  const auto s = trim(text);
  if (auto j = json_argument(s)) return sampler_from_json(*j);
  if (lower(s) == "identity") return CouplingSampler::identity();
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorKind::InvalidSpec, "unknown sampler '" + std::string(s) + "'");
  const auto kind = lower(s.substr(0, colon));
  const auto rest = s.substr(colon + 1);
  if (kind == "nu_mu") return CouplingSampler::nu_mu(resolve_quasi_uniform(rest));
  if (kind == "nu_mu_star") return CouplingSampler::nu_mu_star(resolve_quasi_uniform(rest));
  if (kind == "deterministic") return CouplingSampler::deterministic(shuffle_map_from_measure(resolve_quasi_uniform(rest)));
  throw Error(ErrorKind::InvalidSpec, "unknown sampler '" + std::string(s) + "'");
}

Json to_json(const PermutationDistribution& d) {
  Json probs = Json::object();
  for (const auto& [perm, p] : d.nonzero()) probs[perm.to_string()] = to_string(p);
  return Json{{"n", d.n()}, {"probs", probs}};
}

PermutationDistribution distribution_from_json(const Json& j) {
  const auto n = field(j, "n").get<std::size_t>();
  PermutationDistribution d(n);
  for (const auto& [key, value] : field(j, "probs").items()) {
    const auto perm = Permutation::parse(key);
    if (perm.size() != n) throw Error(ErrorKind::DimensionMismatch, "permutation '" + key + "' is not of size n");
    d.add(perm, rational_from_json(value));
  }
  return d;
}

Json to_json(const stats::TestReport& r) {
  return Json{{"statistic", r.statistic}, {"p_value", r.p_value},         {"samples", r.samples},
              {"alpha", r.alpha},         {"degrees_of_freedom", r.degrees_of_freedom}, {"passed", r.passed}};
}

Json to_json(const ShuffleMap& map) {
  Json pieces = Json::array();
  for (const auto& p : map.pieces())
    pieces.push_back({{"lo", to_string(p.lo)},
                      {"hi", to_string(p.hi)},
                      {"slope", to_string(p.slope)},
                      {"intercept", to_string(p.intercept)}});
  return Json{{"pieces", pieces}};
}

}  // namespace riffle::io
