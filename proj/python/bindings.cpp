#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "riffle/cli.hpp"
#include "riffle/error.hpp"
#include "riffle/io.hpp"
#include "riffle/kernels.hpp"
#include "riffle/oracle.hpp"
#include "riffle/ordering.hpp"
#include "riffle/verify.hpp"

namespace py = pybind11;
using namespace riffle;

namespace {

py::object fraction(const Rational& r) {
  static py::object cls = py::module_::import("fractions").attr("Fraction");
  return cls(to_string(r));
}

Rational rational(const py::handle& h) { return parse_rational(py::str(h).cast<std::string>()); }

py::dict to_dict(const PermutationDistribution& d) {
  py::dict out;
  for (const auto& [p, r] : d.nonzero()) out[py::str(p.to_string())] = fraction(r);
  return out;
}

PermutationDistribution from_dict(const py::dict& probs) {
  std::optional<PermutationDistribution> d;
  for (const auto& [key, value] : probs) {
    const auto p = Permutation::parse(key.cast<std::string>());
    if (!d) d.emplace(p.size());
    if (p.size() != d->n()) throw Error(ErrorKind::DimensionMismatch, "mixed permutation sizes");
    d->add(p, rational(value));
  }
  if (!d) throw Error(ErrorKind::EmptyCounts, "empty distribution");
  return *d;
}

oracle::ShuffleType shuffle_type(const std::string& t) {
  if (t == "one") return oracle::ShuffleType::One;
  if (t == "two") return oracle::ShuffleType::Two;
  throw Error(ErrorKind::InvalidSpec, "type must be 'one' or 'two'");
}

LabelSet labels_of(const py::object& labels) {
  if (py::isinstance<py::int_>(labels)) return LabelSet::first(labels.cast<std::size_t>());
  return LabelSet(labels.cast<std::vector<long long>>());
}

py::object parse_json(const io::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quasi-uniform measures, random orderings and the riffle shuffles they induce";

  py::register_exception<Error>(m, "RiffleError", PyExc_ValueError);

  py::class_<QuasiUniformMeasure>(m, "Measure")
      .def(py::init<>())
      .def_static("resolve", &io::resolve_quasi_uniform, py::arg("spec"))
      .def_static(
          "from_gaps",
          [](const std::vector<std::tuple<py::object, py::object, std::string>>& gaps) {
            MeasureSpec spec;
            for (const auto& [lo, hi, side] : gaps)
              spec.gaps.push_back({rational(lo), rational(hi), side == "left" ? AtomSide::Left : AtomSide::Right});
            return validate(spec);
          },
          py::arg("gaps"))
      .def_property_readonly("gaps",
                             [](const QuasiUniformMeasure& mu) {
                               py::list out;
                               for (const auto& g : mu.gaps())
                                 out.append(py::make_tuple(fraction(g.lo), fraction(g.hi), io::side_name(g.atom_side)));
                               return out;
                             })
      .def_property_readonly("purely_atomic", &QuasiUniformMeasure::purely_atomic)
      .def_property_readonly("diffuse_mass", [](const QuasiUniformMeasure& mu) { return fraction(mu.diffuse_mass()); })
      .def("cdf", [](const QuasiUniformMeasure& mu, const py::object& x) { return fraction(cdf(mu, rational(x))); })
      .def("cdf_left", [](const QuasiUniformMeasure& mu, const py::object& x) { return fraction(cdf_left(mu, rational(x))); })
      .def("conjugate", &conjugate)
      .def("is_quasi_uniform", [](const QuasiUniformMeasure& mu) { return is_quasi_uniform(CandidateMeasure::from(mu)); })
      .def(
          "sample_pairs",
          [](const QuasiUniformMeasure& mu, std::size_t count, std::uint64_t seed) {
            Rng rng(seed);
            std::vector<std::pair<double, double>> out;
            for (std::size_t i = 0; i < count; ++i) {
              const auto s = sample_conjugate_pair(mu, rng);
              out.emplace_back(s.x(mu), s.y(mu));
            }
            return out;
          },
          py::arg("count"), py::arg("seed"))
      .def("to_json", [](const QuasiUniformMeasure& mu) { return parse_json(io::to_json(mu)); })
      .def("__eq__", [](const QuasiUniformMeasure& a, const QuasiUniformMeasure& b) { return a == b; })
      .def("__repr__", [](const QuasiUniformMeasure& mu) { return "Measure(" + io::to_json(mu).dump() + ")"; });

  m.def(
      "is_quasi_uniform",
      [](const std::string& spec) {
        const auto r = io::resolve_measure(spec);
        if (const auto* c = std::get_if<CandidateMeasure>(&r.value)) return is_quasi_uniform(*c);
        if (const auto* mu = std::get_if<QuasiUniformMeasure>(&r.value)) return is_quasi_uniform(CandidateMeasure::from(*mu));
        for (const auto& comp : std::get<MeasureMixture>(r.value).components())
          if (!is_quasi_uniform(CandidateMeasure::from(comp.measure))) return false;
        return true;
      },
      py::arg("spec"));

  m.def(
      "sample_orderings",
      [](const std::string& spec, const py::object& labels, std::uint64_t samples, std::uint64_t seed) {
        OrderingSampler sampler(io::resolve_ordering_source(spec), labels_of(labels));
        Rng rng(seed);
        std::vector<std::string> out;
        for (std::uint64_t i = 0; i < samples; ++i) {
          const auto ranks = sampler.draw(rng);
          out.push_back(Permutation::from_images({ranks.begin(), ranks.end()}).to_string());
        }
        return out;
      },
      py::arg("measure"), py::arg("labels"), py::arg("samples"), py::arg("seed"));

  m.def(
      "exact_ordering_distribution",
      [](const std::string& spec, std::size_t n) {
        const auto source = io::resolve_ordering_source(spec);
        if (const auto* mix = std::get_if<MeasureMixture>(&source)) return to_dict(oracle::exact_ordering_distribution(*mix, n));
        return to_dict(oracle::exact_ordering_distribution(std::get<QuasiUniformMeasure>(source), n));
      },
      py::arg("measure"), py::arg("n"));

  m.def(
      "exact_step_distribution",
      [](const std::string& spec, std::size_t n, const std::string& type) {
        return to_dict(oracle::exact_step_distribution(io::resolve_quasi_uniform(spec), n, shuffle_type(type)));
      },
      py::arg("measure"), py::arg("n"), py::arg("type") = "one");

  m.def(
      "kernel_row_exact",
      [](const std::string& sampler, std::size_t n) { return to_dict(kernel_row_exact(n, io::resolve_sampler(sampler))); },
      py::arg("sampler"), py::arg("n"));

  m.def(
      "step_permutation",
      [](const std::string& sampler, std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        return step_permutation(n, io::resolve_sampler(sampler), rng).sigma.to_string();
      },
      py::arg("sampler"), py::arg("n"), py::arg("seed"));

  m.def(
      "walk",
      [](const std::string& sampler, std::size_t n, std::size_t steps, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<std::string> out;
        for (const auto& p : walk(n, io::resolve_sampler(sampler), steps, rng)) out.push_back(p.to_string());
        return out;
      },
      py::arg("sampler"), py::arg("n"), py::arg("steps"), py::arg("seed"));

  m.def(
      "mixing_curve",
      [](const std::string& spec, std::size_t n, const std::string& type, std::size_t steps) {
        py::list out;
        for (const auto& r : oracle::mixing_curve(io::resolve_quasi_uniform(spec), n, shuffle_type(type), steps))
          out.append(fraction(r));
        return out;
      },
      py::arg("measure"), py::arg("n"), py::arg("type"), py::arg("steps"));

  m.def(
      "tv_distance", [](const py::dict& p, const py::dict& q) { return fraction(oracle::tv_distance(from_dict(p), from_dict(q))); },
      py::arg("p"), py::arg("q"));

  m.def(
      "shuffle_map",
      [](const std::string& spec) {
        py::list out;
        const auto map = shuffle_map_from_measure(io::resolve_quasi_uniform(spec));
        for (const auto& p : map.pieces())
          out.append(py::make_tuple(fraction(p.lo), fraction(p.hi), fraction(p.slope), fraction(p.intercept)));
        return out;
      },
      py::arg("measure"));

  m.def(
      "verify",
      [](const std::string& spec, std::uint64_t seed, std::uint64_t samples, std::size_t max_n) {
        VerifyOptions opt;
        opt.seed = seed;
        opt.samples = samples;
        opt.max_n = max_n;
        return parse_json(to_json(verify_measure(io::resolve_measure(spec), opt)));
      },
      py::arg("measure"), py::arg("seed"), py::arg("samples") = 20000, py::arg("max_n") = 3);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
