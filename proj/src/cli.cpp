#include "riffle/cli.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "riffle/error.hpp"
#include "riffle/io.hpp"
#include "riffle/kernels.hpp"
#include "riffle/oracle.hpp"
#include "riffle/ordering.hpp"
#include "riffle/verify.hpp"

namespace riffle::cli {

namespace {

using io::Json;

struct RunConfig {
  std::string measure;
  std::string sampler;
  std::size_t n = 3;
  std::uint64_t samples = 0;
  std::size_t steps = 10;
  std::optional<std::uint64_t> seed;
  std::string mode = "exact";
  std::string type = "one";
  std::string law = "ordering";
  std::string out;
  std::string format;
  std::string labels;
  std::string start;
  std::size_t grid = 0;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw UsageError("--seed is required for this command");
  return *c.seed;
}

std::string format_or(const RunConfig& c, const std::string& fallback) {
  const std::string f = c.format.empty() ? fallback : c.format;
  if (f != "csv" && f != "json") throw UsageError("--format must be csv or json");
  return f;
}

oracle::ShuffleType shuffle_type(const RunConfig& c) {
  if (c.type == "one" || c.type == "1") return oracle::ShuffleType::One;
  if (c.type == "two" || c.type == "2") return oracle::ShuffleType::Two;
  throw UsageError("--type must be one or two");
}

CouplingSampler sampler_of(const RunConfig& c) {
  if (!c.sampler.empty()) return io::resolve_sampler(c.sampler);
  if (c.measure.empty()) throw UsageError("need --measure or --sampler");
  auto mu = io::resolve_quasi_uniform(c.measure);
  return shuffle_type(c) == oracle::ShuffleType::One ? CouplingSampler::nu_mu(std::move(mu))
                                                     : CouplingSampler::nu_mu_star(std::move(mu));
}

LabelSet labels_of(const RunConfig& c) {
  if (c.labels.empty()) return LabelSet::first(c.n);
  std::vector<long long> labels;
  std::stringstream ss(c.labels);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      labels.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--labels must be comma-separated integers");
    }
  }
  return LabelSet(std::move(labels));
}

void need_n(const RunConfig& c) {
  if (c.n == 0) throw UsageError("--n must be at least 1");
}

std::string histogram_csv(const std::map<Permutation, std::uint64_t>& hist, const char* key) {
  std::string s = std::string(key) + ",count\n";
  for (const auto& [p, k] : hist) s += p.to_string() + "," + std::to_string(k) + "\n";
  return s;
}

Json histogram_json(const std::map<Permutation, std::uint64_t>& hist) {
  Json h = Json::object();
  for (const auto& [p, k] : hist) h[p.to_string()] = k;
  return h;
}

std::string cmd_sample_order(const RunConfig& c) {
  const auto seed = require_seed(c);
  const auto source = io::resolve_ordering_source(c.measure);
  const auto labels = labels_of(c);
  const auto format = format_or(c, "csv");
  OrderingSampler sampler(source, labels);
  Rng rng(seed);
  std::vector<Permutation> rows;
  std::map<Permutation, std::uint64_t> hist;
  for (std::uint64_t s = 0; s < c.samples; ++s) {
    const auto ranks = sampler.draw(rng);
    auto p = Permutation::from_images({ranks.begin(), ranks.end()});
    ++hist[p];
    rows.push_back(std::move(p));
  }
  if (format == "json") {
    Json rankings = Json::array();
    for (const auto& p : rows) rankings.push_back(p.to_string());
    return Json{{"measure", c.measure},
                {"labels", std::vector<long long>(labels.labels().begin(), labels.labels().end())},
                {"samples", c.samples},
                {"seed", seed},
                {"rankings", rankings},
                {"histogram", histogram_json(hist)}}
               .dump(2) +
           "\n";
  }
  std::string s = "sample,ranking\n";
  for (std::size_t i = 0; i < rows.size(); ++i) s += std::to_string(i + 1) + "," + rows[i].to_string() + "\n";
  return s + "\n" + histogram_csv(hist, "ranking");
}

std::string cmd_step(const RunConfig& c) {
  const auto seed = require_seed(c);
  need_n(c);
  const auto sampler = sampler_of(c);
  const auto format = format_or(c, "csv");
  Rng rng(seed);
  std::vector<StepOutcome> rows;
  std::map<Permutation, std::uint64_t> hist;
  for (std::uint64_t s = 0; s < c.samples; ++s) {
    rows.push_back(step_permutation(c.n, sampler, rng));
    ++hist[rows.back().sigma];
  }
  if (format == "json") {
    Json steps = Json::array();
    for (const auto& r : rows) {
      Json cards = Json::array();
      for (const auto& card : r.cards) {
        Json entry{{"label", card.label}, {"u", card.u}, {"v", card.v}};
        if (card.tie_gap) entry["gap"] = *card.tie_gap;
        cards.push_back(std::move(entry));
      }
      steps.push_back({{"sigma", r.sigma.to_string()}, {"ties", r.ties_resolved}, {"cards", cards}});
    }
    return Json{{"n", c.n}, {"samples", c.samples}, {"seed", seed}, {"steps", steps}, {"histogram", histogram_json(hist)}}
               .dump(2) +
           "\n";
  }
  std::string s = "sample,sigma,ties\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    s += std::to_string(i + 1) + "," + rows[i].sigma.to_string() + "," + std::to_string(rows[i].ties_resolved) + "\n";
  return s + "\n" + histogram_csv(hist, "sigma");
}

std::string cmd_walk(const RunConfig& c) {
  const auto seed = require_seed(c);
  need_n(c);
  const auto sampler = sampler_of(c);
  const auto format = format_or(c, "csv");
  std::optional<Permutation> start;
  if (!c.start.empty()) start = Permutation::parse(c.start);
  const std::uint64_t trajectories = c.samples == 0 ? 1 : c.samples;
  Rng rng(seed);
  std::vector<std::vector<Permutation>> paths;
  for (std::uint64_t t = 0; t < trajectories; ++t) {
    auto child = rng.split(t);
    paths.push_back(walk(c.n, sampler, c.steps, child, start));
  }
  if (format == "json") {
    Json all = Json::array();
    for (const auto& path : paths) {
      Json states = Json::array();
      for (const auto& p : path) states.push_back(p.to_string());
      all.push_back(states);
    }
    return Json{{"n", c.n}, {"steps", c.steps}, {"seed", seed}, {"trajectories", all}}.dump(2) + "\n";
  }
  std::string s = "trajectory,h,state\n";
  for (std::size_t t = 0; t < paths.size(); ++t)
    for (std::size_t h = 0; h < paths[t].size(); ++h)
      s += std::to_string(t + 1) + "," + std::to_string(h) + "," + paths[t][h].to_string() + "\n";
  return s;
}

std::string cmd_verify(const RunConfig& c, bool& passed, std::ostream& err) {
  VerifyOptions opt;
  opt.seed = require_seed(c);
  if (c.samples > 0) opt.samples = c.samples;
  opt.max_n = c.n < 2 ? 2 : c.n;
  const auto measure = io::resolve_measure(c.measure);
  const auto format = format_or(c, "json");
  const auto report = verify_measure(measure, opt);
  passed = report.passed();
  if (!passed) {
    err << "failed checks:";
    for (const auto& f : report.failures()) err << " [" << f << "]";
    err << "\n";
  }
  if (format == "json") return to_json(report).dump(2) + "\n";
  std::string s = "check,passed,skipped,detail\n";
  for (const auto& ch : report.checks)
    s += "\"" + ch.name + "\"," + (ch.passed ? "true" : "false") + "," + (ch.skipped ? "true" : "false") + ",\"" +
         ch.detail + "\"\n";
  return s;
}

double empirical_tv_to_uniform(const std::map<Permutation, std::uint64_t>& hist, std::uint64_t total, std::size_t n) {
  double states = 1.0;
  for (std::size_t k = 2; k <= n; ++k) states *= static_cast<double>(k);
  const double u = 1.0 / states;
  double sum = 0.0;
  for (const auto& [p, k] : hist) sum += std::abs(static_cast<double>(k) / static_cast<double>(total) - u);
  sum += (states - static_cast<double>(hist.size())) * u;
  return 0.5 * sum;
}

std::string cmd_mixing(const RunConfig& c) {
  need_n(c);
  if (c.mode != "exact" && c.mode != "mc") throw UsageError("--mode must be exact or mc");
  const auto format = format_or(c, "csv");
  const bool mc = c.mode == "mc";
  const auto sampler = sampler_of(c);
  std::optional<std::vector<Rational>> exact;
  auto exact_curve = [&]() {
    if (!c.sampler.empty()) return oracle::mixing_curve(kernel_row_exact(c.n, sampler), c.steps);
    return oracle::mixing_curve(io::resolve_quasi_uniform(c.measure), c.n, shuffle_type(c), c.steps);
  };
  if (!mc) {
    exact = exact_curve();
  } else if (c.n <= oracle::Caps{}.max_n) {
    try {
      exact = exact_curve();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ExactUnavailable && e.kind() != ErrorKind::CapExceeded) throw;
    }
  }
  std::vector<double> empirical;
  std::uint64_t seed = 0;
  if (mc) {
    seed = require_seed(c);
    const std::uint64_t walks = c.samples == 0 ? 10000 : c.samples;
    std::vector<std::map<Permutation, std::uint64_t>> hist(c.steps + 1);
    Rng rng(seed);
    StepSampler stepper(sampler, c.n);
    for (std::uint64_t w = 0; w < walks; ++w) {
      auto state = Permutation::identity(c.n);
      ++hist[0][state];
      for (std::size_t h = 1; h <= c.steps; ++h) {
        state = stepper.draw(rng) * state;
        ++hist[h][state];
      }
    }
    for (const auto& hh : hist) empirical.push_back(empirical_tv_to_uniform(hh, walks, c.n));
  }
  if (format == "json") {
    Json j{{"n", c.n}, {"steps", c.steps}, {"mode", c.mode}};
    if (exact) {
      Json ex = Json::array(), dec = Json::array();
      for (const auto& r : *exact) {
        ex.push_back(to_string(r));
        dec.push_back(r.get_d());
      }
      j["tv_exact"] = ex;
      j["tv_exact_decimal"] = dec;
    }
    if (mc) {
      j["seed"] = seed;
      j["tv_empirical"] = empirical;
    }
    return j.dump(2) + "\n";
  }
  std::string s = "h";
  if (exact) s += ",tv_exact";
  if (mc) s += ",tv_empirical";
  s += "\n";
  for (std::size_t h = 0; h <= c.steps; ++h) {
    s += std::to_string(h);
    if (exact) s += "," + io::format_double((*exact)[h].get_d());
    if (mc) s += "," + io::format_double(empirical[h]);
    s += "\n";
  }
  return s;
}

std::string cmd_shuffle_map(const RunConfig& c) {
  const auto map = shuffle_map_from_measure(io::resolve_quasi_uniform(c.measure));
  const auto format = format_or(c, "csv");
  std::vector<std::pair<Rational, Rational>> table;
  for (std::size_t k = 0; c.grid > 0 && k <= c.grid; ++k) {
    const Rational x = Rational(static_cast<unsigned long>(k)) / static_cast<unsigned long>(c.grid);
    table.emplace_back(x, map(x));
  }
  if (format == "json") {
    auto j = io::to_json(map);
    if (!table.empty()) {
      Json t = Json::array();
      for (const auto& [x, y] : table) t.push_back({{"x", to_string(x)}, {"s", to_string(y)}});
      j["table"] = t;
    }
    return j.dump(2) + "\n";
  }
  std::string s = "lo,hi,slope,intercept\n";
  for (const auto& p : map.pieces())
    s += to_string(p.lo) + "," + to_string(p.hi) + "," + to_string(p.slope) + "," + to_string(p.intercept) + "\n";
  if (!table.empty()) {
    s += "\nx,s\n";
    for (const auto& [x, y] : table) s += to_string(x) + "," + to_string(y) + "\n";
  }
  return s;
}

std::string cmd_oracle(const RunConfig& c) {
  need_n(c);
  const auto format = format_or(c, "json");
  PermutationDistribution d = [&]() {
    if (!c.sampler.empty()) return kernel_row_exact(c.n, io::resolve_sampler(c.sampler));
    if (c.law == "ordering") {
      const auto source = io::resolve_ordering_source(c.measure);
      if (const auto* mix = std::get_if<MeasureMixture>(&source)) return oracle::exact_ordering_distribution(*mix, c.n);
      return oracle::exact_ordering_distribution(std::get<QuasiUniformMeasure>(source), c.n);
    }
    if (c.law == "step") return oracle::exact_step_distribution(io::resolve_quasi_uniform(c.measure), c.n, shuffle_type(c));
    throw UsageError("--law must be ordering or step");
  }();
  if (format == "json") return io::to_json(d).dump(2) + "\n";
  std::string s = "permutation,probability\n";
  for (const auto& [p, r] : d.nonzero()) s += p.to_string() + "," + to_string(r) + "\n";
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random orderings of the integers and the riffle shuffles they induce", "riffle"};
  app.require_subcommand(1);
  RunConfig c;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out,-o", c.out, "Output path (default: stdout)");
    sub->add_option("--format", c.format, "csv or json");
  };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", c.seed, "Random seed (required)"); };
  auto add_source = [&](CLI::App* sub) {
    sub->add_option("--measure,-m", c.measure, "Built-in name, JSON or JSON file");
    sub->add_option("--sampler", c.sampler, "Coupling spec: JSON, file or shorthand such as nu_mu:gsr");
    sub->add_option("--type", c.type, "one or two");
  };

  auto* sample_order = app.add_subcommand("sample-order", "Sample orderings of a label set");
  sample_order->add_option("--measure,-m", c.measure, "Built-in name, JSON or JSON file")->required();
  sample_order->add_option("--n", c.n, "Labels 1..n");
  sample_order->add_option("--labels", c.labels, "Comma-separated increasing labels (overrides --n)");
  sample_order->add_option("--samples", c.samples, "Number of orderings")->required();
  add_seed(sample_order);
  add_common(sample_order);

  auto* step = app.add_subcommand("step", "Sample single shuffle steps");
  add_source(step);
  step->add_option("--n", c.n, "Cards");
  step->add_option("--samples", c.samples, "Number of steps")->required();
  add_seed(step);
  add_common(step);

  auto* walk_cmd = app.add_subcommand("walk", "Sample random-walk trajectories");
  add_source(walk_cmd);
  walk_cmd->add_option("--n", c.n, "Cards");
  walk_cmd->add_option("--steps", c.steps, "Steps per trajectory");
  walk_cmd->add_option("--samples", c.samples, "Trajectories (default 1)");
  walk_cmd->add_option("--start", c.start, "Starting permutation (default identity)");
  add_seed(walk_cmd);
  add_common(walk_cmd);

  auto* verify = app.add_subcommand("verify", "Run the property suite for a measure");
  verify->add_option("--measure,-m", c.measure, "Built-in name, JSON or JSON file")->required();
  verify->add_option("--n", c.n, "Largest n for the exact checks");
  verify->add_option("--samples", c.samples, "Draws per statistical check (default 100000)");
  add_seed(verify);
  add_common(verify);

  auto* mixing = app.add_subcommand("mixing", "Total variation to uniform along the walk");
  add_source(mixing);
  mixing->add_option("--n", c.n, "Cards");
  mixing->add_option("--steps", c.steps, "Horizon H");
  mixing->add_option("--mode", c.mode, "exact or mc");
  mixing->add_option("--samples", c.samples, "Walks in mc mode (default 10000)");
  add_seed(mixing);
  add_common(mixing);

  auto* shuffle_map = app.add_subcommand("shuffle-map", "Piecewise-affine shuffle map of a purely atomic measure");
  shuffle_map->add_option("--measure,-m", c.measure, "Built-in name, JSON or JSON file")->required();
  shuffle_map->add_option("--grid", c.grid, "Also tabulate S at k/K, k = 0..K");
  add_common(shuffle_map);

  auto* oracle_cmd = app.add_subcommand("oracle", "Exact ordering or step law");
  add_source(oracle_cmd);
  oracle_cmd->add_option("--n", c.n, "Cards");
  oracle_cmd->add_option("--law", c.law, "ordering or step");
  add_common(oracle_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  bool passed = true;
  std::string text;
  try {
    if (sample_order->parsed()) text = cmd_sample_order(c);
    else if (step->parsed()) text = cmd_step(c);
    else if (walk_cmd->parsed()) text = cmd_walk(c);
    else if (verify->parsed()) text = cmd_verify(c, passed, err);
    else if (mixing->parsed()) text = cmd_mixing(c);
    else if (shuffle_map->parsed()) text = cmd_shuffle_map(c);
    else if (oracle_cmd->parsed()) text = cmd_oracle(c);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (c.out.empty()) {
    out << text;
  } else {
    std::ofstream file(c.out, std::ios::binary);
    if (!file) {
      err << "error: cannot open " << c.out << "\n";
      return kExitUsage;
    }
    file << text;
  }
  return passed ? kExitOk : kExitPropertyFailure;
}

}  // namespace riffle::cli
