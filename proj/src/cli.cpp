#include "incflow/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <string>

#include "incflow/drivers.hpp"
#include "incflow/gen.hpp"
#include "incflow/stream.hpp"
#include "incflow/verify.hpp"

namespace incflow {

namespace {

using json = nlohmann::ordered_json;

struct RunFlags {
  std::string stream_path;
  std::string backend = "exact";
  double kappa = 1.0;
  std::uint64_t seed = 0;
  bool assert_invariants = false;
  std::string trace_path;
  bool json_output = false;
  bool flows = false;
};

// Metrics writer: one line per record, JSON or key=value.
class Emitter {
 public:
  Emitter(std::ostream& out, bool as_json) : out_(out), json_(as_json) {}

  void emit(const json& record) {
    if (json_) {
      out_ << record.dump() << '\n';
      return;
    }
    bool first = true;
    for (const auto& [key, value] : record.items()) {
      if (!first) out_ << ' ';
      first = false;
      out_ << key << '=';
      if (value.is_string()) {
        out_ << value.get<std::string>();
      } else if (value.is_number_float()) {
        out_ << format_double(value.get<double>());
      } else {
        out_ << value.dump();
      }
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  bool json_;
};

DriverOptions driver_options(const RunFlags& flags, const UpdateStream& stream,
                             std::ofstream* trace) {
  DriverOptions o;
  o.m_hat = stream.m_hat;
  if (flags.backend == "exact") {
    o.mrc.backend = MrcBackend::exact;
    if (flags.kappa != 1.0) throw InputError("--kappa only applies to the trees backend");
  } else if (flags.backend == "trees") {
    o.mrc.backend = MrcBackend::trees;
  } else {
    throw InputError("unknown backend '" + flags.backend + "'");
  }
  o.mrc.kappa = flags.kappa;
  o.mrc.seed = flags.seed;
  o.assert_invariants = flags.assert_invariants;
  if (trace) {
    o.trace = [trace](const MwuTraceEvent& ev) {
      json line{{"iteration", ev.iteration}, {"phi", ev.phi}, {"psi", ev.psi},
                {"ratio", ev.ratio}};
      *trace << line.dump() << '\n';
    };
  }
  return o;
}

RefineOptions refine_options(const DriverOptions& d) {
  RefineOptions o;
  o.mrc = d.mrc;
  o.assert_invariants = d.assert_invariants;
  o.m_hat = d.m_hat;
  o.trace = d.trace;
  return o;
}

class Clock {
 public:
  double elapsed_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json flow_json(std::span<const double> flow) { return json(std::vector<double>(flow.begin(), flow.end())); }

void run_pnorm(const UpdateStream& stream, const DriverOptions& d, bool flows, Emitter& out) {
  IncrementalPNorm engine(stream.pnorm_instance(), refine_options(d));
  Clock clock;
  auto record = [&](std::size_t i, const Verdict& v) {
    const auto diag = engine.diagnostics();
    json r{{"event", i},
           {"verdict", v.kind == VerdictKind::flow ? "flow" : "certified_above"}};
    r["energy"] = v.kind == VerdictKind::flow ? json(v.energy) : json(nullptr);
    r["mrc_queries"] = diag.mrc_queries;
    r["mwu_iterations"] = diag.mwu_iterations;
    r["refine_steps"] = diag.steps;
    if (flows && v.kind == VerdictKind::flow) r["flow"] = flow_json(v.flow);
    r["wall_ms"] = clock.elapsed_ms();
    out.emit(r);
  };
  record(0, engine.initialize());
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const auto& e = stream.events[i];
    record(i + 1, engine.insert_edge(e.tail, e.head, e.weights()));
  }
}

void run_maxflow(const UpdateStream& stream, const DriverOptions& d, bool flows, Emitter& out) {
  IncrementalMaxflow driver(stream.vertex_count, stream.s, stream.t, stream.eps, d);
  for (const auto& e : stream.initial) driver.add_initial_edge(e.tail, e.head, *e.capacity);
  Clock clock;
  auto record = [&](std::size_t i, const MaxflowReport& rep) {
    const auto diag = driver.diagnostics();
    json r{{"event", i}, {"value", rep.value}, {"phase", rep.phase},
           {"restarted", rep.restarted}, {"mrc_queries", diag.mrc_queries},
           {"mwu_iterations", diag.mwu_iterations}};
    if (flows) r["flow"] = rep.flow;
    r["wall_ms"] = clock.elapsed_ms();
    out.emit(r);
  };
  record(0, driver.start());
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const auto& e = stream.events[i];
    record(i + 1, driver.insert_edge(e.tail, e.head, *e.capacity));
  }
}

void run_effres(const UpdateStream& stream, const DriverOptions& d, bool flows, Emitter& out) {
  IncrementalEffRes driver(stream.vertex_count, stream.s, stream.t, stream.theta,
                           stream.eps, d);
  for (const auto& e : stream.initial) driver.add_initial_edge(e.tail, e.head, *e.resistance);
  Clock clock;
  auto record = [&](std::size_t i, const EffResReport& rep) {
    const auto diag = driver.diagnostics();
    const bool below = rep.verdict == EffResVerdict::below;
    json r{{"event", i}, {"verdict", below ? "below" : "above"}};
    r["estimate"] = below ? json(rep.estimate) : json(nullptr);
    r["mrc_queries"] = diag.mrc_queries;
    r["mwu_iterations"] = diag.mwu_iterations;
    if (flows && below) r["flow"] = flow_json(rep.flow);
    r["wall_ms"] = clock.elapsed_ms();
    out.emit(r);
  };
  record(0, driver.start());
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const auto& e = stream.events[i];
    record(i + 1, driver.insert_edge(e.tail, e.head, *e.resistance));
  }
}

// Oracle comparison per event. Returns the number of mismatches.
std::size_t verify_stream(const UpdateStream& stream, const DriverOptions& d, Emitter& out) {
  if (stream.vertex_count > 64 || stream.m_hat > 256) {
    throw InputError("verify: stream too large for the brute-force oracles (n <= 64, mmax <= 256)");
  }
  std::size_t failures = 0;
  auto report = [&](std::size_t i, bool ok, json detail) {
    json r{{"event", i}, {"ok", ok}};
    for (auto& [k, v] : detail.items()) r[k] = v;
    out.emit(r);
    if (!ok) ++failures;
  };

  if (stream.kind == ProblemKind::pnorm) {
    IncrementalPNorm engine(stream.pnorm_instance(), refine_options(d));
    auto shadow = stream.pnorm_instance();
    const double F = stream.threshold;
    auto check = [&](std::size_t i, const Verdict& v) {
      if (v.kind == VerdictKind::certified_above) {
        if (!shadow.demand_routable()) {
          report(i, true, {{"verdict", "certified_above"}, {"oracle", "unroutable"}});
          return;
        }
        const double opt = static_pnorm_opt(shadow).optimum;
        report(i, opt > F - 1e-7 * (1.0 + std::abs(F)),
               {{"verdict", "certified_above"}, {"oracle_opt", opt}});
      } else {
        const auto dem = net_demand(shadow.graph(), v.flow);
        double worst = 0.0;
        for (std::size_t x = 0; x < dem.size(); ++x) {
          worst = std::max(worst, std::abs(dem[x] - shadow.demand()[x]));
        }
        const bool feasible = worst <= 1e-8 * (1.0 + linf_norm(v.flow));
        const double e = energy(shadow, v.flow);
        const double eps = stream.eps;
        report(i, feasible && e <= F + eps + 1e-7 * (std::abs(F) + eps),
               {{"verdict", "flow"}, {"energy", e}, {"feasible", feasible}});
      }
    };
    check(0, engine.initialize());
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
      const auto& e = stream.events[i];
      shadow.add_edge(e.tail, e.head, e.weights());
      check(i + 1, engine.insert_edge(e.tail, e.head, e.weights()));
    }
  } else if (stream.kind == ProblemKind::maxflow) {
    IncrementalMaxflow driver(stream.vertex_count, stream.s, stream.t, stream.eps, d);
    IncrementalGraph graph(stream.vertex_count);
    std::vector<std::int64_t> caps;
    for (const auto& e : stream.initial) {
      driver.add_initial_edge(e.tail, e.head, *e.capacity);
      graph.add_edge(e.tail, e.head);
      caps.push_back(*e.capacity);
    }
    auto check = [&](std::size_t i, const MaxflowReport& rep) {
      const auto exact = exact_maxflow(graph, caps, stream.s, stream.t).value;
      bool feasible = true;
      for (std::size_t e = 0; e < caps.size(); ++e) feasible &= std::abs(rep.flow[e]) <= caps[e];
      std::vector<double> f(rep.flow.begin(), rep.flow.end());
      const auto dem = net_demand(graph, f);
      for (VertexId x = 0; x < dem.size(); ++x) {
        const double want = x == stream.s ? -double(rep.value) : x == stream.t ? double(rep.value) : 0.0;
        feasible &= std::abs(dem[x] - want) < 1e-9;
      }
      const bool ok = feasible && double(rep.value) >= (1.0 - stream.eps) * double(exact) &&
                      driver.phases() <= driver.phase_bound();
      report(i, ok, {{"value", rep.value}, {"oracle_value", exact}, {"feasible", feasible}});
    };
    check(0, driver.start());
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
      const auto& e = stream.events[i];
      graph.add_edge(e.tail, e.head);
      caps.push_back(*e.capacity);
      check(i + 1, driver.insert_edge(e.tail, e.head, *e.capacity));
    }
  } else {
    IncrementalEffRes driver(stream.vertex_count, stream.s, stream.t, stream.theta,
                             stream.eps, d);
    IncrementalGraph graph(stream.vertex_count);
    std::vector<double> res;
    for (const auto& e : stream.initial) {
      driver.add_initial_edge(e.tail, e.head, *e.resistance);
      graph.add_edge(e.tail, e.head);
      res.push_back(*e.resistance);
    }
    const double theta = stream.theta;
    const double eps = stream.eps;
    auto check = [&](std::size_t i, const EffResReport& rep) {
      const bool connected = graph.connected(stream.s, stream.t);
      const double reff = connected ? effective_resistance(graph, res, stream.s, stream.t)
                                    : std::numeric_limits<double>::infinity();
      const bool below = rep.verdict == EffResVerdict::below;
      bool ok = below ? rep.estimate <= theta * (1.0 + eps) * (1.0 + 1e-9)
                      : reff >= theta / (1.0 + eps);
      report(i, ok, {{"verdict", below ? "below" : "above"},
                     {"oracle_reff", connected ? json(reff) : json(nullptr)}});
    };
    check(0, driver.start());
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
      const auto& e = stream.events[i];
      graph.add_edge(e.tail, e.head);
      res.push_back(*e.resistance);
      check(i + 1, driver.insert_edge(e.tail, e.head, *e.resistance));
    }
  }
  return failures;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incremental thresholded p-norm flow solver"};
  app.require_subcommand(1);
  RunFlags flags;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("stream", flags.stream_path, "Update stream file")->required();
    sub->add_option("--backend", flags.backend, "Min-ratio cycle backend: exact or trees");
    sub->add_option("--kappa", flags.kappa, "Approximation factor of the trees backend");
    sub->add_option("--seed", flags.seed, "Seed for all internal randomness");
    sub->add_flag("--assert-invariants", flags.assert_invariants,
                  "Stop with exit code 2 on the first invariant violation");
    sub->add_option("--trace", flags.trace_path,
                    "Write internal per-batch potentials and ratios to this file");
    sub->add_flag("--json", flags.json_output, "JSON lines instead of key=value");
    sub->add_flag("--flows", flags.flows, "Include published flows in the records");
  };
  auto* pnorm = app.add_subcommand("pnorm", "Thresholded p-norm flow stream");
  auto* maxflow = app.add_subcommand("maxflow", "Approximate maxflow stream");
  auto* effres = app.add_subcommand("effres", "Effective-resistance threshold stream");
  auto* verify = app.add_subcommand("verify", "Compare every verdict with brute-force oracles");
  for (auto* sub : {pnorm, maxflow, effres, verify}) add_run_flags(sub);

  auto* gen = app.add_subcommand("gen", "Write a seeded instance stream");
  std::string gen_kind;
  std::string gen_out;
  std::size_t gen_n = 8, gen_initial = 4, gen_events = 8;
  int gen_p = 2;
  double gen_eps = -1.0;
  std::int64_t gen_cap = 8;
  std::uint64_t gen_seed = 0;
  gen->add_option("kind", gen_kind, "random, planted, phase-stress, maxflow or effres")
      ->required()
      ->check(CLI::IsMember({"random", "planted", "phase-stress", "maxflow", "effres"}));
  gen->add_option("--n", gen_n, "Vertices");
  gen->add_option("--initial", gen_initial, "Initial edges (pnorm: on top of a spanning tree)");
  gen->add_option("--events", gen_events, "Insertions");
  gen->add_option("--p", gen_p, "Exponent (pnorm)");
  gen->add_option("--eps", gen_eps, "Error parameter");
  gen->add_option("--cap", gen_cap, "Largest capacity (maxflow)");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("-o,--output", gen_out, "Output path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (gen->parsed()) {
      UpdateStream s;
      if (gen_kind == "random" || gen_kind == "planted") {
        PNormGenOptions o{gen_n, gen_initial, gen_events, gen_p, gen_eps > 0 ? gen_eps : 1e-3,
                          gen_seed};
        s = gen_kind == "random" ? random_pnorm_stream(o) : planted_threshold_stream(o);
      } else if (gen_kind == "effres") {
        s = random_effres_stream({gen_n, gen_initial, gen_events, gen_eps > 0 ? gen_eps : 0.1,
                                  gen_seed});
      } else {
        MaxflowGenOptions o{gen_n, gen_initial, gen_events, gen_cap,
                            gen_eps > 0 ? gen_eps : 0.5, gen_seed};
        s = gen_kind == "maxflow" ? random_maxflow_stream(o) : phase_stress_stream(o);
      }
      if (gen_out.empty()) {
        out << print_stream(s);
      } else {
        std::ofstream file(gen_out);
        if (!file) throw InputError("cannot write " + gen_out);
        file << print_stream(s);
      }
      return 0;
    }

    const auto stream = read_stream(flags.stream_path);
    std::unique_ptr<std::ofstream> trace;
    if (!flags.trace_path.empty()) {
      trace = std::make_unique<std::ofstream>(flags.trace_path);
      if (!*trace) throw InputError("cannot write " + flags.trace_path);
    }
    const auto d = driver_options(flags, stream, trace.get());
    Emitter emitter(out, flags.json_output);

    if (verify->parsed()) {
      const auto failures = verify_stream(stream, d, emitter);
      emitter.emit({{"summary", "verify"}, {"failures", failures}});
      return failures == 0 ? 0 : 2;
    }
    const auto* chosen = pnorm->parsed() ? pnorm : maxflow->parsed() ? maxflow : effres;
    const auto wanted = chosen == pnorm     ? ProblemKind::pnorm
                        : chosen == maxflow ? ProblemKind::maxflow
                                            : ProblemKind::effres;
    if (stream.kind != wanted) {
      throw InputError(std::string("stream is a ") + to_string(stream.kind) +
                       " stream, not " + to_string(wanted));
    }
    switch (wanted) {
      case ProblemKind::pnorm: run_pnorm(stream, d, flags.flows, emitter); break;
      case ProblemKind::maxflow: run_maxflow(stream, d, flags.flows, emitter); break;
      case ProblemKind::effres: run_effres(stream, d, flags.flows, emitter); break;
    }
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return 2;
  } catch (const ConfigurationError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace incflow
