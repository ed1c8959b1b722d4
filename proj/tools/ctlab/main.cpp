// Copyright 2026 The ctlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ctlab command-line entry point.
//
// Every run prints a reproducibility header to standard error: the full
// command line with every option resolved to its effective value. Exit
// status is 0 on success, 1 on a runtime error and 2 on a usage error.

#include <signal.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ctlab/covid/model.hpp"
#include "ctlab/covid/model_json.hpp"
#include "ctlab/epi/agent_sim.hpp"
#include "ctlab/epi/cohort.hpp"
#include "ctlab/epi/contact_graph.hpp"
#include "ctlab/epi/scenarios.hpp"
#include "ctlab/epi/tracing.hpp"
#include "ctlab/error.hpp"
#include "ctlab/surveillance/grid.hpp"
#include "ctlab/surveillance/service.hpp"
#include "ctlab/surveillance/store.hpp"
#include "ctlab/util/output.hpp"

namespace {

using ctlab::Error;
using ctlab::ErrorCode;
using ctlab::util::Table;
using Json = nlohmann::ordered_json;

struct Globals {
  std::string model = ctlab::covid::kDefaultModelPath;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

// A command's result: a table, or a document that JSON output prints as is
// and CSV output flattens.
struct Output {
  std::optional<Table> table;
  std::optional<Json> document;
};

void Emit(const Globals& g, const Output& out) {
  std::string text;
  if (g.format == "json") {
    text = (out.document ? *out.document : ctlab::util::ToJson(*out.table)).dump(2) + "\n";
  } else {
    text = ctlab::util::ToCsv(out.table ? *out.table : ctlab::util::FlattenJson(*out.document));
  }
  if (g.out.empty()) {
    std::cout << text << std::flush;
  } else {
    ctlab::util::WriteFileAtomic(g.out, text);
  }
}

// ---------------------------------------------------------------------------
// Reproducibility header.

std::string Quote(const std::string& s) {
  if (!s.empty() && s.find_first_of(" \t\n'\"\\$`*?[]{}()<>|&;#~") == std::string::npos) return s;
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

void AppendOptions(const CLI::App* app, std::string& line) {
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = "--" + opt->get_lnames().front();
    if (name == "--help") continue;
    if (opt->get_type_size() == 0) {
      if (opt->count() > 0) line += " " + name;
      continue;
    }
    std::vector<std::string> values;
    if (opt->count() > 0) {
      values = opt->results();
    } else {
      std::string d = opt->get_default_str();
      if (d.empty()) continue;
      if (d.front() == '[' && d.back() == ']') d = d.substr(1, d.size() - 2);
      values = {d};
    }
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) joined += (i ? "," : "") + values[i];
    line += " " + name + " " + Quote(joined);
  }
}

std::string ReproducibilityHeader(const CLI::App& app) {
  std::string line = "# ctlab";
  AppendOptions(&app, line);
  const CLI::App* cur = &app;
  for (;;) {
    const auto subs = cur->get_subcommands();
    if (subs.empty()) break;
    cur = subs.front();
    line += " " + cur->get_name();
    AppendOptions(cur, line);
  }
  return line;
}

// ---------------------------------------------------------------------------
// Shared option groups.

struct CohortOptions {
  ctlab::epi::CohortParams params;
  std::string link = "both_need_app";

  void Add(CLI::App* app, bool with_adoption = true) {
    auto& p = params;
    if (with_adoption) app->add_option("--adoption", p.adoption, "Fraction of people using the app");
    app->add_option("--contacts", p.contacts_per_window, "Close contacts per window");
    app->add_option("--window", p.window_days, "Contact window in days");
    app->add_option("--latent", p.latent_days, "Days from exposure to infectiousness");
    app->add_option("--onset-start", p.symptomatic_window_start, "Earliest symptom onset, days");
    app->add_option("--onset-end", p.symptomatic_window_end, "Latest symptom onset, days");
    app->add_option("--symptomatic-day", p.universal_symptomatic_day,
                    "Day by which every symptomatic case reports");
    app->add_option("--isolation-day", p.isolation_day, "Day every case stops shedding");
    app->add_option("--report-delay", p.report_delay_days, "Days from report to alerts");
    app->add_option("--link", link, "Alert link model")
        ->check(CLI::IsMember({"both_need_app", "contact_needs_app"}));
    app->add_option("--horizon", p.horizon_days, "Days to simulate");
    app->add_option("--step", p.step_days, "Time step in days");
    app->add_option("--asymptomatic", p.asymptomatic_fraction, "Share of asymptomatic cases");
    app->add_option("--long-shedders", p.long_shedder_fraction, "Share of long shedders");
    app->add_option("--long-shed-days", p.long_shed_days, "Shedding end for long shedders");
  }

  ctlab::epi::CohortParams Resolve() const {
    auto p = params;
    p.link_model = ctlab::epi::ParseLinkModel(link);
    p.Validate();
    return p;
  }
};

struct GraphOptions {
  ctlab::epi::GraphParams params;
  std::optional<std::uint64_t> graph_seed;

  void Add(CLI::App* app, std::size_t default_n) {
    params.n = default_n;
    app->add_option("--n", params.n, "Population size");
    app->add_option("--close-fraction", params.close_fraction, "Share of recorded contacts within 2 m");
    app->add_option("--far-range", params.far_range_m, "Largest recorded contact distance, m");
    app->add_option("--duration", params.duration_days, "Days of recorded contacts");
    app->add_option("--graph-seed", graph_seed, "Seed for the contact graph (default: --seed)");
  }

  // Contact rate, step, adoption and case kinds follow the cohort settings.
  ctlab::epi::ContactGraph Build(const ctlab::epi::CohortParams& c, std::uint64_t seed) const {
    auto p = params;
    p.mean_contacts = c.contacts_per_window;
    p.window_days = c.window_days;
    p.step_days = c.step_days;
    p.adoption = c.adoption;
    p.asymptomatic_fraction = c.asymptomatic_fraction;
    p.long_shedder_fraction = c.long_shedder_fraction;
    p.onset_min_days = c.symptomatic_window_start;
    p.onset_max_days = c.symptomatic_window_end;
    return ctlab::epi::generate_contact_graph(p, graph_seed.value_or(seed));
  }
};

ctlab::bn::EvidenceSet ParseEvidence(const std::vector<std::string>& items) {
  ctlab::bn::EvidenceSet ev;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw CLI::ValidationError("--evidence", "expected node=state, got '" + item + "'");
    }
    ev[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return ev;
}

nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kParseError, path + " is not valid JSON");
  return j;
}

// ---------------------------------------------------------------------------
// Commands.

Output CohortCommand(const ctlab::epi::CohortParams& p) {
  const auto series = ctlab::epi::run_cohort(p);
  Table t{{"time_days", "new_exposures", "cumulative_exposures", "actively_shedding",
           "newly_isolated", "first_generation_cumulative"},
          {}};
  for (const auto& r : series.rows) {
    t.Add({r.time_days, r.new_exposures, r.cumulative_exposures, r.actively_shedding,
           r.newly_isolated, r.first_generation_cumulative});
  }
  return {t, std::nullopt};
}

struct AgentCommandOptions {
  std::string strategy = "iterative";
  std::size_t replicates = 1000;
  unsigned threads = 0;
};

Output AgentsCommand(const ctlab::epi::CohortParams& p, const GraphOptions& graph,
                     const AgentCommandOptions& o, std::uint64_t seed) {
  const auto g = graph.Build(p, seed);
  ctlab::epi::AgentOptions options;
  options.threads = o.threads;
  const auto run = ctlab::epi::run_agent_sim(g, p, ctlab::epi::ParseTraceStrategy(o.strategy), seed,
                                             o.replicates, options);
  Table t{{"time_days", "mean_cumulative", "sem_cumulative"}, {}};
  for (std::size_t k = 0; k < run.summary.mean_cumulative.size(); ++k) {
    t.Add({static_cast<double>(k) * p.step_days, run.summary.mean_cumulative[k],
           run.summary.sem_cumulative[k]});
  }
  return {t, std::nullopt};
}

Output Table1Command(const ctlab::epi::CohortParams& p, const std::vector<double>& adoptions,
                     const std::vector<double>& days) {
  Table t{{"adoption", "day", "cumulative_exposures", "windowed_new_exposures", "normalized",
           "all_generations_cumulative"},
          {}};
  for (const auto& r : ctlab::epi::table1(p, adoptions, days)) {
    t.Add({r.adoption, r.day, r.cumulative_exposures, r.windowed_new_exposures, r.normalized,
           r.all_generations_cumulative});
  }
  return {t, std::nullopt};
}

Output SweetSpotCommand(const ctlab::epi::CohortParams& p, const ctlab::epi::SweetSpotOptions& o) {
  const double p_star = ctlab::epi::sweet_spot_search(p, ctlab::epi::Contained, o);
  Table t{{"p_star", "resolution", "criterion"}, {}};
  t.Add({p_star, 1.0 / o.resolution_steps,
         std::string("windowed new exposures non-increasing from day 14")});
  return {t, std::nullopt};
}

Output UptakeCommand(const ctlab::epi::UptakeInputs& u) {
  const auto r = ctlab::epi::required_install_fraction(u);
  std::string notes;
  for (std::size_t i = 0; i < r.notes.size(); ++i) notes += (i ? " | " : "") + r.notes[i];
  Table t{{"target", "penetration", "dropout", "owners_fraction", "population_fraction", "notes"}, {}};
  t.Add({u.target_population_uptake, u.smartphone_penetration, u.dropout, r.owners_fraction,
         r.population_fraction, notes});
  return {t, std::nullopt};
}

struct AssessOptions {
  std::vector<std::string> evidence;
  std::string case_file;
  std::optional<double> duration;
  std::string improving;
  std::string policy_file;
  ctlab::covid::AlertPolicy policy;
  std::size_t top_k = 3;
};

Output AssessCommand(const Globals& g, const AssessOptions& o) {
  const auto model = ctlab::covid::load_model(g.model);
  ctlab::covid::CaseInput c;
  if (!o.case_file.empty()) c = ctlab::covid::CaseInputFromJson(ReadJsonFile(o.case_file));
  for (const auto& [k, v] : ParseEvidence(o.evidence)) c.evidence[k] = v;
  if (o.duration) c.symptom_duration_days = *o.duration;
  if (!o.improving.empty()) c.improving = ctlab::covid::ImprovingFromString(o.improving);
  auto policy = o.policy;
  if (!o.policy_file.empty()) policy = ctlab::covid::AlertPolicyFromJson(ReadJsonFile(o.policy_file));
  return {std::nullopt, ctlab::covid::RiskReportToJson(ctlab::covid::assess(model, c, policy, o.top_k))};
}

Output VoiCommand(const Globals& g, const std::vector<std::string>& evidence) {
  const auto model = ctlab::covid::load_model(g.model);
  Table t{{"rank", "node", "gain_bits"}, {}};
  std::int64_t rank = 1;
  for (const auto& f : ctlab::covid::rank_questions(model, ParseEvidence(evidence))) {
    t.Add({rank++, f.node, f.gain_bits});
  }
  return {t, std::nullopt};
}

struct HeatmapOptions {
  std::string data_dir;
  std::int64_t start = 0;
  std::int64_t end = 0;
  double cell = 0.01;
  double tau = 0.5;
  std::string age;
};

std::string ResolveDataDir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* v = std::getenv("CTLAB_DATA_DIR"); v && *v) return v;
  return "ctlab-data";
}

Output HeatmapCommand(const HeatmapOptions& o) {
  const std::filesystem::path log = std::filesystem::path(ResolveDataDir(o.data_dir)) /
                                    ctlab::surveillance::kLogFileName;
  if (!std::filesystem::exists(log)) throw Error(ErrorCode::kIoError, "no report log at " + log.string());
  ctlab::surveillance::ReportStore store(ctlab::surveillance::ReportStore::Options{log});
  const ctlab::surveillance::TimeWindow w{o.start, o.end};
  const ctlab::surveillance::GridSpec grid{o.cell};
  std::optional<ctlab::surveillance::AgeGroup> age;
  if (!o.age.empty()) age = ctlab::surveillance::ParseAgeGroup(o.age);
  const auto cells = ctlab::surveillance::aggregate_grid(store.snapshot(), w, grid, o.tau, age);
  Output out;
  out.document = ctlab::surveillance::HeatmapGeoJson(cells, w, grid, o.tau, age);
  Table t{{"cell", "row", "col", "count", "mean_p", "high_risk_fraction", "under65_count",
           "under65_mean_p", "under65_high_risk_fraction", "over65_count", "over65_mean_p",
           "over65_high_risk_fraction"},
          {}};
  for (const auto& c : cells) {
    const auto& u = c.age(ctlab::surveillance::AgeGroup::kUnder65);
    const auto& v = c.age(ctlab::surveillance::AgeGroup::kOver65);
    t.Add({c.cell.str(), c.cell.row, c.cell.col, static_cast<std::int64_t>(c.count), c.mean_p,
           c.high_risk_fraction, static_cast<std::int64_t>(u.count), u.mean_p, u.high_risk_fraction,
           static_cast<std::int64_t>(v.count), v.mean_p, v.high_risk_fraction});
  }
  out.table = std::move(t);
  return out;
}

struct TraceOptions {
  std::string strategy = "iterative";
  std::vector<std::uint32_t> index = {0};
  double as_of = 14.0;
};

// Spreads infection without control from the index cases over the recorded
// contacts, then traces from the same cases as of the given day.
Output TraceCommand(const ctlab::epi::CohortParams& p, const GraphOptions& graph,
                    const TraceOptions& o, std::uint64_t seed) {
  auto g = graph.Build(p, seed);
  const auto as_of_tick = static_cast<std::int64_t>(std::floor(o.as_of / g.step_days() + 1e-9));
  ctlab::epi::spread_infections(g, o.index, p, 0, as_of_tick);
  const auto result = ctlab::epi::trace_contacts(g, ctlab::epi::ParseTraceStrategy(o.strategy),
                                                 o.index, o.as_of, p.latent_days);
  Table t{{"node", "via", "time_days", "depth", "infected"}, {}};
  for (const auto& n : result.order) {
    const bool infected = g.exposure_tick(n.node) != ctlab::epi::kNoTick;
    t.Add({static_cast<std::int64_t>(n.node), static_cast<std::int64_t>(n.via), n.time_days,
           static_cast<std::int64_t>(n.depth), infected});
  }
  return {t, std::nullopt};
}

struct ServeOptions {
  std::string data_dir;
  std::string bind;
  std::string ui_dir;
  bool sync = false;
};

int ServeCommand(const Globals& g, const ServeOptions& o, bool model_given) {
  ctlab::surveillance::ServiceConfig config;
  config.ApplyEnvironment();
  if (model_given) config.model_path = g.model;
  if (!o.data_dir.empty()) config.data_dir = o.data_dir;
  if (!o.bind.empty()) config.SetBindAddress(o.bind);
  if (!o.ui_dir.empty()) config.ui_dir = o.ui_dir;
  config.sync_log = o.sync;

  // Signals are taken by a dedicated thread so the server stops cleanly.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  ctlab::surveillance::SurveillanceService service(config);
  const int port = service.Bind();
  std::cerr << "# replayed " << service.store().replayed() << " reports from "
            << (config.data_dir / ctlab::surveillance::kLogFileName).string() << "\n";
  std::cout << "listening on http://" << config.host << ":" << port << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    service.Stop();
  });
  service.Run();
  // Wake the waiter if the server stopped on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctlab: contact-tracing and diagnosis laboratory"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1, 1);
  // Global options may also follow the verb.
  app.fallthrough(true);

  Globals g;
  auto* model_opt = app.add_option("--model", g.model, "Diagnostic model JSON");
  app.add_option("--seed", g.seed, "Seed for every stochastic step");
  app.add_option("--out", g.out, "Output file (default: standard output)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  // simulate cohort|agents
  auto* simulate = app.add_subcommand("simulate", "Run the cohort model or the agent simulator");
  simulate->require_subcommand(1, 1);
  CohortOptions cohort_opts;
  auto* sim_cohort = simulate->add_subcommand("cohort", "Deterministic cohort time series");
  cohort_opts.Add(sim_cohort);
  CohortOptions agent_cohort;
  GraphOptions agent_graph;
  AgentCommandOptions agent_opts;
  auto* sim_agents = simulate->add_subcommand("agents", "Agent-based replicates on a random contact graph");
  agent_cohort.Add(sim_agents);
  agent_graph.Add(sim_agents, 10000);
  sim_agents->add_option("--strategy", agent_opts.strategy, "first_order, single_step, iterative or retrospective");
  sim_agents->add_option("--replicates", agent_opts.replicates, "Number of replicates");
  sim_agents->add_option("--threads", agent_opts.threads, "Worker threads (0: all cores); does not change results");

  // table1
  CohortOptions table_cohort;
  std::vector<double> adoptions = ctlab::epi::DefaultTable1Adoptions();
  std::vector<double> days = ctlab::epi::DefaultTable1Days();
  auto* table1 = app.add_subcommand("table1", "Exposure table by adoption and day");
  table_cohort.Add(table1, false);
  table1->add_option("--adoptions", adoptions, "Adoption fractions")->delimiter(',');
  table1->add_option("--days", days, "Days to report")->delimiter(',');

  // sweetspot
  CohortOptions sweet_cohort;
  ctlab::epi::SweetSpotOptions sweet_opts;
  auto* sweetspot = app.add_subcommand("sweetspot", "Least adoption that contains the outbreak");
  sweet_cohort.Add(sweetspot, false);
  sweetspot->add_option("--samples", sweet_opts.monotonicity_samples, "Grid points for the monotonicity check");
  sweetspot->add_option("--steps", sweet_opts.resolution_steps, "Bisection resolution is 1/steps");

  // uptake
  ctlab::epi::UptakeInputs uptake_in;
  auto* uptake = app.add_subcommand("uptake", "Share of smartphone owners who must install the app");
  uptake->add_option("--target", uptake_in.target_population_uptake, "Target population uptake");
  uptake->add_option("--penetration", uptake_in.smartphone_penetration, "Smartphone penetration");
  uptake->add_option("--dropout", uptake_in.dropout, "Share of installers lost to follow-up");

  // assess
  AssessOptions assess_opts;
  auto* assess = app.add_subcommand("assess", "Posterior and alerts for one case");
  assess->add_option("--evidence", assess_opts.evidence, "node=state (repeatable)");
  assess->add_option("--case", assess_opts.case_file, "Case JSON file");
  assess->add_option("--duration", assess_opts.duration, "Symptom duration in days");
  assess->add_option("--improving", assess_opts.improving, "yes, no or unknown");
  assess->add_option("--policy", assess_opts.policy_file, "Alert policy JSON file");
  assess->add_option("--alert-threshold", assess_opts.policy.alert_threshold, "COVID alert threshold");
  assess->add_option("--hosp-threshold", assess_opts.policy.hosp_threshold, "Hospitalization threshold on P(severe)");
  assess->add_option("--hosp-min-duration", assess_opts.policy.hosp_min_duration_days,
                     "Minimum symptom days for a hospitalization alert");
  assess->add_option("--top-k", assess_opts.top_k, "Next questions to list");

  // voi
  std::vector<std::string> voi_evidence;
  auto* voi = app.add_subcommand("voi", "Rank unanswered questions by information gain");
  voi->add_option("--evidence", voi_evidence, "node=state (repeatable)");

  // serve
  ServeOptions serve_opts;
  auto* serve = app.add_subcommand("serve", "Run the surveillance HTTP service");
  serve->add_option("--data-dir", serve_opts.data_dir, "Report log directory (default: $CTLAB_DATA_DIR or ctlab-data)");
  serve->add_option("--bind", serve_opts.bind, "host:port, port 0 picks one (default: $CTLAB_BIND_ADDR or 127.0.0.1:8080)");
  serve->add_option("--ui-dir", serve_opts.ui_dir, "Static files served under /ui (default: $CTLAB_UI_DIR)");
  serve->add_flag("--sync", serve_opts.sync, "fsync after every report");

  // heatmap
  HeatmapOptions heat;
  auto* heatmap = app.add_subcommand("heatmap", "Export a grid heatmap from a report log");
  heatmap->add_option("--data-dir", heat.data_dir, "Report log directory (default: $CTLAB_DATA_DIR or ctlab-data)");
  heatmap->add_option("--start", heat.start, "Window start, UTC seconds")->required();
  heatmap->add_option("--end", heat.end, "Window end (exclusive), UTC seconds")->required();
  heatmap->add_option("--cell", heat.cell, "Cell size in degrees");
  heatmap->add_option("--tau", heat.tau, "High-risk threshold");
  heatmap->add_option("--age", heat.age, "Restrict to one age group")->check(CLI::IsMember({"under65", "over65"}));

  // trace
  CohortOptions trace_cohort;
  GraphOptions trace_graph;
  TraceOptions trace_opts;
  auto* trace = app.add_subcommand("trace", "Trace contacts from index cases on a random contact graph");
  trace_cohort.Add(trace);
  trace_graph.Add(trace, 2000);
  trace->add_option("--strategy", trace_opts.strategy, "first_order, single_step, iterative or retrospective");
  trace->add_option("--index", trace_opts.index, "Index case ids")->delimiter(',');
  trace->add_option("--as-of", trace_opts.as_of, "Day at which tracing runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  std::cerr << ReproducibilityHeader(app) << std::endl;
  try {
    Output out;
    if (sim_cohort->parsed()) {
      out = CohortCommand(cohort_opts.Resolve());
    } else if (sim_agents->parsed()) {
      out = AgentsCommand(agent_cohort.Resolve(), agent_graph, agent_opts, g.seed);
    } else if (table1->parsed()) {
      out = Table1Command(table_cohort.Resolve(), adoptions, days);
    } else if (sweetspot->parsed()) {
      out = SweetSpotCommand(sweet_cohort.Resolve(), sweet_opts);
    } else if (uptake->parsed()) {
      out = UptakeCommand(uptake_in);
    } else if (assess->parsed()) {
      out = AssessCommand(g, assess_opts);
    } else if (voi->parsed()) {
      out = VoiCommand(g, voi_evidence);
    } else if (heatmap->parsed()) {
      out = HeatmapCommand(heat);
    } else if (trace->parsed()) {
      out = TraceCommand(trace_cohort.Resolve(), trace_graph, trace_opts, g.seed);
    } else if (serve->parsed()) {
      return ServeCommand(g, serve_opts, model_opt->count() > 0);
    }
    Emit(g, out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
