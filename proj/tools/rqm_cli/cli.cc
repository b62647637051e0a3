// Copyright 2026 The RQM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "output.h"
#include "rqm/accountant.h"
#include "rqm/errors.h"
#include "rqm/exact_distribution.h"
#include "rqm/pbm.h"
#include "rqm/selftest.h"
#include "rqm/simulator.h"

#ifndef RQM_VERSION
#define RQM_VERSION "0.0.0"
#endif

namespace rqm::cli {
namespace {

namespace fs = std::filesystem;

// Flags shared by every subcommand that builds a mechanism.
struct MechanismFlags {
  double c = 1.0;
  std::optional<double> delta;  // defaults to c
  int m = 16;
  double q = 0.42;
  double theta = 0.25;
  std::string pbm_support = "levels";

  void Register(CLI::App* app) {
    app->add_option("--c", c, "Clipping bound c")->capture_default_str();
    app->add_option("--delta", delta, "RQM range extension (default: c)");
    app->add_option("--m", m, "Number of quantization levels")
        ->capture_default_str();
    app->add_option("--q", q, "RQM interior level keep probability")
        ->capture_default_str();
    app->add_option("--theta", theta, "PBM theta")->capture_default_str();
    app->add_option("--pbm-support", pbm_support,
                    "PBM trials: levels (m trials) or matched (m-1 trials)")
        ->check(CLI::IsMember({"levels", "matched"}))
        ->capture_default_str();
  }

  RqmParams Rqm() const { return RqmParams(c, delta.value_or(c), m, q); }
  PbmParams Pbm() const {
    return PbmParams(c, theta, PbmTrialsFor(m, ParsePbmSupport(pbm_support)));
  }
};

double ParseOrder(const std::string& text) {
  char* end = nullptr;
  const double alpha = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') {
    throw ValidationError("order must be a number or inf, got '" + text + "'");
  }
  if (!(alpha > 1.0)) throw ValidationError("order alpha must be > 1");
  return alpha;
}

std::string SeedLine(std::uint64_t seed) {
  return "seed=" + std::to_string(seed);
}

std::string VersionLine() {
  return "format_version=" + std::to_string(kFormatVersion) +
         " tool=rqm " RQM_VERSION;
}

void Emit(const CsvTable& table, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    WriteCsv(table, out);
  } else {
    WriteCsvFile(table, path);
    out << "wrote " << path << '\n';
  }
}

// ---- pmf -------------------------------------------------------------------

struct PmfFlags {
  std::string mech = "rqm";
  double x = 0.0;
  MechanismFlags params;
  bool oracle = false;
  std::string out;
};

int RunPmf(const PmfFlags& f, std::ostream& out) {
  CsvTable table;
  table.metadata = {VersionLine(), SeedLine(0), "command=pmf"};
  table.header = {"index", "level", "probability"};
  if (f.mech == "rqm") {
    const RqmParams params = f.params.Rqm();
    const QuantizationGrid grid(params);
    const Pmf pmf = RqmPmf(f.x, params);
    std::optional<Pmf> oracle;
    if (f.oracle) {
      oracle = RqmPmfBruteForce(f.x, params);
      table.header.push_back("oracle");
    }
    table.metadata.push_back("params=" + params.ToString() +
                             " x=" + FormatDouble(f.x));
    for (int i = 0; i < pmf.size(); ++i) {
      table.rows.push_back({std::to_string(i), FormatDouble(grid.level(i)),
                            FormatDouble(pmf[i])});
      if (oracle) table.rows.back().push_back(FormatDouble((*oracle)[i]));
    }
  } else {
    if (f.oracle) {
      throw ValidationError("--oracle is available for --mech rqm only");
    }
    const PbmParams params = f.params.Pbm();
    const Pmf pmf = PbmPmf(f.x, params);
    table.metadata.push_back("params=" + params.ToString() +
                             " x=" + FormatDouble(f.x));
    for (int i = 0; i < pmf.size(); ++i) {
      table.rows.push_back({std::to_string(i),
                            FormatDouble(PbmDecode(i, params)),
                            FormatDouble(pmf[i])});
    }
  }
  Emit(table, f.out, out);
  return kExitOk;
}

// ---- bound -----------------------------------------------------------------

struct BoundFlags {
  MechanismFlags params;
  bool compare_numeric = false;
};

int RunBound(const BoundFlags& f, std::ostream& out) {
  const RqmParams params = f.params.Rqm();
  const double bound = MaxDivergenceBound(params);
  CsvTable table;
  table.metadata = {VersionLine(), SeedLine(0),
                    "command=bound params=" + params.ToString()};
  table.header = {"quantity", "value"};
  table.rows.push_back({"bound", FormatDouble(bound)});
  if (f.compare_numeric) {
    const double numeric = MaxDivergence(RqmPmf(params.c(), params),
                                         RqmPmf(-params.c(), params));
    table.rows.push_back({"max_divergence", FormatDouble(numeric)});
    table.rows.push_back({"margin", FormatDouble(bound - numeric)});
    if (!(numeric <= bound + 1e-9)) {
      WriteCsv(table, out);
      throw ConsistencyError("numeric max divergence exceeds the bound");
    }
  }
  WriteCsv(table, out);
  return kExitOk;
}

// ---- divergence ------------------------------------------------------------

struct DivergenceFlags {
  std::string mech = "both";
  std::string alpha = "2";
  int n = 1;
  std::optional<int> split_k;
  bool random_split = false;
  std::uint64_t seed = 0;
  MechanismFlags params;
  std::string out;
};

int RunDivergence(const DivergenceFlags& f, std::ostream& out) {
  const double alpha = ParseOrder(f.alpha);
  if (f.random_split && f.split_k) {
    throw ValidationError("--split-k and --random-split are exclusive");
  }
  NeighborPair pair;
  std::string split;
  if (f.random_split) {
    RngStream rng = RngStream::Derive(f.seed, StreamPurpose::kNeighbors,
                                      {static_cast<std::uint64_t>(f.n)});
    pair = RandomWorstCaseNeighbors(f.n, f.params.c, rng);
    split = "random";
  } else {
    const int k = f.split_k.value_or(f.n >= 1 ? DefaultSplit(f.n) : 0);
    pair = WorstCaseNeighbors(f.n, f.params.c, k);
    split = std::to_string(k);
  }
  std::vector<MechanismSpec> mechanisms;
  if (f.mech == "rqm" || f.mech == "both") mechanisms.push_back(f.params.Rqm());
  if (f.mech == "pbm" || f.mech == "both") mechanisms.push_back(f.params.Pbm());

  CsvTable table;
  table.metadata = {VersionLine(), SeedLine(f.seed),
                    "command=divergence n=" + std::to_string(f.n) +
                        " alpha=" + FormatDouble(alpha) + " split=" + split};
  table.header = {"mechanism", "alpha", "n", "epsilon"};
  for (const MechanismSpec& mech : mechanisms) {
    const bool is_rqm = std::holds_alternative<RqmParams>(mech);
    table.metadata.push_back(
        is_rqm ? std::get<RqmParams>(mech).ToString()
               : std::get<PbmParams>(mech).ToString());
    const double eps =
        AggregateDivergence({alpha, mech, pair.x, pair.x_prime});
    table.rows.push_back({is_rqm ? "rqm" : "pbm", FormatDouble(alpha),
                          std::to_string(f.n), FormatDouble(eps)});
  }
  Emit(table, f.out, out);
  return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepFlags {
  std::string axis = "devices";
  std::optional<double> from;
  std::optional<double> to;
  double step = 1.0;
  std::string alpha = "2";
  int n = 1;
  bool random_split = false;
  std::uint64_t seed = 0;
  int threads = 1;
  MechanismFlags params;
  std::string preset;
  std::string out;
  std::string out_dir;
};

CsvTable SweepTable(const SweepSpec& spec, const std::string& label) {
  const std::vector<SweepRow> rows = DivergenceSweep(spec);
  CsvTable table;
  table.metadata = {
      VersionLine(), SeedLine(spec.seed),
      "command=sweep " + label + " axis=" + std::string(SweepAxisName(spec.axis)) +
          " alpha=" + FormatDouble(spec.alpha) +
          " n=" + std::to_string(spec.devices) + " neighbors=" +
          (spec.neighbors == NeighborMode::kBalanced ? "balanced" : "random"),
      spec.rqm.ToString(), spec.pbm.ToString()};
  const char* column = spec.axis == SweepAxis::kDevices ? "n"
                       : spec.axis == SweepAxis::kOrder ? "alpha"
                                                        : "x";
  table.header = {column, "eps_rqm", "eps_pbm"};
  for (const SweepRow& r : rows) {
    table.rows.push_back({FormatDouble(r.axis_value), FormatDouble(r.eps_rqm),
                          FormatDouble(r.eps_pbm)});
  }
  return table;
}

int RunSweep(const SweepFlags& f, std::ostream& out) {
  const NeighborMode neighbors =
      f.random_split ? NeighborMode::kSeededRandom : NeighborMode::kBalanced;
  if (!f.preset.empty()) {
    const ComparisonPreset preset = ParseComparisonPreset(f.preset);
    const MechanismPair pair =
        PresetPair(preset, ParsePbmSupport(f.params.pbm_support));
    const std::string name(ComparisonPresetName(preset));
    struct Part {
      std::string file;
      SweepSpec spec;
    };
    const std::vector<Part> parts = {
        {name + "_devices.csv",
         {.axis = SweepAxis::kDevices, .values = AxisRange(1, 40, 1),
          .alpha = 2.0, .devices = 1, .rqm = pair.rqm, .pbm = pair.pbm,
          .neighbors = neighbors, .seed = f.seed, .threads = f.threads}},
        {name + "_order_n1.csv",
         {.axis = SweepAxis::kOrder, .values = AxisRange(2, 1000, 1),
          .alpha = 2.0, .devices = 1, .rqm = pair.rqm, .pbm = pair.pbm,
          .neighbors = neighbors, .seed = f.seed, .threads = f.threads}},
        {name + "_order_n40.csv",
         {.axis = SweepAxis::kOrder, .values = AxisRange(2, 1000, 1),
          .alpha = 2.0, .devices = 40, .rqm = pair.rqm, .pbm = pair.pbm,
          .neighbors = neighbors, .seed = f.seed, .threads = f.threads}},
    };
    for (const Part& part : parts) {
      const CsvTable table = SweepTable(part.spec, "preset=" + name);
      if (f.out_dir.empty()) {
        WriteCsv(table, out);
        out << '\n';
      } else {
        const fs::path path = fs::path(f.out_dir) / part.file;
        WriteCsvFile(table, path);
        out << "wrote " << path.string() << '\n';
      }
    }
    return kExitOk;
  }
  if (!f.from || !f.to) {
    throw ValidationError("sweep needs --from and --to (or --preset)");
  }
  const SweepSpec spec{.axis = ParseSweepAxis(f.axis),
                       .values = AxisRange(*f.from, *f.to, f.step),
                       .alpha = f.axis == "devices" || f.axis == "input"
                                    ? ParseOrder(f.alpha)
                                    : 2.0,
                       .devices = f.n,
                       .rqm = f.params.Rqm(),
                       .pbm = f.params.Pbm(),
                       .neighbors = neighbors,
                       .seed = f.seed,
                       .threads = f.threads};
  const CsvTable table = SweepTable(spec, "custom");
  if (!f.out_dir.empty()) {
    const fs::path path =
        fs::path(f.out_dir) / ("sweep_" + std::string(SweepAxisName(spec.axis)) +
                               ".csv");
    WriteCsvFile(table, path);
    out << "wrote " << path.string() << '\n';
  } else {
    Emit(table, f.out, out);
  }
  return kExitOk;
}

// ---- simulate --------------------------------------------------------------

struct SimulateFlags {
  std::vector<std::string> mechanisms = {"noisefree", "rqm", "pbm"};
  int devices = 100;
  int per_round = 10;
  int rounds = 500;
  double learning_rate = 0.5;
  std::string clip = "auto";
  int features = 2;
  int classes = 2;
  int samples = 50;
  double separation = 2.0;
  double heterogeneity = 0.0;
  std::uint64_t seed = 2026;
  std::optional<double> delta;
  int m = 16;
  double q = 0.42;
  double theta = 0.25;
  std::string pbm_support = "levels";
  int threads = 1;
  bool diagnostics = false;
  std::string out_dir;
};

nlohmann::json ConfigEcho(const SimConfig& base, const SimulateFlags& f,
                          const std::vector<SimConfig>& runs) {
  nlohmann::json mechs = nlohmann::json::object();
  for (const SimConfig& run : runs) {
    const std::string name = MechanismName(run.mechanism);
    nlohmann::json m = {{"name", name}};
    if (const auto* r = std::get_if<RqmParams>(&run.mechanism)) {
      m["c"] = r->c();
      m["delta"] = r->delta();
      m["m"] = r->levels();
      m["q"] = r->q();
    } else if (const auto* p = std::get_if<PbmParams>(&run.mechanism)) {
      m["c"] = p->c();
      m["theta"] = p->theta();
      m["trials"] = p->trials();
    }
    mechs[name] = m;
  }
  return {
      {"total_devices", base.total_devices},
      {"devices_per_round", base.devices_per_round},
      {"rounds", base.rounds},
      {"learning_rate", base.learning_rate},
      {"clip", base.clip},
      {"clip_mode", f.clip == "auto" ? "calibrated" : "fixed"},
      {"features", base.model.features},
      {"classes", base.model.classes},
      {"samples_per_device", base.data.samples_per_device},
      {"separation", base.data.separation},
      {"heterogeneity", base.data.heterogeneity},
      {"master_seed", base.master_seed},
      {"diagnostics", f.diagnostics},
      {"mechanisms", mechs},
  };
}

int RunSimulate(const SimulateFlags& f, std::ostream& out) {
  if (f.out_dir.empty()) throw ValidationError("simulate needs --out-dir");
  SimConfig base;
  base.total_devices = f.devices;
  base.devices_per_round = f.per_round;
  base.rounds = f.rounds;
  base.learning_rate = f.learning_rate;
  base.model = ModelSpec{f.features, f.classes};
  base.data = DatasetSpec{f.samples, f.separation, f.heterogeneity};
  base.master_seed = f.seed;
  base.Validate();
  if (f.clip == "auto") {
    base.clip = CalibrateClipping(base);
  } else {
    char* end = nullptr;
    base.clip = std::strtod(f.clip.c_str(), &end);
    if (f.clip.empty() || *end != '\0') {
      throw ValidationError("--clip must be a number or auto");
    }
  }
  base.Validate();

  std::vector<SimConfig> runs;
  for (const std::string& name : f.mechanisms) {
    SimConfig run = base;
    if (name == "rqm") {
      run.mechanism = RqmParams(base.clip, f.delta.value_or(base.clip), f.m, f.q);
    } else if (name == "pbm") {
      run.mechanism = PbmParams(base.clip, f.theta,
                                PbmTrialsFor(f.m, ParsePbmSupport(f.pbm_support)));
    } else {
      run.mechanism = StandardMechanism(name, base.clip);
    }
    for (const SimConfig& seen : runs) {
      if (seen.mechanism.index() == run.mechanism.index()) {
        throw ValidationError("mechanism '" + name + "' listed twice");
      }
    }
    run.Validate();
    runs.push_back(run);
  }
  if (runs.empty()) throw ValidationError("no mechanisms to simulate");

  const nlohmann::json config = ConfigEcho(base, f, runs);
  const std::string config_hash = GitBlobSha1(config.dump());
  const fs::path dir(f.out_dir);
  const std::string config_line = "config_hash=" + config_hash;

  CsvTable comparison;
  comparison.metadata = {VersionLine(), SeedLine(base.master_seed), config_line};
  comparison.header = {"mechanism", "final_loss", "final_accuracy",
                       "bits_per_device", "rounds"};
  std::vector<std::string> outputs;
  for (const SimConfig& run : runs) {
    const std::string name = MechanismName(run.mechanism);
    const auto start = std::chrono::steady_clock::now();
    const TrainingRun result = RunTraining(
        run, RunOptions{.threads = f.threads, .diagnostics = f.diagnostics});
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    CsvTable table;
    table.metadata = {VersionLine(), SeedLine(run.master_seed), config_line,
                      "mechanism=" + name};
    if (const auto* r = std::get_if<RqmParams>(&run.mechanism)) {
      table.metadata.push_back(r->ToString());
    } else if (const auto* p = std::get_if<PbmParams>(&run.mechanism)) {
      table.metadata.push_back(p->ToString());
    }
    table.header = {"round", "loss", "accuracy", "bits_per_device",
                    "mechanism", "seed"};
    if (f.diagnostics) table.header.push_back("decode_bias");
    for (const RoundMetrics& m : result.metrics) {
      table.rows.push_back({std::to_string(m.round), FormatDouble(m.loss),
                            FormatDouble(m.accuracy),
                            std::to_string(m.bits_per_device), name,
                            std::to_string(run.master_seed)});
      if (f.diagnostics) table.rows.back().push_back(FormatDouble(*m.decode_bias));
    }
    const std::string file = name + ".csv";
    WriteCsvFile(table, dir / file);
    outputs.push_back(file);
    const RoundMetrics& last = result.metrics.back();
    comparison.rows.push_back({name, FormatDouble(last.loss),
                               FormatDouble(last.accuracy),
                               std::to_string(last.bits_per_device),
                               std::to_string(run.rounds)});
    out << name << ": final loss " << last.loss << ", accuracy "
        << last.accuracy << " (" << seconds << " s)\n";
  }
  WriteCsvFile(comparison, dir / "comparison.csv");
  outputs.push_back("comparison.csv");

  const nlohmann::json manifest = {
      {"tool", "rqm"},
      {"tool_version", RQM_VERSION},
      {"format_version", kFormatVersion},
      {"config", config},
      {"config_hash", config_hash},
      {"outputs", outputs},
  };
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
  outputs.push_back("manifest.json");
  out << "wrote " << outputs.size() << " files to " << dir.string() << '\n';
  return kExitOk;
}

// ---- selftest --------------------------------------------------------------

int RunSelftestCommand(bool inject_fault, std::ostream& out) {
  const SelftestReport report = RunSelftest({.inject_fault = inject_fault});
  for (const SuiteResult& s : report.suites) {
    out << (s.passed ? "PASS " : "FAIL ") << s.name << " (" << s.checks
        << " checks)";
    if (!s.passed) out << ": " << s.counterexample;
    out << '\n';
  }
  out << (report.passed() ? "selftest passed" : "selftest FAILED") << " in "
      << report.seconds << " s\n";
  return report.passed() ? kExitOk : kExitSelftest;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app("Randomized quantization: exact PMFs, Renyi accounting and "
               "federated simulation",
               "rqm");
  app.set_config("--config", "", "INI file with [subcommand] sections");
  app.set_version_flag("--version", RQM_VERSION);
  app.require_subcommand(1);

  PmfFlags pmf;
  CLI::App* pmf_cmd = app.add_subcommand("pmf", "Exact output distribution");
  pmf_cmd->add_option("--mech", pmf.mech, "rqm or pbm")
      ->check(CLI::IsMember({"rqm", "pbm"}))
      ->capture_default_str();
  pmf_cmd->add_option("--x", pmf.x, "Input value in [-c, c]")->required();
  pmf.params.Register(pmf_cmd);
  pmf_cmd->add_flag("--oracle", pmf.oracle,
                    "Add a brute-force enumeration column (m <= 20)");
  pmf_cmd->add_option("--out", pmf.out, "Output CSV (default: stdout)");

  BoundFlags bound;
  CLI::App* bound_cmd =
      app.add_subcommand("bound", "Closed-form max-divergence bound for RQM");
  bound.params.Register(bound_cmd);
  bound_cmd->add_flag("--compare-numeric", bound.compare_numeric,
                      "Also evaluate the exact max divergence at x = +-c");

  DivergenceFlags div;
  CLI::App* div_cmd = app.add_subcommand(
      "divergence", "Renyi divergence of the aggregate on worst-case neighbors");
  div_cmd->add_option("--mech", div.mech, "rqm, pbm or both")
      ->check(CLI::IsMember({"rqm", "pbm", "both"}))
      ->capture_default_str();
  div_cmd->add_option("--alpha", div.alpha, "Order (> 1, or inf)")
      ->capture_default_str();
  div_cmd->add_option("--n", div.n, "Number of devices")->capture_default_str();
  div_cmd->add_option("--split-k", div.split_k,
                      "Other devices at +c (default: (n-1)/2)");
  div_cmd->add_flag("--random-split", div.random_split,
                    "Draw the other devices' signs from --seed");
  div_cmd->add_option("--seed", div.seed)->capture_default_str();
  div.params.Register(div_cmd);
  div_cmd->add_option("--out", div.out, "Output CSV (default: stdout)");

  SweepFlags sweep;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Divergence sweep, RQM vs PBM");
  sweep_cmd->add_option("--axis", sweep.axis, "devices, order or input")
      ->capture_default_str();
  sweep_cmd->add_option("--from", sweep.from);
  sweep_cmd->add_option("--to", sweep.to);
  sweep_cmd->add_option("--step", sweep.step)->capture_default_str();
  sweep_cmd->add_option("--alpha", sweep.alpha,
                        "Fixed order for the devices and input axes")
      ->capture_default_str();
  sweep_cmd->add_option("--n", sweep.n,
                        "Fixed device count for the order and input axes")
      ->capture_default_str();
  sweep_cmd->add_flag("--random-split", sweep.random_split);
  sweep_cmd->add_option("--seed", sweep.seed)->capture_default_str();
  sweep_cmd->add_option("--threads", sweep.threads)->capture_default_str();
  sweep.params.Register(sweep_cmd);
  sweep_cmd->add_option("--preset", sweep.preset,
                        "standard, wide or narrow comparison tables")
      ->check(CLI::IsMember({"standard", "wide", "narrow"}));
  sweep_cmd->add_option("--out", sweep.out, "Output CSV (default: stdout)");
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Output directory");

  SimulateFlags sim;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Federated training with noise-free, RQM and PBM updates");
  sim_cmd->add_option("--mechanisms", sim.mechanisms,
                      "Comma-separated subset of noisefree,rqm,pbm")
      ->delimiter(',')
      ->check(CLI::IsMember({"noisefree", "rqm", "pbm"}))
      ->capture_default_str();
  sim_cmd->add_option("--devices", sim.devices, "Total devices N")
      ->capture_default_str();
  sim_cmd->add_option("--per-round", sim.per_round, "Devices per round n")
      ->capture_default_str();
  sim_cmd->add_option("--rounds", sim.rounds, "Rounds T")->capture_default_str();
  sim_cmd->add_option("--lr", sim.learning_rate, "Server learning rate")
      ->capture_default_str();
  sim_cmd->add_option("--clip", sim.clip,
                      "Clipping bound, or auto (median |gradient| at w = 0)")
      ->capture_default_str();
  sim_cmd->add_option("--features", sim.features)->capture_default_str();
  sim_cmd->add_option("--classes", sim.classes)->capture_default_str();
  sim_cmd->add_option("--samples", sim.samples, "Samples per device")
      ->capture_default_str();
  sim_cmd->add_option("--separation", sim.separation)->capture_default_str();
  sim_cmd->add_option("--heterogeneity", sim.heterogeneity)
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--delta", sim.delta, "RQM range extension (default: c)");
  sim_cmd->add_option("--m", sim.m)->capture_default_str();
  sim_cmd->add_option("--q", sim.q)->capture_default_str();
  sim_cmd->add_option("--theta", sim.theta)->capture_default_str();
  sim_cmd->add_option("--pbm-support", sim.pbm_support)
      ->check(CLI::IsMember({"levels", "matched"}))
      ->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads)->capture_default_str();
  sim_cmd->add_flag("--diagnostics", sim.diagnostics,
                    "Record the per-round decode bias");
  sim_cmd->add_option("--out-dir", sim.out_dir)->required();

  bool inject_fault = false;
  CLI::App* self_cmd =
      app.add_subcommand("selftest", "Run the built-in invariant suites");
  self_cmd->add_flag("--inject-fault", inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*pmf_cmd) return RunPmf(pmf, out);
    if (*bound_cmd) return RunBound(bound, out);
    if (*div_cmd) return RunDivergence(div, out);
    if (*sweep_cmd) return RunSweep(sweep, out);
    if (*sim_cmd) return RunSimulate(sim, out);
    if (*self_cmd) return RunSelftestCommand(inject_fault, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SimulationError& e) {
    err << "simulation aborted at round " << e.round() << ", device "
        << e.device() << ": " << e.what() << '\n';
    return kExitConsistency;
  } catch (const ConsistencyError& e) {
    err << "consistency failure: " << e.what() << '\n';
    return kExitConsistency;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitConsistency;
  }
  return kExitValidation;
}

}  // namespace rqm::cli
