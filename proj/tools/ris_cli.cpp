// Command-line front end: degree-of-freedom queries, region export, one-shot
// precoding and decoding, and the Monte-Carlo experiment harness.
//
// Exit codes: 0 success, 1 solver-stall-dominated run (> 50% of trials
// stalled), 2 configuration or usage errors.

#include "ris/dof.hpp"
#include "ris/harness.hpp"
#include "ris/precoding.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

int g_exit_code = 0;

json load_json_file(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw std::invalid_argument("config file not found: " + path);
  }
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config file not readable: " + path);
  }
  json j;
  in >> j;
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  out << content;
}

std::string dof_limiter_label(const ris::DofSpec& spec) {
  switch (ris::dof_joint_limiter(spec)) {
    case ris::DofLimiter::kReceiver:
      return "receiver-limited: K";
    case ris::DofLimiter::kRis:
      return spec.r == 0 ? "RIS-limited: N" : "RIS-limited: N+r";
    case ris::DofLimiter::kInput:
      return spec.r == 0 ? "input-limited: M+N/2-1/2" : "input-limited: M+N/2";
  }
  return "";
}

// Shared flag bundle; each field applies to the subcommands that define it.
struct Flags {
  int m = 2;
  int n = 4;
  int k = 4;
  int rank_r = 0;
  double p = 1.0;
  double sigma2 = 1.0;
  std::uint64_t seed = 0;
  int trials = 200;
  double delta = 1e-3;
  int restarts = 4;
  int threads = 0;
  std::string config_path;
  std::string out_path;
  bool svg = false;
  int grid_res = 81;
  double grid_extent = 1.5;
  int n_min = 1;
  int n_max = 8;
  std::vector<int> k_list = {4};
  bool direct = false;
  std::string diag_path;
};

void add_experiment_options(CLI::App* cmd, Flags& f, bool grid_mode) {
  cmd->add_option("--m", f.m, "transmit antennas")->capture_default_str();
  cmd->add_option("--p", f.p, "transmit power")->capture_default_str();
  cmd->add_option("--sigma2", f.sigma2, "noise variance")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed")->capture_default_str();
  cmd->add_option("--trials", f.trials, "Monte-Carlo trials per point")
      ->capture_default_str();
  cmd->add_option("--delta", f.delta, "feasibility threshold on the residual")
      ->capture_default_str();
  cmd->add_option("--restarts", f.restarts, "solver restarts per trial")
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  cmd->add_option("--config", f.config_path, "JSON config file (flags win)");
  cmd->add_option("--out", f.out_path, "output CSV path");
  cmd->add_flag("--svg", f.svg, "also write an SVG plot");
  cmd->add_flag("--direct,!--no-direct", f.direct,
                "include a direct transmit-receive path")
      ->capture_default_str();
  if (grid_mode) {
    cmd->add_option("--n", f.n, "reflecting elements")->capture_default_str();
    cmd->add_option("--k", f.k, "receive antennas")->capture_default_str();
    cmd->add_option("--grid-res", f.grid_res, "grid points per axis")
        ->capture_default_str();
    cmd->add_option("--grid-extent", f.grid_extent,
                    "grid covers [-extent, extent]^2")
        ->capture_default_str();
  } else {
    cmd->add_option("--n-min", f.n_min, "smallest element count")
        ->capture_default_str();
    cmd->add_option("--n-max", f.n_max, "largest element count")
        ->capture_default_str();
    cmd->add_option("--k-list", f.k_list, "receive antenna counts")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--k", f.k, "single receive antenna count (shorthand for --k-list)")
        ->capture_default_str();
  }
}

ris::ExperimentConfig build_config(const CLI::App* cmd, const Flags& f,
                                   ris::ExperimentKind kind) {
  ris::ExperimentConfig cfg;
  if (cmd->count("--config")) {
    cfg = ris::config_from_json(load_json_file(f.config_path));
  }
  cfg.kind = kind;
  if (cmd->count("--m")) cfg.m = f.m;
  if (cmd->count("--p")) cfg.p = f.p;
  if (cmd->count("--sigma2")) cfg.sigma2 = f.sigma2;
  if (cmd->count("--seed")) cfg.seed = f.seed;
  if (cmd->count("--trials")) cfg.trials = f.trials;
  if (cmd->count("--delta")) cfg.delta = f.delta;
  if (cmd->count("--restarts")) cfg.restarts = f.restarts;
  if (cmd->count("--threads")) cfg.threads = f.threads;
  if (cmd->count("--direct") || cmd->count("--no-direct")) cfg.direct = f.direct;
  if (kind == ris::ExperimentKind::kFeasGrid) {
    if (cmd->count("--n")) cfg.n = f.n;
    if (cmd->count("--k")) cfg.k = f.k;
    if (cmd->count("--grid-res")) cfg.grid_res = f.grid_res;
    if (cmd->count("--grid-extent")) cfg.grid_extent = f.grid_extent;
  } else {
    if (cmd->count("--n-min")) cfg.n_min = f.n_min;
    if (cmd->count("--n-max")) cfg.n_max = f.n_max;
    if (cmd->count("--k-list")) {
      cfg.k_list = f.k_list;
    } else if (cmd->count("--k")) {
      cfg.k_list = {f.k};
    }
  }
  cfg.validate();
  return cfg;
}

std::string default_out(ris::ExperimentKind kind) {
  return std::string(ris::to_string(kind)) + ".csv";
}

void finish_run(const ris::ExperimentConfig& cfg, const std::string& out_path,
                const std::string& csv, const std::string& svg,
                bool want_svg, int stalled, int total, double wall_s) {
  write_file(out_path, csv);
  std::string meta_path = out_path + ".meta.json";
  write_file(meta_path,
             ris::metadata_json(cfg, stalled, total, wall_s).dump(2) + "\n");
  std::cout << "wrote " << out_path << " and " << meta_path << "\n";
  if (want_svg) {
    std::string svg_path =
        std::filesystem::path(out_path).replace_extension(".svg").string();
    write_file(svg_path, svg);
    std::cout << "wrote " << svg_path << "\n";
  }
  std::cout << "stalled trials: " << stalled << "/" << total << "\n";
  if (total > 0 && stalled * 2 > total) {
    std::cerr << "warning: more than half the trials stalled\n";
    g_exit_code = 1;
  }
}

void cmd_dof(const Flags& f) {
  ris::DofSpec spec(f.m, f.n, f.k, f.rank_r);
  std::cout << ris::dof_joint(spec).str() << " (" << dof_limiter_label(spec)
            << ")\n";
}

void cmd_region(const Flags& f, const CLI::App* cmd) {
  ris::DofSpec spec(f.m, f.n, f.k, f.rank_r);
  ris::DofRegion region = ris::dof_region(spec);
  std::cout << "constraints:\n";
  for (const ris::HalfPlane& hp : region.constraints) {
    std::cout << "  " << hp.a << "*dof_x + " << hp.b << "*dof_phase <= "
              << hp.c.str() << "\n";
  }
  std::cout << "shape: " << ris::to_string(region.shape()) << "\n";
  std::cout << "vertices:";
  for (const auto& v : region.vertices) {
    std::cout << " (" << v.first.str() << "," << v.second.str() << ")";
  }
  std::cout << "\n";
  if (cmd->count("--out")) {
    std::filesystem::path base(f.out_path);
    std::filesystem::path json_path = base, csv_path = base;
    if (base.extension() == ".json") {
      csv_path.replace_extension(".csv");
    } else if (base.extension() == ".csv") {
      json_path.replace_extension(".json");
    } else {
      json_path += ".json";
      csv_path += ".csv";
    }
    write_file(json_path.string(), ris::region_to_json(region).dump(2) + "\n");
    write_file(csv_path.string(), ris::region_vertices_csv(region));
    std::cout << "wrote " << json_path.string() << " and " << csv_path.string()
              << "\n";
  }
}

void cmd_precode(const Flags& f, const CLI::App* cmd) {
  ris::SlpProblem pb;
  ris::Rng rng(f.seed, 0);
  json effective;
  if (cmd->count("--config")) {
    pb = ris::problem_from_json(load_json_file(f.config_path));
    effective["source"] = f.config_path;
  } else {
    ris::RisChannel ch = ris::sample_channel(rng, f.m, f.n, f.k,
                                             f.direct, f.p, f.sigma2);
    pb.channel = std::move(ch);
    pb.target.resize(f.k);
    for (int i = 0; i < f.k; ++i) {
      pb.target[i] = std::polar(1.0, rng.uniform_angle(-M_PI, M_PI));
    }
    pb.mode = ris::SlpMode::kJoint;
    effective["source"] = "sampled";
  }
  effective["m"] = pb.channel.m();
  effective["n"] = pb.channel.n();
  effective["k"] = pb.channel.k();
  effective["p"] = pb.channel.p;
  effective["sigma2"] = pb.channel.sigma2;
  effective["mode"] = pb.mode == ris::SlpMode::kJoint ? "joint" : "phase-only";
  effective["seed"] = f.seed;
  effective["restarts"] = f.restarts;
  effective["delta"] = f.delta;
  std::cout << effective.dump(2) << "\n";

  ris::AlmParams params;
  std::ofstream diag;
  std::ostream* diag_ptr = nullptr;
  if (cmd->count("--diag")) {
    diag.open(f.diag_path);
    if (!diag) throw std::runtime_error("cannot open diag file: " + f.diag_path);
    diag_ptr = &diag;
  }
  ris::SlpSolution sol = ris::solve(pb, params, f.restarts, rng, diag_ptr);
  std::cout << "residual: " << sol.residual << "\n"
            << "feasible (delta=" << f.delta
            << "): " << (ris::is_feasible(sol, f.delta) ? "yes" : "no") << "\n"
            << "outer iters: " << sol.outer_iters
            << ", inner iters: " << sol.inner_iters << "\n"
            << "stop reason: " << ris::to_string(sol.stop_reason)
            << (sol.stalled ? " (stalled)" : "") << "\n";
  if (cmd->count("--out")) {
    write_file(f.out_path, ris::solution_to_json(sol).dump(2) + "\n");
    std::cout << "wrote " << f.out_path << "\n";
  }
  if (sol.stalled) g_exit_code = 1;
}

void cmd_decode(const Flags& f, const CLI::App* cmd) {
  if (!cmd->count("--config")) {
    throw std::invalid_argument(
        "decode needs --config with channel, y and constellation");
  }
  json j = load_json_file(f.config_path);
  ris::RisChannel ch = ris::channel_from_json(j);
  if (!j.contains("y") || !j.contains("constellation")) {
    throw std::invalid_argument("decode config needs 'y' and 'constellation'");
  }
  ris::CVec y(j["y"].size());
  for (std::size_t i = 0; i < j["y"].size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = {j["y"][i][0].get<double>(),
                                       j["y"][i][1].get<double>()};
  }
  ris::Constellation cands = ris::constellation_from_json(j["constellation"]);
  json effective = {{"source", f.config_path},
                    {"m", ch.m()},
                    {"n", ch.n()},
                    {"k", ch.k()},
                    {"candidates", cands.size()}};
  std::cout << effective.dump(2) << "\n";
  ris::MlDecodeResult res = ris::ml_decode(ch, y, cands);
  std::cout << "index: " << res.index << "\n"
            << "metric: " << res.metric << "\n"
            << "tie: " << (res.tie ? "yes" : "no") << "\n";
  if (cmd->count("--out")) {
    json out = {{"index", res.index},
                {"metric", res.metric},
                {"tie", res.tie}};
    write_file(f.out_path, out.dump(2) + "\n");
    std::cout << "wrote " << f.out_path << "\n";
  }
}

void cmd_feasgrid(const Flags& f, const CLI::App* cmd) {
  ris::ExperimentConfig cfg =
      build_config(cmd, f, ris::ExperimentKind::kFeasGrid);
  std::cout << ris::config_to_json(cfg).dump(2) << "\n";
  auto t0 = std::chrono::steady_clock::now();
  ris::FeasGridResult res = ris::run_feasgrid(cfg);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream csv;
  ris::write_feasgrid_csv(res, csv);
  std::string out = cmd->count("--out") ? f.out_path : default_out(cfg.kind);
  finish_run(cfg, out, csv.str(), ris::feasgrid_svg(res), f.svg,
             res.stalled_trials, res.total_trials, wall);
  std::cout << "feasible fraction: " << res.feasible_fraction() << "\n";
}

void cmd_transition(const Flags& f, const CLI::App* cmd) {
  ris::ExperimentConfig cfg =
      build_config(cmd, f, ris::ExperimentKind::kTransition);
  std::cout << ris::config_to_json(cfg).dump(2) << "\n";
  auto t0 = std::chrono::steady_clock::now();
  ris::TransitionResult res = ris::run_transition(cfg);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream csv;
  ris::write_transition_csv(res, csv);
  std::string out = cmd->count("--out") ? f.out_path : default_out(cfg.kind);
  finish_run(cfg, out, csv.str(), ris::transition_svg(res), f.svg,
             res.stalled_trials, res.total_trials, wall);
  for (const ris::PercentileRow& row : res.percentiles) {
    std::cout << "k=" << row.k << " level=" << row.level
              << ": n_first=" << row.n_first << " n_interp=" << row.n_interp
              << "\n";
  }
}

void cmd_percentiles(const Flags& f, const CLI::App* cmd) {
  ris::ExperimentConfig cfg =
      build_config(cmd, f, ris::ExperimentKind::kPercentiles);
  std::cout << ris::config_to_json(cfg).dump(2) << "\n";
  auto t0 = std::chrono::steady_clock::now();
  ris::TransitionResult res = ris::run_transition(cfg);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<ris::PercentileRow> rows =
      ris::percentile_table(res, {0.2, 0.5, 0.8});
  std::ostringstream csv;
  ris::write_percentiles_csv(rows, csv);
  std::string out = cmd->count("--out") ? f.out_path : default_out(cfg.kind);
  finish_run(cfg, out, csv.str(), ris::transition_svg(res), f.svg,
             res.stalled_trials, res.total_trials, wall);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reflecting-surface symbol-level precoding toolkit"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* dof = app.add_subcommand("dof", "joint signaling DoF for (m, n, k)");
  dof->add_option("--m", f.m, "transmit antennas")->required();
  dof->add_option("--n", f.n, "reflecting elements")->required();
  dof->add_option("--k", f.k, "receive antennas")->required();
  dof->add_option("--rank-r", f.rank_r, "direct-path rank")->capture_default_str();
  dof->callback([&f] { cmd_dof(f); });

  CLI::App* region =
      app.add_subcommand("region", "achievable (dof_x, dof_phase) region");
  region->add_option("--m", f.m, "transmit antennas")->required();
  region->add_option("--n", f.n, "reflecting elements")->required();
  region->add_option("--k", f.k, "receive antennas")->required();
  region->add_option("--rank-r", f.rank_r, "direct-path rank")->capture_default_str();
  region->add_option("--out", f.out_path, "write region JSON and vertex CSV");
  region->callback([&f, region] { cmd_region(f, region); });

  CLI::App* precode =
      app.add_subcommand("precode", "solve one precoding instance");
  precode->add_option("--config", f.config_path, "problem JSON (channel+target+mode)");
  precode->add_option("--m", f.m, "transmit antennas (sampled instance)")->capture_default_str();
  precode->add_option("--n", f.n, "reflecting elements (sampled instance)")->capture_default_str();
  precode->add_option("--k", f.k, "receive antennas (sampled instance)")->capture_default_str();
  precode->add_option("--p", f.p, "transmit power (sampled instance)")->capture_default_str();
  precode->add_option("--sigma2", f.sigma2, "noise variance (sampled instance)")->capture_default_str();
  precode->add_flag("--direct,!--no-direct", f.direct, "sampled instance direct path")->capture_default_str();
  precode->add_option("--seed", f.seed, "master seed")->capture_default_str();
  precode->add_option("--restarts", f.restarts, "solver restarts")->capture_default_str();
  precode->add_option("--delta", f.delta, "feasibility threshold")->capture_default_str();
  precode->add_option("--out", f.out_path, "write solution JSON");
  precode->add_option("--diag", f.diag_path, "write per-outer-iteration JSONL");
  precode->callback([&f, precode] { cmd_precode(f, precode); });

  CLI::App* decode =
      app.add_subcommand("decode", "maximum-likelihood decode from a candidate list");
  decode->add_option("--config", f.config_path, "JSON with channel, y, constellation");
  decode->add_option("--out", f.out_path, "write decode result JSON");
  decode->callback([&f, decode] { cmd_decode(f, decode); });

  CLI::App* feasgrid =
      app.add_subcommand("feasgrid", "feasibility map over a complex-plane grid");
  add_experiment_options(feasgrid, f, /*grid_mode=*/true);
  feasgrid->callback([&f, feasgrid] { cmd_feasgrid(f, feasgrid); });

  CLI::App* transition =
      app.add_subcommand("transition", "feasibility probability sweep over n");
  add_experiment_options(transition, f, /*grid_mode=*/false);
  transition->callback([&f, transition] { cmd_transition(f, transition); });

  CLI::App* percentiles = app.add_subcommand(
      "percentiles", "20/50/80% crossing table from a transition sweep");
  add_experiment_options(percentiles, f, /*grid_mode=*/false);
  percentiles->callback([&f, percentiles] { cmd_percentiles(f, percentiles); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return g_exit_code;
}
