#include "ris/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace ris {

namespace {

using nlohmann::json;

// Substream salts keep channel draws, grid trials and sweep trials on
// disjoint streams of the same master seed.
constexpr std::uint64_t kSaltChannel = 0x11;
constexpr std::uint64_t kSaltGrid = 0x22;
constexpr std::uint64_t kSaltTrial = 0x33;

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

json alm_to_json(const AlmParams& a) {
  return json{{"eps0", a.eps0},
              {"eps_min", a.eps_min},
              {"theta_eps", a.theta_eps},
              {"rho0", a.rho0},
              {"theta_rho", a.theta_rho},
              {"theta_sigma", a.theta_sigma},
              {"lambda0", a.lambda0},
              {"lambda_max", a.lambda_max},
              {"d_min", a.d_min},
              {"armijo_c", a.armijo_c},
              {"step_shrink", a.step_shrink},
              {"alpha_init", a.alpha_init},
              {"max_backtracks", a.max_backtracks},
              {"max_inner_iters", a.max_inner_iters},
              {"max_outer_iters", a.max_outer_iters}};
}

void alm_from_json(const json& j, AlmParams& a) {
  a.eps0 = j.value("eps0", a.eps0);
  a.eps_min = j.value("eps_min", a.eps_min);
  a.theta_eps = j.value("theta_eps", a.theta_eps);
  a.rho0 = j.value("rho0", a.rho0);
  a.theta_rho = j.value("theta_rho", a.theta_rho);
  a.theta_sigma = j.value("theta_sigma", a.theta_sigma);
  a.lambda0 = j.value("lambda0", a.lambda0);
  a.lambda_max = j.value("lambda_max", a.lambda_max);
  a.d_min = j.value("d_min", a.d_min);
  a.armijo_c = j.value("armijo_c", a.armijo_c);
  a.step_shrink = j.value("step_shrink", a.step_shrink);
  a.alpha_init = j.value("alpha_init", a.alpha_init);
  a.max_backtracks = j.value("max_backtracks", a.max_backtracks);
  a.max_inner_iters = j.value("max_inner_iters", a.max_inner_iters);
  a.max_outer_iters = j.value("max_outer_iters", a.max_outer_iters);
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kFeasGrid: return "feasgrid";
    case ExperimentKind::kTransition: return "transition";
    case ExperimentKind::kPercentiles: return "percentiles";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (m < 1 || k < 1 || n < 1) {
    throw std::invalid_argument("ExperimentConfig: m, k, n must be >= 1");
  }
  if (k_list.empty()) {
    throw std::invalid_argument("ExperimentConfig: k_list must be nonempty");
  }
  for (int kk : k_list) {
    if (kk < 1) throw std::invalid_argument("ExperimentConfig: k_list entries must be >= 1");
  }
  if (n_min < 1 || n_max < n_min) {
    throw std::invalid_argument("ExperimentConfig: need 1 <= n_min <= n_max");
  }
  if (p < 0.0 || sigma2 < 0.0) {
    throw std::invalid_argument("ExperimentConfig: p and sigma2 must be >= 0");
  }
  if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
  if (grid_res < 2) throw std::invalid_argument("ExperimentConfig: grid_res must be >= 2");
  if (!(grid_extent > 0.0)) {
    throw std::invalid_argument("ExperimentConfig: grid_extent must be > 0");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("ExperimentConfig: delta must be > 0");
  if (restarts < 1) throw std::invalid_argument("ExperimentConfig: restarts must be >= 1");
  if (threads < 0) throw std::invalid_argument("ExperimentConfig: threads must be >= 0");
  alm.validate();
}

json config_to_json(const ExperimentConfig& cfg) {
  return json{{"kind", to_string(cfg.kind)},
              {"m", cfg.m},
              {"k", cfg.k},
              {"k_list", cfg.k_list},
              {"n", cfg.n},
              {"n_min", cfg.n_min},
              {"n_max", cfg.n_max},
              {"direct", cfg.direct},
              {"p", cfg.p},
              {"sigma2", cfg.sigma2},
              {"trials", cfg.trials},
              {"grid_res", cfg.grid_res},
              {"grid_extent", cfg.grid_extent},
              {"delta", cfg.delta},
              {"restarts", cfg.restarts},
              {"seed", cfg.seed},
              {"threads", cfg.threads},
              {"alm", alm_to_json(cfg.alm)}};
}

ExperimentConfig config_from_json(const json& j) {
  static const char* known[] = {"kind", "m", "k", "k_list", "n", "n_min",
                                "n_max", "direct", "p", "sigma2", "trials",
                                "grid_res", "grid_extent", "delta", "restarts",
                                "seed", "threads", "alm"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* key : known) {
      if (it.key() == key) { ok = true; break; }
    }
    if (!ok) {
      throw std::invalid_argument("config: unknown key '" + it.key() + "'");
    }
  }
  ExperimentConfig cfg;
  if (j.contains("kind")) {
    std::string kind = j["kind"].get<std::string>();
    if (kind == "feasgrid") cfg.kind = ExperimentKind::kFeasGrid;
    else if (kind == "transition") cfg.kind = ExperimentKind::kTransition;
    else if (kind == "percentiles") cfg.kind = ExperimentKind::kPercentiles;
    else throw std::invalid_argument("config: unknown kind '" + kind + "'");
  }
  cfg.m = j.value("m", cfg.m);
  cfg.k = j.value("k", cfg.k);
  if (j.contains("k_list")) cfg.k_list = j["k_list"].get<std::vector<int>>();
  cfg.n = j.value("n", cfg.n);
  cfg.n_min = j.value("n_min", cfg.n_min);
  cfg.n_max = j.value("n_max", cfg.n_max);
  cfg.direct = j.value("direct", cfg.direct);
  cfg.p = j.value("p", cfg.p);
  cfg.sigma2 = j.value("sigma2", cfg.sigma2);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.grid_res = j.value("grid_res", cfg.grid_res);
  cfg.grid_extent = j.value("grid_extent", cfg.grid_extent);
  cfg.delta = j.value("delta", cfg.delta);
  cfg.restarts = j.value("restarts", cfg.restarts);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  if (j.contains("alm")) alm_from_json(j["alm"], cfg.alm);
  return cfg;
}

double FeasGridResult::feasible_fraction(double min_radius) const {
  int total = 0, feas = 0;
  for (const FeasPoint& pt : points) {
    if (std::hypot(pt.re, pt.im) < min_radius) continue;
    ++total;
    if (pt.feasible) ++feas;
  }
  return total == 0 ? 0.0 : static_cast<double>(feas) / total;
}

FeasGridResult run_feasgrid(const ExperimentConfig& cfg) {
  cfg.validate();
  Rng channel_rng(cfg.seed, substream(kSaltChannel, cfg.m, cfg.n, cfg.k));
  RisChannel ch = sample_channel(channel_rng, cfg.m, cfg.n, cfg.k, cfg.direct,
                                 cfg.p, cfg.sigma2);
  const int res = cfg.grid_res;
  const double ext = cfg.grid_extent;
  FeasGridResult result;
  result.config = cfg;
  result.points.resize(static_cast<std::size_t>(res) * res);
  std::vector<std::uint8_t> stalled(result.points.size(), 0);
  parallel_for(result.points.size(), cfg.threads, [&](std::size_t idx) {
    int i = static_cast<int>(idx) / res;  // re index
    int j = static_cast<int>(idx) % res;  // im index
    double re = -ext + 2.0 * ext * i / (res - 1);
    double im = -ext + 2.0 * ext * j / (res - 1);
    SlpProblem pb;
    pb.channel = ch;
    pb.target = CVec::Constant(cfg.k, std::complex<double>(re, im));
    pb.mode = SlpMode::kJoint;
    Rng rng(cfg.seed, substream(kSaltGrid, i, j));
    SlpSolution sol = solve(pb, cfg.alm, cfg.restarts, rng);
    result.points[idx] = {re, im, sol.residual, is_feasible(sol, cfg.delta)};
    stalled[idx] = sol.stalled ? 1 : 0;
  });
  result.total_trials = static_cast<int>(result.points.size());
  for (std::uint8_t s : stalled) result.stalled_trials += s;
  return result;
}

TransitionResult run_transition(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n_count = cfg.n_max - cfg.n_min + 1;
  const std::size_t per_point = static_cast<std::size_t>(cfg.trials);
  const std::size_t total =
      cfg.k_list.size() * static_cast<std::size_t>(n_count) * per_point;
  std::vector<std::uint8_t> success(total, 0);
  std::vector<std::uint8_t> stalled(total, 0);
  parallel_for(total, cfg.threads, [&](std::size_t idx) {
    const std::size_t point = idx / per_point;
    const int trial = static_cast<int>(idx % per_point);
    const int ki = static_cast<int>(point) / n_count;
    const int n = cfg.n_min + static_cast<int>(point) % n_count;
    const int k = cfg.k_list[ki];
    Rng rng(cfg.seed, substream(kSaltTrial, k, n, trial));
    RisChannel ch =
        sample_channel(rng, cfg.m, n, k, cfg.direct, cfg.p, cfg.sigma2);
    SlpProblem pb;
    pb.channel = std::move(ch);
    pb.target.resize(k);
    for (int i = 0; i < k; ++i) {
      pb.target[i] = std::polar(1.0, rng.uniform_angle(-M_PI, M_PI));
    }
    pb.mode = SlpMode::kJoint;
    SlpSolution sol = solve(pb, cfg.alm, cfg.restarts, rng);
    success[idx] = is_feasible(sol, cfg.delta) ? 1 : 0;
    stalled[idx] = sol.stalled ? 1 : 0;
  });
  TransitionResult result;
  result.config = cfg;
  result.total_trials = static_cast<int>(total);
  for (std::uint8_t s : stalled) result.stalled_trials += s;
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    for (int ni = 0; ni < n_count; ++ni) {
      const std::size_t base = (ki * n_count + ni) * per_point;
      int successes = 0;
      for (std::size_t t = 0; t < per_point; ++t) successes += success[base + t];
      TransitionRow row;
      row.m = cfg.m;
      row.k = cfg.k_list[ki];
      row.n = cfg.n_min + ni;
      row.direct = cfg.direct;
      row.trials = cfg.trials;
      row.successes = successes;
      row.prob = static_cast<double>(successes) / cfg.trials;
      result.rows.push_back(row);
    }
  }
  for (double level : {0.2, 0.5, 0.8}) {
    try {
      auto rows = percentile_table(result, {level});
      result.percentiles.insert(result.percentiles.end(), rows.begin(),
                                rows.end());
    } catch (const std::range_error&) {
      // level not bracketed by this n-range; derived entry omitted
    }
  }
  return result;
}

std::vector<PercentileRow> percentile_table(const TransitionResult& result,
                                            const std::vector<double>& levels) {
  std::vector<PercentileRow> out;
  for (int k : result.config.k_list) {
    std::vector<const TransitionRow*> rows;
    for (const TransitionRow& r : result.rows) {
      if (r.k == k) rows.push_back(&r);
    }
    for (double level : levels) {
      if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("percentile_table: levels must lie in (0,1)");
      }
      std::size_t first = rows.size();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i]->prob >= level) {
          first = i;
          break;
        }
      }
      if (first == rows.size() || first == 0) {
        throw std::range_error(
            "percentile_table: level " + std::to_string(level) +
            " not bracketed by the n-range for k=" + std::to_string(k));
      }
      const TransitionRow* lo = rows[first - 1];
      const TransitionRow* hi = rows[first];
      PercentileRow row;
      row.k = k;
      row.level = level;
      row.n_first = hi->n;
      row.n_interp = lo->n + (level - lo->prob) / (hi->prob - lo->prob) *
                                 (hi->n - lo->n);
      out.push_back(row);
    }
  }
  return out;
}

void write_feasgrid_csv(const FeasGridResult& result, std::ostream& out) {
  out << "re,im,residual,feasible\n";
  for (const FeasPoint& pt : result.points) {
    out << fmt("%.6f", pt.re) << ',' << fmt("%.6f", pt.im) << ','
        << fmt("%.12g", pt.residual) << ',' << (pt.feasible ? 1 : 0) << '\n';
  }
}

void write_transition_csv(const TransitionResult& result, std::ostream& out) {
  out << "m,k,n,direct,trials,successes,prob\n";
  for (const TransitionRow& r : result.rows) {
    out << r.m << ',' << r.k << ',' << r.n << ',' << (r.direct ? 1 : 0) << ','
        << r.trials << ',' << r.successes << ',' << fmt("%.6f", r.prob)
        << '\n';
  }
}

void write_percentiles_csv(const std::vector<PercentileRow>& rows,
                           std::ostream& out) {
  out << "k,level,n_first,n_interp\n";
  for (const PercentileRow& r : rows) {
    out << r.k << ',' << fmt("%g", r.level) << ',' << r.n_first << ','
        << fmt("%.6f", r.n_interp) << '\n';
  }
}

std::string feasgrid_svg(const FeasGridResult& result) {
  const int res = result.config.grid_res;
  const double cell = 10.0;
  const double size = res * cell;
  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" "
                "height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                size, size, size, size);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#1e3a8a\"/>\n";
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      const FeasPoint& pt = result.points[static_cast<std::size_t>(i) * res + j];
      if (!pt.feasible) continue;
      // x right with re, y up with im.
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" "
                    "height=\"%.1f\" fill=\"#facc15\"/>\n",
                    i * cell, (res - 1 - j) * cell, cell, cell);
      svg += buf;
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string transition_svg(const TransitionResult& result) {
  const double w = 640, h = 400, ml = 50, mb = 40, mt = 20, mr = 20;
  const int n_min = result.config.n_min, n_max = result.config.n_max;
  const double span = std::max(1, n_max - n_min);
  static const char* colors[] = {"#2563eb", "#dc2626", "#16a34a",
                                 "#9333ea", "#ea580c", "#0891b2"};
  auto xpos = [&](double n) { return ml + (n - n_min) / span * (w - ml - mr); };
  auto ypos = [&](double p) { return h - mb - p * (h - mb - mt); };
  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" "
                "height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                w, h, w, h);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"black\"/>\n",
                ml, h - mb, w - mr, h - mb);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"black\"/>\n",
                ml, mt, ml, h - mb);
  svg += buf;
  for (int n = n_min; n <= n_max; ++n) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" "
                  "text-anchor=\"middle\">%d</text>\n",
                  xpos(n), h - mb + 16, n);
    svg += buf;
  }
  int series = 0;
  for (int k : result.config.k_list) {
    std::string pointsAttr;
    for (const TransitionRow& r : result.rows) {
      if (r.k != k) continue;
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", xpos(r.n), ypos(r.prob));
      pointsAttr += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" "
                  "points=\"%s\"/>\n",
                  colors[series % 6], pointsAttr.c_str());
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" "
                  "fill=\"%s\">k=%d</text>\n",
                  w - mr - 45.0, mt + 16.0 * (series + 1), colors[series % 6], k);
    svg += buf;
    ++series;
  }
  svg += "</svg>\n";
  return svg;
}

nlohmann::json metadata_json(const ExperimentConfig& cfg, int stalled_trials,
                             int total_trials, double wall_time_s) {
  return json{{"config", config_to_json(cfg)},
              {"stalled_trials", stalled_trials},
              {"total_trials", total_trials},
              {"stalled_fraction",
               total_trials > 0
                   ? static_cast<double>(stalled_trials) / total_trials
                   : 0.0},
              {"wall_time_s", wall_time_s}};
}

}  // namespace ris
