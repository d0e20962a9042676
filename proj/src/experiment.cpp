#include "d2d/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "d2d/scenarios.hpp"

namespace d2d {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Topology named_topology(const ExperimentConfig& config, const RadioParams& params) {
  const Scenario s = named_scenario(config.scenario);
  if (s.topology.num_uec() != static_cast<std::size_t>(config.num_uec) ||
      s.topology.num_ued() != static_cast<std::size_t>(config.num_ued))
    throw std::invalid_argument("scenario '" + config.scenario + "' has " + std::to_string(s.topology.num_uec()) +
                                " cellular and " + std::to_string(s.topology.num_ued()) +
                                " D2D UEs; set num_uec and num_ued to match");
  std::vector<Point> uec_rx;
  for (const Link& l : s.topology.uec) uec_rx.push_back(l.rx);
  return topology_from_positions(params, s.topology.bs, uec_rx, s.topology.ued);
}

RealizationResult run_realization(const ExperimentConfig& config, std::uint64_t k, Execution inner) {
  RealizationResult r;
  r.seed = config.seed + k;
  const CapGame game = build_game(config, r.seed);
  PotentialCache cache(game, config.potential_mc, r.seed);
  RunOptions options;
  options.sum_rate = [&cache](const AssignmentProfile& p) { return cache(p); };
  options.sample_cap = config.sample_cap;
  Trajectory traj = config.algorithm == "br"
                        ? run_br(game, config.br_samples, config.horizon_slots, r.seed, options)
                        : run_blla(game, config.temperature(), config.noise_spec(), config.xi, config.horizon_slots,
                                   r.seed, options);
  r.sum_rate.reserve(traj.slots.size() + 1);
  r.sum_rate.push_back(traj.initial_sum_rate);
  for (const SlotRecord& s : traj.slots) r.sum_rate.push_back(s.sum_rate);
  const std::size_t window = std::min(final_window_slots(config), r.sum_rate.size());
  const std::size_t first = r.sum_rate.size() - window;
  double total = 0.0;
  for (std::size_t t = first; t < r.sum_rate.size(); ++t) total += r.sum_rate[t];
  r.final_window_mean = total / static_cast<double>(window);
  r.final_channels = traj.final_profile().channel;

  if (config.track_optimum) {
    const CapGame exact = game.with_mode(UtilityMode::deterministic);
    const OptimumResult opt = brute_force_optimum(exact, inner);
    const ProfileSpace space(exact);
    std::size_t hits = 0;
    for (std::size_t t = first; t < r.sum_rate.size(); ++t) {
      const std::vector<int>& ch = t == 0 ? traj.initial.channel : traj.slots[t - 1].channels;
      AssignmentProfile p = traj.initial;
      p.channel = ch;
      if (std::binary_search(opt.argmax.begin(), opt.argmax.end(), space.index(p))) ++hits;
    }
    r.optimal_occupancy = static_cast<double>(hits) / static_cast<double>(window);
    r.phi_star = game.mode() == UtilityMode::deterministic
                     ? opt.phi_star
                     : brute_force_optimum(game, inner, config.potential_mc, r.seed).phi_star;
  }
  if (config.write_trajectories) r.trajectory = std::move(traj);
  return r;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void finish(OutputFiles& files, const ExperimentConfig& config) {
  {
    const auto path = files.dir / "config.txt";
    auto out = open_out(path);
    out << "# config_hash=" << files.config_hash << '\n' << serialize_config(config);
    close_out(out, path);
    files.files.push_back("config.txt");
  }
  const auto path = files.dir / "manifest.txt";
  auto out = open_out(path);
  out << "# config_hash=" << files.config_hash << '\n';
  for (const auto& f : files.files) out << f << '\n';
  close_out(out, path);
  files.files.push_back("manifest.txt");
}

}  // namespace

CapGame build_game(const ExperimentConfig& config, std::uint64_t seed) {
  const RadioParams params = config.radio_params();
  Topology topo;
  if (config.scenario == "random")
    topo = generate_topology(params, static_cast<std::size_t>(config.num_uec), static_cast<std::size_t>(config.num_ued),
                             config.topology_seed.value_or(seed));
  else if (config.scenario == "file")
    topo = load_topology(config.topology_file);
  else
    topo = named_topology(config, params);
  return CapGame(std::move(topo), params, config.mode());
}

std::size_t final_window_slots(const ExperimentConfig& config) {
  const double w = std::round(config.final_window_fraction * static_cast<double>(config.horizon_slots));
  return std::max<std::size_t>(1, static_cast<std::size_t>(w));
}

SweepPoint run_experiment(const ExperimentConfig& config, Execution exec) {
  config.validate();
  SweepPoint point;
  point.label = "run";
  point.config = config;
  point.config_hash = config_hash(config);
  point.first_seed = config.seed;
  point.last_seed = config.seed + config.realizations - 1;
  point.window_slots = std::min<std::size_t>(final_window_slots(config), config.horizon_slots + 1);
  const auto n = static_cast<std::size_t>(config.realizations);
  point.realizations.resize(n);
  if (exec == Execution::serial) {
    for (std::size_t k = 0; k < n; ++k) point.realizations[k] = run_realization(config, k, Execution::serial);
  } else {
    ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t k = 0; k < n; ++k)
      slot.run([&] { point.realizations[k] = run_realization(config, k, Execution::serial); });
    slot.rethrow();
  }
  // Ordered reduction so thread scheduling cannot change the bytes written.
  const std::size_t len = static_cast<std::size_t>(config.horizon_slots) + 1;
  point.mean_trace.assign(len, 0.0);
  double sum = 0.0, occ = 0.0, phi = 0.0;
  for (const auto& r : point.realizations) {
    for (std::size_t t = 0; t < len; ++t) point.mean_trace[t] += r.sum_rate[t];
    sum += r.final_window_mean;
    occ += r.optimal_occupancy;
    phi += r.phi_star;
  }
  const double rn = static_cast<double>(n);
  for (double& v : point.mean_trace) v /= rn;
  point.mean = sum / rn;
  double ss = 0.0;
  for (const auto& r : point.realizations) ss += (r.final_window_mean - point.mean) * (r.final_window_mean - point.mean);
  point.std_error = n > 1 ? std::sqrt(ss / (rn - 1.0)) / std::sqrt(rn) : 0.0;
  point.mean_occupancy = occ / rn;
  point.mean_phi_star = phi / rn;
  return point;
}

std::vector<SweepPoint> sweep_channels(const ExperimentConfig& config, const std::vector<int>& channel_counts,
                                       Execution exec) {
  if (channel_counts.empty()) throw std::invalid_argument("channel sweep needs at least one count");
  std::vector<SweepPoint> out;
  for (int c : channel_counts) {
    ExperimentConfig cfg = config;
    cfg.num_channels = c;
    cfg.validate();
  }
  for (int c : channel_counts) {
    ExperimentConfig cfg = config;
    cfg.num_channels = c;
    out.push_back(run_experiment(cfg, exec));
    out.back().label = "channels_" + std::to_string(c);
  }
  return out;
}

std::vector<SweepPoint> sweep_ues(const ExperimentConfig& config, const std::vector<int>& ued_counts, Execution exec) {
  if (ued_counts.empty()) throw std::invalid_argument("UE sweep needs at least one count");
  if (config.scenario != "random") throw std::invalid_argument("UE sweeps need scenario = random");
  for (int u : ued_counts) {
    ExperimentConfig cfg = config;
    cfg.num_ued = u;
    cfg.validate();
  }
  std::vector<SweepPoint> out;
  for (int u : ued_counts) {
    ExperimentConfig cfg = config;
    cfg.num_ued = u;
    out.push_back(run_experiment(cfg, exec));
    out.back().label = "ued_" + std::to_string(u);
  }
  return out;
}

SamplesReport samples_calc(double tau, double xi, const NoiseSpec& noise) {
  SamplesReport r;
  r.tau = tau;
  r.xi = xi;
  if (const auto* b = std::get_if<BoundedNoise>(&noise)) {
    r.noise = "bounded(width=" + num(b->width) + ")";
    r.samples = required_samples_bounded(tau, xi, b->width);
    r.numerator = std::log(4.0 / xi) + 2.0 / tau;
    r.denominator = 2.0 * (1.0 - xi) * (1.0 - xi) * tau * tau / (b->width * b->width);
    return r;
  }
  const auto& m = std::get<MgfNoise>(noise);
  const UnboundedSampleCount u = required_samples_unbounded(tau, xi, m);
  r.noise = m.label;
  r.samples = u.samples;
  r.numerator = u.numerator;
  r.denominator = u.denominator;
  r.theta_star = u.theta_star;
  r.theta_at_cap = u.theta_at_cap;
  return r;
}

void write_samples_report(std::ostream& out, const SamplesReport& r) {
  out << "quantity,value\n"
      << "tau," << num(r.tau) << '\n'
      << "xi," << num(r.xi) << '\n'
      << "noise," << r.noise << '\n'
      << "numerator," << num(r.numerator) << '\n'
      << "denominator," << num(r.denominator) << '\n'
      << "theta_star," << (std::isnan(r.theta_star) ? std::string("") : num(r.theta_star)) << '\n'
      << "theta_at_cap," << (r.theta_at_cap ? "true" : "false") << '\n'
      << "samples," << r.samples << '\n';
}

StationaryAnalysis analyze_stationary(const ExperimentConfig& config, const std::vector<double>& tau_grid,
                                      Execution exec) {
  config.validate();
  if (tau_grid.empty()) throw std::invalid_argument("tau grid is empty");
  const CapGame game =
      build_game(config, config.topology_seed.value_or(config.seed)).with_mode(UtilityMode::deterministic);
  StationaryAnalysis a;
  a.num_states = profile_space_size(game);
  if (a.num_states > max_kernel_states)
    throw std::length_error("instance has " + std::to_string(a.num_states) + " profiles, exact analysis supports " +
                            std::to_string(max_kernel_states));
  const ProfileSpace space(game);
  const std::vector<double> phi = potential_table(game, space, exec);
  for (double tau : tau_grid) {
    StationaryPoint p;
    p.tau = tau;
    const TransitionKernel kernel = exact_transition_matrix(game, tau, exec);
    p.direct = stationary_direct(kernel);
    p.gibbs = {gibbs_weights(phi, tau), tau, StationaryMethod::gibbs};
    p.residual = stationary_residual(p.direct.pi, kernel.P);
    p.gibbs_gap = (p.direct.pi - p.gibbs.pi).cwiseAbs().maxCoeff();
    if (space.size() <= max_tree_states) {
      p.tree = stationary_tree(kernel);
      p.has_tree = true;
      p.tree_gap = (p.direct.pi - p.tree.pi).cwiseAbs().maxCoeff();
    }
    a.points.push_back(std::move(p));
  }
  a.optimum = brute_force_optimum(game, exec);
  a.stability = stochastically_stable_states(game, tau_grid, exec);
  a.has_verdict = a.stability.has_verdict;
  a.verdict = a.has_verdict && a.stability.stable == a.optimum.argmax;
  return a;
}

OutputFiles write_experiment(const std::filesystem::path& dir, const std::string& name,
                             const std::vector<SweepPoint>& points, const ExperimentConfig& config) {
  prepare_dir(dir);
  OutputFiles files{dir, {}, config_hash(config)};
  for (const SweepPoint& p : points) {
    const std::string head = "# " + name + " point=" + p.label + " config_hash=" + p.config_hash + " seeds=" +
                             std::to_string(p.first_seed) + "-" + std::to_string(p.last_seed) +
                             " window_slots=" + std::to_string(p.window_slots) + "\n";
    {
      const std::string f = name + "_" + p.label + "_trace.csv";
      auto out = open_out(dir / f);
      out << head << "t,mean_sum_rate_bps\n";
      for (std::size_t t = 0; t < p.mean_trace.size(); ++t) out << t << ',' << num(p.mean_trace[t]) << '\n';
      close_out(out, dir / f);
      files.files.push_back(f);
    }
    {
      const std::string f = name + "_" + p.label + "_realizations.csv";
      auto out = open_out(dir / f);
      out << head << "k,seed,final_window_mean_bps,optimal_occupancy,phi_star_bps,final_profile\n";
      for (std::size_t k = 0; k < p.realizations.size(); ++k) {
        const auto& r = p.realizations[k];
        out << k << ',' << r.seed << ',' << num(r.final_window_mean) << ','
            << (std::isnan(r.optimal_occupancy) ? std::string("") : num(r.optimal_occupancy)) << ','
            << (std::isnan(r.phi_star) ? std::string("") : num(r.phi_star)) << ',' << format_channels(r.final_channels)
            << '\n';
      }
      close_out(out, dir / f);
      files.files.push_back(f);
    }
    if (p.config.write_trajectories)
      for (const auto& r : p.realizations) {
        const std::string f = name + "_" + p.label + "_trajectory_" + std::to_string(r.seed) + ".csv";
        auto out = open_out(dir / f);
        out << head;
        write_trajectory_csv(out, r.trajectory);
        close_out(out, dir / f);
        files.files.push_back(f);
      }
  }
  {
    const std::string f = name + "_summary.csv";
    auto out = open_out(dir / f);
    out << "# " << name << " config_hash=" << files.config_hash << '\n'
        << "point,config_hash,first_seed,last_seed,realizations,window_slots,mean_sum_rate_bps,std_error_bps,"
           "mean_optimal_occupancy,mean_phi_star_bps\n";
    for (const SweepPoint& p : points)
      out << p.label << ',' << p.config_hash << ',' << p.first_seed << ',' << p.last_seed << ','
          << p.realizations.size() << ',' << p.window_slots << ',' << num(p.mean) << ',' << num(p.std_error) << ','
          << (std::isnan(p.mean_occupancy) ? std::string("") : num(p.mean_occupancy)) << ','
          << (std::isnan(p.mean_phi_star) ? std::string("") : num(p.mean_phi_star)) << '\n';
    close_out(out, dir / f);
    files.files.push_back(f);
  }
  finish(files, config);
  return files;
}

OutputFiles write_samples(const std::filesystem::path& dir, const SamplesReport& report,
                          const ExperimentConfig& config) {
  prepare_dir(dir);
  OutputFiles files{dir, {}, config_hash(config)};
  const std::string f = "samples.csv";
  auto out = open_out(dir / f);
  out << "# samples-calc config_hash=" << files.config_hash << '\n';
  write_samples_report(out, report);
  close_out(out, dir / f);
  files.files.push_back(f);
  finish(files, config);
  return files;
}

OutputFiles write_stationary(const std::filesystem::path& dir, const StationaryAnalysis& a,
                             const ExperimentConfig& config) {
  prepare_dir(dir);
  OutputFiles files{dir, {}, config_hash(config)};
  const CapGame game =
      build_game(config, config.topology_seed.value_or(config.seed)).with_mode(UtilityMode::deterministic);
  const ProfileSpace space(game);
  const std::string head = "# analyze-stationary config_hash=" + files.config_hash + " placement_seed=" +
                           std::to_string(config.topology_seed.value_or(config.seed)) + "\n";
  {
    const std::string f = "stationary.csv";
    std::vector<StationaryDistribution> dists;
    for (const auto& p : a.points) {
      dists.push_back(p.direct);
      dists.push_back(p.gibbs);
      if (p.has_tree) dists.push_back(p.tree);
    }
    auto out = open_out(dir / f);
    out << head;
    write_distributions_csv(out, space, dists);
    close_out(out, dir / f);
    files.files.push_back(f);
  }
  {
    const std::string f = "stationary_checks.csv";
    auto out = open_out(dir / f);
    out << head << "tau,residual,gibbs_gap,tree_gap\n";
    for (const auto& p : a.points)
      out << num(p.tau) << ',' << num(p.residual) << ',' << num(p.gibbs_gap) << ','
          << (p.has_tree ? num(p.tree_gap) : std::string("")) << '\n';
    close_out(out, dir / f);
    files.files.push_back(f);
  }
  {
    const std::string f = "stability.csv";
    auto out = open_out(dir / f);
    out << head << "# verdict=" << (a.has_verdict ? (a.verdict ? "pass" : "fail") : "none") << '\n';
    for (const auto& w : a.stability.warnings) out << "# warning: " << w << '\n';
    out << "set,index,profile,phi_normalized\n";
    for (std::size_t idx : a.optimum.argmax)
      out << "optimum," << idx << ',' << format_channels(space.profile(idx).channel) << ',' << num(a.optimum.phi[idx])
          << '\n';
    for (std::size_t idx : a.stability.stable)
      out << "stable," << idx << ',' << format_channels(space.profile(idx).channel) << ',' << num(a.optimum.phi[idx])
          << '\n';
    close_out(out, dir / f);
    files.files.push_back(f);
  }
  finish(files, config);
  return files;
}

}  // namespace d2d
