// rlvm: trace-driven slot simulator for data-center server consolidation.
// Subcommands generate workloads, run consolidation methods, train the
// selection policy, and produce comparison reports.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <thread>

#include "CLI11.hpp"
#include "rlvm/agent.hpp"
#include "rlvm/config.hpp"
#include "rlvm/episode.hpp"
#include "rlvm/error.hpp"
#include "rlvm/metrics.hpp"
#include "rlvm/svg.hpp"
#include "rlvm/util.hpp"

namespace {

using namespace rlvm;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
};

Config load_config(const CommonArgs& args) {
  return args.config_path.empty() ? Config() : Config::from_file(args.config_path);
}

ClusterConfig cluster_from_config(const Config& c) {
  ClusterConfig k;
  k.host_count = static_cast<int>(c.get_int("hosts.count", 0));
  k.capacity_mhz = c.get_double("hosts.capacity_mhz", k.capacity_mhz);
  k.base_power = c.get_double("hosts.base_power", k.base_power);
  k.bandwidth_kbps = c.get_double("hosts.bandwidth_kbps", k.bandwidth_kbps);
  k.slav_penalty_ratio = c.get_double("slav.penalty_ratio", k.slav_penalty_ratio);
  return k;
}

DetectionConfig detection_from_config(const Config& c) {
  DetectionConfig d;
  d.window = static_cast<int>(c.get_int("lr.window", d.window));
  d.safety = c.get_double("lr.safety", d.safety);
  return d;
}

PPOConfig ppo_from_config(const Config& c) {
  PPOConfig p;
  p.gamma = c.get_double("ppo.gamma", p.gamma);
  p.clip_eps = c.get_double("ppo.clip_eps", p.clip_eps);
  p.gae_lambda = c.get_double("ppo.gae_lambda", p.gae_lambda);
  p.learning_rate = c.get_double("ppo.learning_rate", p.learning_rate);
  p.epochs_per_update = static_cast<int>(c.get_int("ppo.epochs", p.epochs_per_update));
  p.minibatch_size = static_cast<int>(c.get_int("ppo.minibatch", p.minibatch_size));
  p.rollout_episodes = static_cast<int>(c.get_int("ppo.rollouts", p.rollout_episodes));
  p.reward_scale = c.get_double("ppo.reward_scale", p.reward_scale);
  p.entropy_coef = c.get_double("ppo.entropy_coef", p.entropy_coef);
  p.iterations = static_cast<int>(c.get_int("ppo.iterations", p.iterations));
  return p;
}

std::uint64_t effective_seed(const CommonArgs& args, const Config& c) {
  if (args.seed_given) return args.seed;
  return static_cast<std::uint64_t>(c.get_int("sim.seed", 0));
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "flat key=value configuration file");
  cmd->add_option("--out-dir", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "seed (overrides sim.seed)")
      ->each([&args](const std::string&) { args.seed_given = true; });
}

// ---- gen-request ----------------------------------------------------------

struct GenRequestArgs {
  CommonArgs common;
  std::string synth_pattern;
  std::string trace_dir;
  int vms = 0;
  int slots = 288;
  int window_start = 0;
  std::string name;
  std::string out_file;
  double amplitude = 1000.0;
  int period = 24;
  double duty = 0.5;
  double base_level = 0.0;
  double d_vm = 0.0;
  double ram_kb = 1048576.0;
  double noise_frac = 0.1;
  bool random_phase = false;
};

int cmd_gen_request(const GenRequestArgs& a) {
  if (a.synth_pattern.empty() == a.trace_dir.empty())
    throw Error(ErrorKind::kUsage, "gen-request needs exactly one of --synth or --trace-dir");
  std::uint64_t seed = effective_seed(a.common, load_config(a.common));
  RequestSet request;
  if (!a.trace_dir.empty()) {
    std::string name = a.name.empty() ? "request" : a.name;
    request = build_request(a.trace_dir, a.vms, a.window_start, seed, a.slots, name);
  } else {
    SynthSpec spec;
    if (a.synth_pattern == "constant") spec.pattern = SynthPattern::kConstant;
    else if (a.synth_pattern == "square-wave") spec.pattern = SynthPattern::kSquareWave;
    else if (a.synth_pattern == "sinusoid") spec.pattern = SynthPattern::kSinusoidNoise;
    else throw Error(ErrorKind::kUsage, "unknown synth pattern: " + a.synth_pattern);
    spec.vm_count = a.vms;
    spec.slot_count = a.slots;
    spec.amplitude_mhz = a.amplitude;
    spec.period_slots = a.period;
    spec.duty = a.duty;
    spec.base_mhz = a.base_level;
    spec.d_vm_mhz = a.d_vm;
    spec.ram_demand_kb = a.ram_kb;
    spec.noise_frac = a.noise_frac;
    spec.random_phase = a.random_phase;
    spec.seed = seed;
    spec.name = a.name.empty() ? "synth-" + a.synth_pattern : a.name;
    request = synth_request(spec);
  }
  std::filesystem::path out = a.out_file.empty()
                                  ? std::filesystem::path(a.common.out_dir) / (request.name + ".request")
                                  : std::filesystem::path(a.out_file);
  write_request_file(request, out);
  std::cout << "request " << request.name << ": " << request.profiles.size() << " VMs, "
            << request.slot_count << " slots, mean demand " << fmt_g(mean_demand_mhz(request), 6)
            << " MHz -> " << out.string() << "\n";
  return 0;
}

// ---- run / eval ------------------------------------------------------------

struct RunArgs {
  CommonArgs common;
  std::string request_file;
  std::string method = "lr-mmt-pabfd";
  std::string model_file;
  bool train_first = false;
};

struct CellResult {
  EpisodeMetrics metrics;
  std::string per_slot_path;
};

CellResult run_cell(std::shared_ptr<const RequestSet> request, Method method,
                    const ClusterConfig& cluster, const DetectionConfig& detection,
                    std::uint64_t seed, const PolicyParams* params,
                    const std::filesystem::path& out_dir) {
  EpisodeConfig cfg;
  cfg.method = method;
  cfg.cluster = cluster;
  cfg.detection = detection;
  cfg.seed = seed;
  cfg.params = params;
  EpisodeOutput episode = run_episode(request, cfg);
  CellResult cell;
  cell.metrics = summarize(episode.accounting, *request, episode.host_count);
  std::filesystem::path per_slot =
      out_dir / ("perslot-" + request->name + "-" + method_name(method) + "-s" +
                 std::to_string(seed) + ".csv");
  write_file_atomic(per_slot, per_slot_csv(cell.metrics));
  cell.per_slot_path = per_slot.string();
  return cell;
}

int cmd_run(const RunArgs& a) {
  Config config = load_config(a.common);
  Method method;
  if (!parse_method(a.method, method))
    throw Error(ErrorKind::kUsage, "unknown method: " + a.method);
  auto request = std::make_shared<const RequestSet>(read_request_file(a.request_file));
  ClusterConfig cluster = cluster_from_config(config);
  DetectionConfig detection = detection_from_config(config);
  std::uint64_t seed = effective_seed(a.common, config);

  PolicyParams params;
  if (method == Method::kRlPabfd) {
    if (!a.model_file.empty()) {
      params = load_params(a.model_file);
    } else if (a.train_first) {
      PPOConfig ppo = ppo_from_config(config);
      ppo.seed = seed;
      TrainResult trained = train(request, cluster, detection, ppo);
      params = std::move(trained.params);
      std::filesystem::path model_out = std::filesystem::path(a.common.out_dir) /
                                        ("model-" + request->name + "-s" + std::to_string(seed) + ".rlvm");
      save_params(params, model_out);
      std::cout << "trained model -> " << model_out.string() << "\n";
    } else {
      throw Error(ErrorKind::kUsage, "rl-pabfd needs --model or --train");
    }
  }

  CellResult cell = run_cell(request, method, cluster, detection, seed,
                             method == Method::kRlPabfd ? &params : nullptr, a.common.out_dir);
  std::string row = summary_csv_row(method_name(method), request->name, cell.metrics, seed);
  std::filesystem::path summary = std::filesystem::path(a.common.out_dir) /
                                  ("summary-" + request->name + "-" + method_name(method) + "-s" +
                                   std::to_string(seed) + ".csv");
  write_file_atomic(summary, std::string(kSummaryCsvHeader) + "\n" + row + "\n");
  std::cout << kSummaryCsvHeader << "\n" << row << "\n";
  return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  CommonArgs common;
  std::string request_file;
  std::string model_out;
  std::string curve_out;
  std::string resume_from;
  int iterations = -1;
  int rollouts = -1;
};

int cmd_train(const TrainArgs& a) {
  Config config = load_config(a.common);
  auto request = std::make_shared<const RequestSet>(read_request_file(a.request_file));
  ClusterConfig cluster = cluster_from_config(config);
  DetectionConfig detection = detection_from_config(config);
  PPOConfig ppo = ppo_from_config(config);
  ppo.seed = effective_seed(a.common, config);
  if (a.iterations > 0) ppo.iterations = a.iterations;
  if (a.rollouts > 0) ppo.rollout_episodes = a.rollouts;

  PolicyParams resumed;
  const PolicyParams* resume = nullptr;
  if (!a.resume_from.empty()) {
    resumed = load_params(a.resume_from);
    resume = &resumed;
  }
  TrainResult result = train(request, cluster, detection, ppo, resume);

  std::filesystem::path model_out = a.model_out.empty()
                                        ? std::filesystem::path(a.common.out_dir) / "policy.rlvm"
                                        : std::filesystem::path(a.model_out);
  std::filesystem::path curve_out = a.curve_out.empty()
                                        ? std::filesystem::path(a.common.out_dir) / "learning_curve.csv"
                                        : std::filesystem::path(a.curve_out);
  save_params(result.params, model_out);
  write_file_atomic(curve_out, learning_curve_csv(result.curve));
  std::cout << "trained " << ppo.iterations << " iterations ("
            << result.params.iterations_trained << " total) -> " << model_out.string() << "\n";
  if (!result.curve.empty())
    std::cout << "final mean_ec " << fmt_g(result.curve.back().mean_ec, 8) << ", mean_migrations "
              << fmt_g(result.curve.back().mean_migrations, 6) << " -> " << curve_out.string()
              << "\n";
  return 0;
}

// ---- compare ---------------------------------------------------------------

struct CompareArgs {
  CommonArgs common;
  std::vector<std::string> request_files;
  std::string methods_csv = "lr-mmt-random,lr-mmt-ff,lr-mmt-pabfd,rl-pabfd";
  std::string seeds_csv = "1";
};

int thread_budget(std::size_t cells) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RLVM_THREADS")) {
    auto v = parse_int(env);
    if (v && *v > 0) hw = static_cast<unsigned>(std::min<long long>(*v, 64));
  }
  return static_cast<int>(std::min<std::size_t>(hw, std::max<std::size_t>(cells, 1)));
}

int cmd_compare(const CompareArgs& a) {
  Config config = load_config(a.common);
  std::vector<Method> methods;
  for (auto name : split(a.methods_csv, ',')) {
    Method m;
    if (!parse_method(trim(name), m))
      throw Error(ErrorKind::kUsage, "unknown method: " + std::string(trim(name)));
    methods.push_back(m);
  }
  std::vector<std::uint64_t> seeds;
  for (auto s : split(a.seeds_csv, ',')) {
    auto v = parse_int(trim(s));
    if (!v || *v < 0) throw Error(ErrorKind::kUsage, "bad seed: " + std::string(s));
    seeds.push_back(static_cast<std::uint64_t>(*v));
  }
  if (a.request_files.empty()) throw Error(ErrorKind::kUsage, "compare needs --request");

  std::vector<std::shared_ptr<const RequestSet>> requests;
  for (const std::string& path : a.request_files)
    requests.push_back(std::make_shared<const RequestSet>(read_request_file(path)));

  ClusterConfig cluster = cluster_from_config(config);
  DetectionConfig detection = detection_from_config(config);
  PPOConfig ppo_base = ppo_from_config(config);
  std::filesystem::path out_dir(a.common.out_dir);

  struct Cell {
    std::size_t request_idx, method_idx, seed_idx;
    CellResult result;
    bool ok = false;
    std::string error;
    int error_code = 1;
  };
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < requests.size(); ++r)
    for (std::size_t m = 0; m < methods.size(); ++m)
      for (std::size_t s = 0; s < seeds.size(); ++s) cells.push_back({r, m, s, {}, false, "", 1});

  auto run_one = [&](Cell& cell) {
    try {
      auto request = requests[cell.request_idx];
      Method method = methods[cell.method_idx];
      std::uint64_t seed = seeds[cell.seed_idx];
      PolicyParams params;
      const PolicyParams* params_ptr = nullptr;
      if (method == Method::kRlPabfd) {
        PPOConfig ppo = ppo_base;
        ppo.seed = seed;
        TrainResult trained = train(request, cluster, detection, ppo);
        params = std::move(trained.params);
        save_params(params, out_dir / "models" /
                                ("model-" + request->name + "-s" + std::to_string(seed) + ".rlvm"));
        write_file_atomic(out_dir / "models" /
                              ("curve-" + request->name + "-s" + std::to_string(seed) + ".csv"),
                          learning_curve_csv(trained.curve));
        params_ptr = &params;
      }
      cell.result = run_cell(request, method, cluster, detection, seed, params_ptr, out_dir);
      cell.ok = true;
    } catch (const Error& e) {
      cell.error = e.what();
      cell.error_code = e.exit_code();
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell.error_code = 1;
    }
  };

  const int threads = thread_budget(cells.size());
  if (threads <= 1) {
    for (Cell& cell : cells) run_one(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_one(cells[i]);
        }
      });
    for (std::thread& th : pool) th.join();
  }

  // Combined summary, ordered by request, then method, then seed.
  std::string summary = kSummaryCsvHeader;
  summary += '\n';
  for (const Cell& cell : cells)
    if (cell.ok)
      summary += summary_csv_row(method_name(methods[cell.method_idx]),
                                 requests[cell.request_idx]->name, cell.result.metrics,
                                 seeds[cell.seed_idx]) +
                 "\n";
  write_file_atomic(out_dir / "summary.csv", summary);

  // Median over seeds per (request, method) drives the bar charts.
  auto median_of = [](std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };
  std::vector<std::string> method_names;
  for (Method m : methods) method_names.emplace_back(method_name(m));
  std::vector<BarGroup> ec_groups, slav_groups, mig_groups;
  for (std::size_t r = 0; r < requests.size(); ++r) {
    BarGroup ec{requests[r]->name, {}}, slav{requests[r]->name, {}}, mig{requests[r]->name, {}};
    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::vector<double> ecs, slavs, migs;
      for (const Cell& cell : cells)
        if (cell.ok && cell.request_idx == r && cell.method_idx == m) {
          ecs.push_back(cell.result.metrics.total_ec);
          slavs.push_back(cell.result.metrics.slav);
          migs.push_back(static_cast<double>(cell.result.metrics.migrations));
        }
      ec.values.push_back(median_of(ecs));
      slav.values.push_back(median_of(slavs));
      mig.values.push_back(median_of(migs));
    }
    ec_groups.push_back(std::move(ec));
    slav_groups.push_back(std::move(slav));
    mig_groups.push_back(std::move(mig));
  }
  write_svg(out_dir / "ec_total.svg",
            grouped_bar_svg("Total energy consumption", "energy units", method_names, ec_groups));
  write_svg(out_dir / "slav.svg",
            grouped_bar_svg("SLA violation", "SLAV", method_names, slav_groups));
  write_svg(out_dir / "migrations.svg",
            grouped_bar_svg("VM migrations", "count", method_names, mig_groups));

  // Per-slot lines use the first seed of each method.
  for (std::size_t r = 0; r < requests.size(); ++r) {
    std::vector<LineSeries> ec_lines, mig_lines;
    std::string backing = "method,slot,ec_total,migrations\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const Cell* first = nullptr;
      for (const Cell& cell : cells)
        if (cell.ok && cell.request_idx == r && cell.method_idx == m && cell.seed_idx == 0) {
          first = &cell;
          break;
        }
      if (first == nullptr) continue;
      LineSeries ec{method_names[m], {}}, mig{method_names[m], {}};
      for (const auto& row : first->result.metrics.per_slot) {
        ec.y.push_back(row.ec_total);
        mig.y.push_back(static_cast<double>(row.migrations));
        backing += method_names[m] + ',' + std::to_string(row.slot) + ',' +
                   fmt_double(row.ec_total) + ',' + std::to_string(row.migrations) + '\n';
      }
      ec_lines.push_back(std::move(ec));
      mig_lines.push_back(std::move(mig));
    }
    const std::string& name = requests[r]->name;
    write_svg(out_dir / ("perslot-ec-" + name + ".svg"),
              line_chart_svg("Energy per slot: " + name, "slot", "energy units", ec_lines));
    write_svg(out_dir / ("perslot-migrations-" + name + ".svg"),
              line_chart_svg("Migrations per slot: " + name, "slot", "count", mig_lines));
    write_file_atomic(out_dir / ("perslot-plot-" + name + ".csv"), backing);
  }

  std::cout << summary;
  int failures = 0, code = 0;
  for (const Cell& cell : cells)
    if (!cell.ok) {
      ++failures;
      if (code == 0) code = cell.error_code;
      std::cerr << "cell failed: request=" << requests[cell.request_idx]->name
                << " method=" << method_names[cell.method_idx]
                << " seed=" << seeds[cell.seed_idx] << ": " << cell.error << "\n";
    }
  if (failures > 0) {
    std::cerr << failures << " of " << cells.size() << " cells failed\n";
    return code == 0 ? 1 : code;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slot-based data-center consolidation simulator"};
  app.require_subcommand(1);

  GenRequestArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-request", "generate a workload request file");
  add_common(gen_cmd, gen.common);
  gen_cmd->add_option("--synth", gen.synth_pattern, "synthetic pattern: constant|square-wave|sinusoid");
  gen_cmd->add_option("--trace-dir", gen.trace_dir, "directory of per-VM trace files");
  gen_cmd->add_option("--vms", gen.vms, "number of VMs")->required();
  gen_cmd->add_option("--slots", gen.slots, "slots per episode");
  gen_cmd->add_option("--window-start", gen.window_start, "first trace sample of the window");
  gen_cmd->add_option("--name", gen.name, "request name");
  gen_cmd->add_option("--out", gen.out_file, "output request file");
  gen_cmd->add_option("--amplitude", gen.amplitude, "synthetic usage amplitude [MHz]");
  gen_cmd->add_option("--period", gen.period, "pattern period [slots]");
  gen_cmd->add_option("--duty", gen.duty, "square wave duty cycle");
  gen_cmd->add_option("--base-level", gen.base_level, "usage level between spikes [MHz]");
  gen_cmd->add_option("--d-vm", gen.d_vm, "declared demand [MHz], default base+amplitude");
  gen_cmd->add_option("--ram-kb", gen.ram_kb, "nominal RAM demand [KB]");
  gen_cmd->add_option("--noise-frac", gen.noise_frac, "sinusoid noise fraction");
  gen_cmd->add_flag("--random-phase", gen.random_phase, "randomize per-VM phase");

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate one method over a request");
  add_common(run_cmd, run.common);
  run_cmd->add_option("--request", run.request_file, "request file")->required();
  run_cmd->add_option("--method", run.method,
                      "lr-mmt-random|lr-mmt-ff|lr-mmt-pabfd|rl-pabfd");
  run_cmd->add_option("--model", run.model_file, "trained policy for rl-pabfd");
  run_cmd->add_flag("--train", run.train_first, "train the policy before running");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train the selection policy");
  add_common(train_cmd, train_args.common);
  train_cmd->add_option("--request", train_args.request_file, "request file")->required();
  train_cmd->add_option("--iterations", train_args.iterations, "training iterations");
  train_cmd->add_option("--rollouts", train_args.rollouts, "episodes per iteration");
  train_cmd->add_option("--out", train_args.model_out, "model output path");
  train_cmd->add_option("--curve", train_args.curve_out, "learning-curve CSV path");
  train_cmd->add_option("--resume", train_args.resume_from, "continue from a saved model");

  CompareArgs cmp;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "run a method/request/seed grid");
  add_common(cmp_cmd, cmp.common);
  cmp_cmd->add_option("--request", cmp.request_files, "request file (repeatable)")->required();
  cmp_cmd->add_option("--methods", cmp.methods_csv, "comma-separated method list");
  cmp_cmd->add_option("--seeds", cmp.seeds_csv, "comma-separated seed list");

  RunArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a trained policy");
  add_common(eval_cmd, eval_args.common);
  eval_cmd->add_option("--request", eval_args.request_file, "request file")->required();
  eval_cmd->add_option("--model", eval_args.model_file, "trained policy")->required();

  try {
    app.parse(argc, argv);
    if (gen_cmd->parsed()) return cmd_gen_request(gen);
    if (run_cmd->parsed()) return cmd_run(run);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (cmp_cmd->parsed()) return cmd_compare(cmp);
    if (eval_cmd->parsed()) {
      eval_args.method = "rl-pabfd";
      return cmd_run(eval_args);
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const rlvm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
