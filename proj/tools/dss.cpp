// dss: train/quantize, compile, and simulate dual-side-sparse spiking
// networks, plus format studies and a pipeline-vs-reference checker.
//
// Exit codes: 0 success, 1 verification mismatch, 2 usage, 3 internal.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dss/compression.hpp"
#include "dss/dense_reference.hpp"
#include "dss/error.hpp"
#include "dss/format_analysis.hpp"
#include "dss/model_io.hpp"
#include "dss/pipeline.hpp"
#include "dss/random_nets.hpp"
#include "dss/toy_train.hpp"

namespace {

using nlohmann::json;

std::vector<std::uint32_t> parse_u32_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::uint32_t>(std::stoul(item)));
  }
  return out;
}

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw dss::FormatError("cannot open '" + path + "'");
  return json::parse(is);
}

dss::RealLayer real_layer_from_json(const json& j) {
  dss::RealLayer l;
  const std::string kind = j.value("kind", "conv");
  if (kind == "conv")
    l.kind = dss::LayerKind::kConv;
  else if (kind == "fc")
    l.kind = dss::LayerKind::kFc;
  else
    throw dss::FormatError("layer kind must be 'conv' or 'fc'");
  const std::string model = j.value("model", "lif");
  if (model == "lif")
    l.model = dss::NeuronModel::kLIF;
  else if (model == "if")
    l.model = dss::NeuronModel::kIF;
  else
    throw dss::FormatError("neuron model must be 'lif' or 'if'");
  const std::string padding = j.value("padding", "valid");
  if (padding == "valid")
    l.padding = dss::PaddingMode::kValid;
  else if (padding == "same")
    l.padding = dss::PaddingMode::kSame;
  else
    throw dss::FormatError("padding must be 'valid' or 'same'");
  l.maxpool = j.value("maxpool", false);
  l.c_i = j.at("c_i").get<std::uint16_t>();
  l.c_o = j.at("c_o").get<std::uint16_t>();
  l.k_h = j.at("k_h").get<std::uint16_t>();
  l.k_w = j.at("k_w").get<std::uint16_t>();
  l.t = j.value("t", 1);
  l.weights = j.at("weights").get<std::vector<double>>();
  l.bias = j.at("bias").get<std::vector<double>>();
  l.threshold = j.at("threshold").get<std::vector<double>>();
  return l;
}

void print_audit(const std::vector<dss::ChannelAudit>& audit) {
  for (const auto& a : audit)
    std::cout << "  layer " << a.layer << " channel " << a.channel
              << ": zero weights, accumulation " << (a.accumulation_active ? "active" : "idle")
              << ", rollout " << (a.fires_zero_input ? "fires" : "silent") << " -> "
              << (a.removed ? "removed" : "kept") << "\n";
}

int run_compress(const std::string& input_path, const std::string& out_path,
                 int bits, double lambda, int epochs, long long seed,
                 const std::string& report_path) {
  const json j = load_json(input_path);
  dss::QuantizedNetwork net;
  std::vector<dss::LayerReport> report;

  if (j.contains("layers")) {
    net.in_h = j.value("in_h", 1);
    net.in_w = j.value("in_w", 1);
    net.in_c = j.at("in_c").get<std::uint16_t>();
    net.t = j.at("t").get<std::uint16_t>();
    const dss::QuantConfig qc = dss::quant_config(bits < 0 ? 4 : bits);
    for (const json& lj : j.at("layers")) {
      dss::RealLayer rl = real_layer_from_json(lj);
      if (rl.t == 1 && net.t != 1) rl.t = net.t;
      net.layers.push_back(dss::quantize_layer(rl, qc));
    }
    dss::validate(net);
  } else if (j.contains("task") || j.contains("train")) {
    dss::SyntheticTaskConfig tc;
    const json task = j.value("task", json::object());
    tc.features = task.value("features", tc.features);
    tc.classes = task.value("classes", tc.classes);
    tc.samples_per_class = task.value("samples_per_class", tc.samples_per_class);
    tc.t = task.value("t", tc.t);
    tc.flip_prob = task.value("flip_prob", tc.flip_prob);
    tc.seed = task.value("seed", tc.seed);
    dss::ToyTrainConfig cfg;
    const json train = j.value("train", json::object());
    cfg.hidden = train.value("hidden", cfg.hidden);
    cfg.epochs = train.value("epochs", cfg.epochs);
    cfg.batch = train.value("batch", cfg.batch);
    cfg.lr = train.value("lr", cfg.lr);
    cfg.lambda = train.value("lambda", cfg.lambda);
    cfg.sigma = train.value("sigma", cfg.sigma);
    cfg.bits = train.value("bits", cfg.bits);
    cfg.seed = train.value("seed", cfg.seed);
    if (bits >= 0) cfg.bits = bits;
    if (lambda >= 0.0) cfg.lambda = lambda;
    if (epochs >= 0) cfg.epochs = static_cast<std::uint32_t>(epochs);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);

    const dss::SyntheticTask data = dss::make_synthetic_task(tc);
    dss::ToyTrainResult res = dss::toy_train_prune(data, cfg);
    std::cout << "trained " << res.net.layers.size() << " layers on " << data.count
              << " samples: loss " << res.final_loss << ", weight sparsity "
              << res.weight_sparsity_total << "\n";
    net = std::move(res.net);
    report = std::move(res.report);
  } else {
    std::cerr << "input JSON needs either a 'layers' array or a 'task'/'train' spec\n";
    return 2;
  }

  dss::PruneResult pruned = dss::prune_silent_channels(net);
  if (!pruned.audit.empty()) {
    std::cout << "silent-channel audit:\n";
    print_audit(pruned.audit);
  }
  std::vector<dss::LayerRuntime> rts(pruned.net.layers.size());
  dss::save_model_file(out_path, pruned.net, rts);
  std::cout << "wrote " << out_path << " (" << pruned.net.layers.size() << " layers)\n";
  if (!report_path.empty()) {
    std::ofstream os(report_path);
    if (!os) throw dss::FormatError("cannot open '" + report_path + "' for writing");
    dss::write_sparsity_csv(os, report);
  }
  return 0;
}

int run_compile(const std::string& model_path, const std::string& out_path,
                const std::string& parallelism, std::uint64_t budget,
                std::uint32_t p_ci, std::uint64_t seed) {
  dss::StoredModel m = dss::load_model_file(model_path);
  const std::size_t n = m.net.layers.size();

  if (parallelism == "auto") {
    std::vector<dss::LayerWork> works(n);
    std::vector<std::uint32_t> caps(n);
    const std::vector<double> densities =
        dss::estimate_spike_sparsity(m.net, 2, 4, 0.25, seed);
    std::uint32_t h = m.net.in_h, w = m.net.in_w;
    for (std::size_t i = 0; i < n; ++i) {
      const dss::QuantizedLayer& l = m.net.layers[i];
      const auto [oh, ow] = dss::conv_output_extents(l, h, w);
      works[i].mac = static_cast<double>(l.c_o) * l.c_i * oh * ow * l.k_h * l.k_w * l.t;
      works[i].d1 = std::max(densities[i], 1e-3);
      std::size_t nz = 0;
      for (std::int8_t v : l.weights) nz += v != 0;
      works[i].d2 =
          std::max(static_cast<double>(nz) / static_cast<double>(l.weights.size()), 1e-3);
      caps[i] = l.c_o;
      h = oh;
      w = ow;
      if (l.maxpool) {
        h /= 2;
        w /= 2;
      }
    }
    dss::BalanceGoal goal;
    goal.budget = budget;
    const dss::BalanceResult bal = dss::balance_parallelism(works, caps, goal);
    for (std::size_t i = 0; i < n; ++i)
      m.runtimes[i].p_co = static_cast<std::uint16_t>(bal.p_co[i]);
    std::cout << "balanced parallelism (max/min unit work " << bal.max_min_ratio << "):\n";
    for (std::size_t i = 0; i < n; ++i)
      std::cout << "  layer " << i << ": p_co " << bal.p_co[i] << ", unit work "
                << bal.unit_work[i] << "\n";
  } else {
    const std::vector<std::uint32_t> levels = parse_u32_list(parallelism);
    if (levels.size() != n) {
      std::cerr << "--parallelism needs " << n << " comma-separated levels or 'auto'\n";
      return 2;
    }
    for (std::size_t i = 0; i < n; ++i)
      m.runtimes[i].p_co = static_cast<std::uint16_t>(levels[i]);
  }
  if (p_ci > 0)
    for (auto& rt : m.runtimes) rt.p_ci = static_cast<std::uint16_t>(p_ci);

  dss::validate_runtimes(m.net, m.runtimes);
  dss::save_model_file(out_path, m.net, m.runtimes);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_simulate(const std::string& model_path, const std::string& input_path,
                 const std::string& report_path, const std::string& summary_path,
                 double clock_mhz) {
  const dss::StoredModel m = dss::load_model_file(model_path);
  const dss::SpikeTensor input = dss::load_spikes_file(input_path);
  dss::PipelineConfig cfg;
  cfg.layers = m.runtimes;
  cfg.clock_hz = clock_mhz * 1e6;
  const dss::SimulateResult res = dss::simulate(m.net, input, cfg);

  std::cout << "predicted class " << res.predicted_class << " (spike counts:";
  for (std::uint64_t c : res.class_counts) std::cout << ' ' << c;
  std::cout << ")\n";
  std::cout << "bottleneck " << res.bottleneck_cycles << " cycles; model-projected "
            << res.projected_outputs_per_s << " outputs/s at " << clock_mhz << " MHz\n";

  if (!report_path.empty()) {
    std::ofstream os(report_path);
    if (!os) throw dss::FormatError("cannot open '" + report_path + "' for writing");
    dss::write_stats_csv(os, res.stages);
  }
  if (!summary_path.empty()) {
    json out;
    out["predicted_class"] = res.predicted_class;
    out["class_counts"] = res.class_counts;
    out["bottleneck_cycles"] = res.bottleneck_cycles;
    out["clock_hz"] = cfg.clock_hz;
    out["projected_outputs_per_s"] = res.projected_outputs_per_s;
    out["throughput_basis"] = "model-projected";
    json layers = json::array();
    for (const auto& s : res.stages) {
      json lj;
      lj["layer"] = s.layer;
      lj["cycles"] = s.cycles;
      lj["issue_cycles"] = s.issue_cycles;
      lj["stall_cycles"] = s.stall_cycles;
      lj["bubble_cycles"] = s.bubble_cycles;
      lj["bias_cycles"] = s.bias_cycles;
      lj["weight_fetches"] = s.weight_fetches;
      lj["output_spikes"] = s.output_spikes;
      lj["input_density"] = s.input_density;
      lj["output_density"] = s.output_density;
      lj["peak_reuse_occupancy"] = s.peak_reuse_occupancy;
      lj["s_buf_bits"] = s.s_buf_bits;
      lj["v_buf"] = s.v_buf;
      layers.push_back(lj);
    }
    out["layers"] = layers;
    std::ofstream os(summary_path);
    if (!os) throw dss::FormatError("cannot open '" + summary_path + "' for writing");
    os << out.dump(2) << "\n";
  }
  return 0;
}

int run_analyze(const std::string& config, const std::string& segments,
                std::uint32_t trials, std::uint64_t seed, const std::string& grid,
                const std::string& out_path) {
  dss::AnalysisConfig cfg;
  const std::vector<std::uint32_t> c = parse_u32_list(config);
  if (c.size() != 7) {
    std::cerr << "--config needs t,c_o,c_i,f_ho,f_wo,k_h,k_w\n";
    return 2;
  }
  cfg.conv = {c[0], c[1], c[2], c[3], c[4], c[5], c[6]};
  cfg.segment_lens = parse_u32_list(segments);
  cfg.trials = trials;
  cfg.seed = seed;
  if (grid.empty()) {
    cfg.grid = dss::default_sparsity_grid();
  } else {
    cfg.grid.clear();
    std::stringstream ss(grid);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) cfg.grid.push_back(std::stod(item));
  }
  const std::vector<dss::RatioPoint> rows = dss::analyze_ratio(cfg);
  std::ofstream os(out_path);
  if (!os) throw dss::FormatError("cannot open '" + out_path + "' for writing");
  dss::write_ratio_csv(os, rows);
  std::cout << "wrote " << rows.size() << " ratio points to " << out_path << "\n";
  return 0;
}

int run_verify(const std::string& model_path, std::uint32_t trials, std::uint64_t seed,
               double density) {
  std::uint32_t checked = 0;
  if (!model_path.empty()) {
    const dss::StoredModel m = dss::load_model_file(model_path);
    dss::PipelineConfig cfg;
    cfg.layers = m.runtimes;
    for (std::uint32_t i = 0; i < trials; ++i) {
      const dss::SpikeTensor input = dss::random_spikes(
          m.net.in_h, m.net.in_w, m.net.in_c, m.net.t, density, seed + i);
      const dss::SimulateResult res = dss::simulate(m.net, input, cfg);
      if (!(res.output == dss::run_network_dense(m.net, input))) {
        std::cerr << "MISMATCH on input seed " << seed + i << "\n";
        return 1;
      }
      ++checked;
    }
  } else {
    static const double kSparsities[] = {0.0, 0.5, 0.85, 0.95};
    for (std::uint32_t i = 0; i < trials; ++i) {
      dss::RandomNetSpec spec;
      spec.seed = seed + i;
      spec.weight_sparsity = kSparsities[i % 4];
      const dss::QuantizedNetwork net = dss::make_random_network(spec);
      dss::PipelineConfig cfg;
      cfg.layers = dss::random_runtimes(net, seed + 31 * i);
      const double d = 0.05 + 0.35 * ((i % 5) / 4.0);
      const dss::SpikeTensor input =
          dss::random_spikes(net.in_h, net.in_w, net.in_c, net.t, d, seed + 977 * i);
      const dss::SimulateResult res = dss::simulate(net, input, cfg);
      if (!(res.output == dss::run_network_dense(net, input))) {
        std::cerr << "MISMATCH on trial " << i << " (seed " << spec.seed << ", sparsity "
                  << spec.weight_sparsity << ")\n";
        return 1;
      }
      ++checked;
    }
  }
  std::cout << "verified " << checked << " pipeline runs against the dense reference\n";
  return 0;
}

int run_gen_input(std::uint32_t h, std::uint32_t w, std::uint32_t c, std::uint32_t t,
                  double density, std::uint64_t seed, const std::string& out_path) {
  const dss::SpikeTensor tensor = dss::random_spikes(
      static_cast<std::uint16_t>(h), static_cast<std::uint16_t>(w),
      static_cast<std::uint16_t>(c), static_cast<std::uint16_t>(t), density, seed);
  dss::save_spikes_file(out_path, tensor);
  std::cout << "wrote " << out_path << " (" << tensor.size() << " positions, density "
            << tensor.density() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-side-sparse spiking network toolkit"};
  app.require_subcommand(1);

  // compress
  std::string c_input, c_out, c_report;
  int c_bits = -1, c_epochs = -1;
  double c_lambda = -1.0;
  long long c_seed = -1;
  CLI::App* compress = app.add_subcommand("compress", "train/quantize/prune to a model file");
  compress->add_option("--input", c_input, "JSON: real layers, or a task/train spec")
      ->required();
  compress->add_option("--out", c_out, "output model path")->required();
  compress->add_option("--bits", c_bits, "weight bit width (2..8)");
  compress->add_option("--lambda", c_lambda, "rewiring decay strength");
  compress->add_option("--epochs", c_epochs, "training epochs");
  compress->add_option("--seed", c_seed, "training seed");
  compress->add_option("--report", c_report, "per-layer sparsity CSV");

  // compile
  std::string k_model, k_out, k_par = "auto";
  std::uint64_t k_budget = 0, k_seed = 1;
  std::uint32_t k_pci = 0;
  CLI::App* compile = app.add_subcommand("compile", "assign per-layer parallelism");
  compile->add_option("--model", k_model, "input model path")->required();
  compile->add_option("--out", k_out, "output model path")->required();
  compile->add_option("--parallelism", k_par, "'auto' or comma list of p_co per layer");
  compile->add_option("--budget", k_budget, "total unit budget (0 = unconstrained)");
  compile->add_option("--p-ci", k_pci, "set every layer's input parallelism");
  compile->add_option("--seed", k_seed, "seed for the spike-density probe");

  // simulate
  std::string s_model, s_input, s_report, s_summary;
  double s_clock = 333.0;
  CLI::App* simulate = app.add_subcommand("simulate", "run the cycle-level pipeline");
  simulate->add_option("--model", s_model, "model path")->required();
  simulate->add_option("--input", s_input, "spike tensor path")->required();
  simulate->add_option("--report", s_report, "per-layer stats CSV");
  simulate->add_option("--summary", s_summary, "JSON summary path");
  simulate->add_option("--clock-mhz", s_clock, "clock for throughput projection");

  // analyze-formats
  std::string a_config = "4,64,32,16,16,3,3", a_segments = "16,32,64,128", a_grid, a_out;
  std::uint32_t a_trials = 100;
  std::uint64_t a_seed = 1;
  CLI::App* analyze = app.add_subcommand("analyze-formats",
                                         "cycle/storage study of spike encodings");
  analyze->add_option("--config", a_config, "t,c_o,c_i,f_ho,f_wo,k_h,k_w");
  analyze->add_option("--segments", a_segments, "bitmap segment lengths");
  analyze->add_option("--trials", a_trials, "trials per sparsity point");
  analyze->add_option("--seed", a_seed, "base seed");
  analyze->add_option("--grid", a_grid, "comma list of sparsity levels");
  analyze->add_option("--out", a_out, "output CSV")->required();

  // verify
  std::string v_model;
  std::uint32_t v_trials = 50;
  std::uint64_t v_seed = 1;
  double v_density = 0.25;
  CLI::App* verify = app.add_subcommand("verify", "pipeline vs dense reference");
  verify->add_option("--model", v_model, "check this model (default: random networks)");
  verify->add_option("--trials", v_trials, "number of runs");
  verify->add_option("--seed", v_seed, "base seed");
  verify->add_option("--density", v_density, "input spike density");

  // gen-input
  std::uint32_t g_h = 8, g_w = 8, g_c = 2, g_t = 4;
  double g_density = 0.25;
  std::uint64_t g_seed = 1;
  std::string g_out;
  CLI::App* gen = app.add_subcommand("gen-input", "write a random spike tensor");
  gen->add_option("--height", g_h, "spatial height");
  gen->add_option("--width", g_w, "spatial width");
  gen->add_option("--channels", g_c, "channels");
  gen->add_option("--timesteps", g_t, "timesteps");
  gen->add_option("--density", g_density, "spike density");
  gen->add_option("--seed", g_seed, "seed");
  gen->add_option("--out", g_out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*compress)
      return run_compress(c_input, c_out, c_bits, c_lambda, c_epochs, c_seed, c_report);
    if (*compile) return run_compile(k_model, k_out, k_par, k_budget, k_pci, k_seed);
    if (*simulate) return run_simulate(s_model, s_input, s_report, s_summary, s_clock);
    if (*analyze) return run_analyze(a_config, a_segments, a_trials, a_seed, a_grid, a_out);
    if (*verify) return run_verify(v_model, v_trials, v_seed, v_density);
    if (*gen) return run_gen_input(g_h, g_w, g_c, g_t, g_density, g_seed, g_out);
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const dss::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
