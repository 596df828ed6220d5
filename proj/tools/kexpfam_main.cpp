// kexpfam command line: dataset generation, saddle-point / score-matching
// training, sampling (learned transport map or HMC), evaluation and report
// aggregation. Every command derives all randomness from --seed and writes a
// manifest.json listing its outputs.

#include "kexpfam.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace fs = std::filesystem;
using namespace kexpfam;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitResource = 4;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

std::vector<int> parse_cols(const std::string& spec) {
  std::vector<int> cols;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    cols.push_back(std::stoi(tok));
  }
  return cols;
}

std::string num_str(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ResourceError("cannot create output directory " + dir);
}

void append_metric_row(const std::string& path, const std::string& dataset,
                       const std::string& method, const std::string& metric,
                       double value, double stderr_v, uint64_t seed) {
  bool fresh = !fs::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw ResourceError("cannot open " + path);
  if (fresh) out << "dataset,method,metric,value,stderr,seed\n";
  out << dataset << ',' << method << ',' << metric << ',' << num_str(value)
      << ',' << num_str(stderr_v) << ',' << seed << '\n';
}

TrainConfig load_config(const std::string& path) {
  if (path.empty()) return TrainConfig{};
  return config_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// data gen / export

int cmd_data(CLI::App& app, int argc, char** argv) {
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  std::string name = "ring", out_dir = ".";
  int n = 500, d = 2;
  double noise_sd = 0.1;
  uint64_t seed = 0;
  gen->add_option("--name", name, "generator: ring | grid | two_moons");
  gen->add_option("--n", n, "sample count");
  gen->add_option("--d", d, "dimension");
  gen->add_option("--noise-sd", noise_sd, "ring radial noise sd");
  gen->add_option("--seed", seed, "seed");
  gen->add_option("--out", out_dir, "output directory");

  auto* exp =
      app.add_subcommand("export", "re-emit a dataset CSV (optionally normalized)");
  std::string data_path, exp_out = ".";
  bool normalize = false;
  exp->add_option("--data", data_path, "input CSV")->required();
  exp->add_flag("--normalize", normalize, "center and scale columns");
  exp->add_option("--out", exp_out, "output directory");

  app.require_subcommand(1);
  app.parse(argc, argv);

  RunManifest manifest;
  manifest.command_line = join_args(argc, argv);
  Stopwatch total;

  if (gen->parsed()) {
    ensure_out(out_dir);
    Dataset ds;
    if (name == "ring")
      ds = gen_ring(n, d, noise_sd, seed);
    else if (name == "grid")
      ds = gen_grid(n, d, seed);
    else if (name == "two_moons")
      ds = gen_two_moons(n, seed);
    else
      throw ContractError("unknown generator: " + name);
    std::string csv = out_dir + "/" + name + ".csv";
    save_csv(csv, ds.samples);
    manifest.seed = seed;
    manifest.config_hash_hex = config_hash(Json{{"command", "data gen"},
                                                {"name", name},
                                                {"n", n},
                                                {"d", d},
                                                {"noise_sd", noise_sd},
                                                {"seed", seed}});
    manifest.outputs.push_back(csv);
    manifest.add_timing("generate", total.seconds());
    manifest.write(out_dir + "/manifest.json");
    std::cout << "wrote " << csv << "\n";
    return 0;
  }

  ensure_out(exp_out);
  CsvFile csv = read_csv(data_path);
  Mat X = csv.values;
  if (normalize) X = fit_normalization(X).apply(X);
  std::string out_csv = exp_out + "/export.csv";
  save_csv(out_csv, X, csv.header);
  manifest.seed = 0;
  manifest.config_hash_hex = config_hash(
      Json{{"command", "data export"}, {"data", data_path}, {"normalize", normalize}});
  manifest.outputs.push_back(out_csv);
  manifest.add_timing("export", total.seconds());
  manifest.write(exp_out + "/manifest.json");
  std::cout << "wrote " << out_csv << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(CLI::App& app, int argc, char** argv) {
  std::string data_path, config_path, out_dir = ".", method = "dde";
  std::string x_cols_s, y_cols_s, backend_s, rho_schedule;
  bool conditional = false;
  std::optional<uint64_t> seed;
  std::optional<double> lambda, eta, tau0, k0, rho0, l0, clip_norm, inflation;
  std::optional<int> inner_iters, outer_iters, batch, supf, nups, max_terms, r,
      hidden_dim, depth, noise_dim, curve_every, curve_mc;
  std::optional<bool> normalize, cold_start;

  app.add_option("--data", data_path, "training CSV")->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--method", method, "dde | score_matching");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--conditional", conditional, "train p(y|x)");
  app.add_option("--x-cols", x_cols_s, "comma-separated x column indices");
  app.add_option("--y-cols", y_cols_s, "comma-separated y column indices");
  app.add_option("--seed", seed, "seed (overrides config)");
  app.add_option("--lambda", lambda, "dual scale");
  app.add_option("--eta", eta, "RKHS norm penalty");
  app.add_option("--inner-iters", inner_iters, "K");
  app.add_option("--outer-iters", outer_iters, "L");
  app.add_option("--batch", batch, "minibatch size B");
  app.add_option("--tau0", tau0, "inner step base");
  app.add_option("--k0", k0, "inner step decay constant");
  app.add_option("--rho0", rho0, "outer step base");
  app.add_option("--l0", l0, "outer step decay constant");
  app.add_option("--sampler-updates-per-f", supf, "");
  app.add_option("--nu-updates-per-sampler", nups, "");
  app.add_option("--clip-norm", clip_norm, "");
  app.add_option("--max-expansion-terms", max_terms, "");
  app.add_option("--backend", backend_s, "expansion | random_feature");
  app.add_option("--r", r, "random feature count");
  app.add_option("--hidden-dim", hidden_dim, "");
  app.add_option("--depth", depth, "");
  app.add_option("--noise-dim", noise_dim, "");
  app.add_option("--inflation", inflation, "");
  app.add_option("--normalize", normalize, "");
  app.add_option("--cold-start", cold_start, "");
  app.add_option("--rho-schedule", rho_schedule, "decay | constant_theory");
  app.add_option("--curve-every", curve_every, "");
  app.add_option("--curve-mc", curve_mc, "");
  app.parse(argc, argv);

  TrainConfig cfg = load_config(config_path);
  auto maybe = [](auto& opt, auto& field) {
    if (opt) field = *opt;
  };
  maybe(seed, cfg.seed);
  maybe(lambda, cfg.lambda);
  maybe(eta, cfg.eta);
  maybe(inner_iters, cfg.inner_iters);
  maybe(outer_iters, cfg.outer_iters);
  maybe(batch, cfg.batch);
  maybe(tau0, cfg.tau0);
  maybe(k0, cfg.k0);
  maybe(rho0, cfg.rho0);
  maybe(l0, cfg.l0);
  maybe(supf, cfg.sampler_updates_per_f);
  maybe(nups, cfg.nu_updates_per_sampler);
  maybe(clip_norm, cfg.clip_norm);
  maybe(max_terms, cfg.max_expansion_terms);
  maybe(r, cfg.feature_count);
  maybe(hidden_dim, cfg.hidden_dim);
  maybe(depth, cfg.depth);
  maybe(noise_dim, cfg.noise_dim);
  maybe(inflation, cfg.inflation);
  maybe(normalize, cfg.normalize);
  maybe(cold_start, cfg.cold_start);
  maybe(curve_every, cfg.curve_every);
  maybe(curve_mc, cfg.curve_mc);
  if (!backend_s.empty())
    cfg.backend = backend_s == "random_feature" ? RkhsBackend::random_feature
                                                : RkhsBackend::expansion;
  if (!rho_schedule.empty()) cfg.rho_schedule = rho_schedule;

  ensure_out(out_dir);
  CsvFile csv = read_csv(data_path);
  Dataset data;
  data.samples = csv.values;
  if (conditional) {
    data.x_cols = parse_cols(x_cols_s);
    data.y_cols = parse_cols(y_cols_s);
    require(data.conditional(), "conditional training needs --x-cols and --y-cols");
  }

  RunManifest manifest;
  manifest.command_line = join_args(argc, argv);
  manifest.seed = cfg.seed;
  manifest.config_hash_hex = config_hash(Json{{"command", "train"},
                                              {"method", method},
                                              {"data", data_path},
                                              {"conditional", conditional},
                                              {"x_cols", data.x_cols},
                                              {"y_cols", data.y_cols},
                                              {"config", config_to_json(cfg)}});
  Stopwatch total;

  if (method == "score_matching") {
    require(!conditional, "score_matching supports unconditional training only");
    Mat X = data.samples;
    std::optional<Normalization> norm;
    if (cfg.normalize) {
      norm = fit_normalization(X);
      X = norm->apply(X);
    }
    Dataset fit_data;
    fit_data.samples = X;
    KernelSpec kernel(median_bandwidth(X, derive_seed(cfg.seed, "median")),
                      static_cast<int>(X.cols()));
    ReferenceMeasure base = make_reference(X, cfg.inflation);
    ScoreMatchingModel model =
        fit_score_matching(fit_data, kernel, cfg.eta, base, cfg.lambda);
    Json j = score_model_to_json(model);
    j["normalization"] = norm ? normalization_to_json(*norm) : Json();
    j["seed"] = cfg.seed;
    std::string model_path = out_dir + "/model.json";
    write_json_file(model_path, j);
    manifest.outputs.push_back(model_path);
    manifest.add_timing("fit", total.seconds());
    manifest.write(out_dir + "/manifest.json");
    std::cout << "wrote " << model_path << "\n";
    return 0;
  }

  require(method == "dde", "unknown method: " + method);
  TrainedModel model = conditional ? train_conditional(data, cfg) : train(data, cfg);
  manifest.add_timing("train", total.seconds());

  std::string model_path = out_dir + "/model.json";
  write_json_file(model_path, model_to_json(model));
  std::string curve_path = out_dir + "/curve.csv";
  {
    std::ofstream out(curve_path);
    out << "outer_iter,objective,mmd_to_train\n";
    for (const auto& pt : model.curve)
      out << pt.outer_iter << ',' << num_str(pt.objective) << ','
          << num_str(pt.mmd_to_train) << '\n';
  }
  manifest.outputs.push_back(model_path);
  manifest.outputs.push_back(curve_path);
  manifest.write(out_dir + "/manifest.json");
  std::cout << "wrote " << model_path << " and " << curve_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sample

int cmd_sample(CLI::App& app, int argc, char** argv) {
  std::string model_path, out_dir = ".", method = "direct", condition_path;
  int n = 1000;
  uint64_t seed = 0;
  double hmc_step = 0.1;
  int hmc_leapfrog = 20, hmc_burnin = 500;
  app.add_option("--model", model_path, "model JSON")->required();
  app.add_option("--method", method, "direct | hmc");
  app.add_option("--n", n, "number of samples");
  app.add_option("--seed", seed, "seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--condition", condition_path, "CSV of x rows (conditional models)");
  app.add_option("--hmc-step", hmc_step, "initial HMC step size");
  app.add_option("--hmc-leapfrog", hmc_leapfrog, "leapfrog steps");
  app.add_option("--hmc-burnin", hmc_burnin, "burn-in iterations");
  app.parse(argc, argv);
  require(n >= 0, "--n must be nonnegative");

  ensure_out(out_dir);
  Json j = read_json_file(model_path);
  RunManifest manifest;
  manifest.command_line = join_args(argc, argv);
  manifest.seed = seed;
  manifest.config_hash_hex = config_hash(Json{{"command", "sample"},
                                              {"model", model_path},
                                              {"method", method},
                                              {"n", n},
                                              {"seed", seed}});
  std::string samples_path = out_dir + "/samples.csv";
  Stopwatch total;
  Mat draws;

  const std::string format = j.value("format", "");
  if (method == "direct") {
    require(format == "kexpfam-model",
            "direct sampling needs a transport-map model file");
    TrainedModel model = model_from_json(j);
    model.sampler.reseed_noise(derive_seed(seed, "sample"));
    if (model.mode == TrainMode::unconditional) {
      draws = sample_from_model(model, n);
    } else {
      require(!condition_path.empty(),
              "conditional model: provide --condition CSV of x rows");
      Mat X = read_csv(condition_path).values;
      draws = sample_conditional(model, X);
    }
  } else if (method == "hmc") {
    // HMC targets p_f = p0 exp(lambda f - A); any model with an evaluable f works.
    LogDensityGrad target;
    int dim = 0;
    std::optional<Normalization> norm;
    if (format == "kexpfam-model") {
      TrainedModel model = model_from_json(j);
      require(model.mode == TrainMode::unconditional,
              "hmc sampling supports unconditional models");
      dim = model.f.input_dim();
      if (model.normalization) norm = model.normalization;
      RkhsFunction f = model.f;
      ReferenceMeasure base = model.base;
      double lam = model.config.lambda;
      target = [f, base, lam](const Vec& x) {
        return std::make_pair(base.log_density(x) + lam * f.eval(x),
                              Vec(base.grad_log_density(x) + lam * f.grad_x(x)));
      };
    } else if (format == "kexpfam-score-model") {
      ScoreMatchingModel model = score_model_from_json(j);
      if (j.contains("normalization") && !j.at("normalization").is_null())
        norm = normalization_from_json(j.at("normalization"));
      dim = model.dim();
      ReferenceMeasure base = model.base;
      target = [model, base](const Vec& x) {
        return std::make_pair(
            base.log_density(x) + model.lambda * eval_score_matching_f(model, x),
            Vec(base.grad_log_density(x) +
                model.lambda * grad_score_matching_f(model, x)));
      };
    } else {
      throw ContractError("hmc: model file has no evaluable f");
    }
    if (n > 0) {
      HmcConfig cfg;
      cfg.step_size = hmc_step;
      cfg.leapfrog_steps = hmc_leapfrog;
      cfg.burn_in = hmc_burnin;
      cfg.chain_length = hmc_burnin + n;
      cfg.seed = seed;
      HmcResult result = hmc_sample(target, cfg, Vec::Zero(dim));
      draws = result.draws;
      manifest.add_timing("hmc_acceptance_rate", result.acceptance_rate);
    } else {
      draws = Mat(0, dim);
    }
    if (norm) draws = norm->invert(draws);
  } else {
    throw ContractError("unknown sampling method: " + method);
  }

  double secs = total.seconds();
  save_csv(samples_path, draws);
  manifest.outputs.push_back(samples_path);
  manifest.add_timing("sample", secs);
  manifest.write(out_dir + "/manifest.json");
  std::cout << "wrote " << samples_path << " (" << num_str(secs) << " s)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(CLI::App& app, int argc, char** argv) {
  std::string metric = "mmd", samples_path, data_path, model_path, out_dir = ".";
  std::string dataset_label, method_label;
  int n_mc = 10000;
  uint64_t seed = 0;
  app.add_option("--metric", metric, "mmd | nll");
  app.add_option("--samples", samples_path, "generated samples CSV (mmd)");
  app.add_option("--data", data_path, "reference/test CSV")->required();
  app.add_option("--model", model_path, "model JSON (nll)");
  app.add_option("--n-mc", n_mc, "Monte-Carlo draws per partition estimate");
  app.add_option("--seed", seed, "seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--dataset", dataset_label, "dataset label for the CSV row");
  app.add_option("--method-label", method_label, "method label for the CSV row");
  app.parse(argc, argv);

  ensure_out(out_dir);
  if (dataset_label.empty()) dataset_label = fs::path(data_path).stem().string();
  RunManifest manifest;
  manifest.command_line = join_args(argc, argv);
  manifest.seed = seed;
  Stopwatch total;
  Json report;
  std::string metrics_path = out_dir + "/metrics.csv";

  if (metric == "mmd") {
    require(!samples_path.empty(), "mmd needs --samples");
    if (method_label.empty()) method_label = fs::path(samples_path).stem().string();
    Mat X = read_csv(samples_path).values;
    Mat Y = read_csv(data_path).values;
    MmdReport rep = mmd_median_kernel(X, Y, seed);
    report = Json{{"metric", "mmd"},
                  {"mmd_biased", rep.mmd_biased},
                  {"mmd_unbiased", rep.mmd_unbiased},
                  {"kernel_bandwidth_sq", rep.kernel.bandwidth_sq},
                  {"n_x", rep.n_x},
                  {"n_y", rep.n_y}};
    append_metric_row(metrics_path, dataset_label, method_label, "mmd_unbiased",
                      rep.mmd_unbiased, 0.0, seed);
    append_metric_row(metrics_path, dataset_label, method_label, "mmd_biased",
                      rep.mmd_biased, 0.0, seed);
  } else if (metric == "nll") {
    require(!model_path.empty(), "nll needs --model");
    if (method_label.empty()) method_label = fs::path(model_path).stem().string();
    TrainedModel model = model_from_json(read_json_file(model_path));
    Dataset test;
    test.samples = read_csv(data_path).values;
    NllReport rep = nll_conditional(model, test, n_mc, seed);
    report = Json{{"metric", "nll"},
                  {"mean_nll", rep.mean_nll},
                  {"std_err", rep.std_err}};
    append_metric_row(metrics_path, dataset_label, method_label, "nll",
                      rep.mean_nll, rep.std_err, seed);
  } else {
    throw ContractError("unknown metric: " + metric);
  }

  manifest.config_hash_hex = config_hash(Json{{"command", "eval"},
                                              {"metric", metric},
                                              {"samples", samples_path},
                                              {"data", data_path},
                                              {"model", model_path},
                                              {"n_mc", n_mc},
                                              {"seed", seed}});
  std::string report_path = out_dir + "/metrics.json";
  write_json_file(report_path, report);
  manifest.outputs.push_back(report_path);
  manifest.outputs.push_back(metrics_path);
  manifest.add_timing("eval", total.seconds());
  manifest.write(out_dir + "/manifest.json");
  std::cout << report.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(CLI::App& app, int argc, char** argv) {
  std::vector<std::string> metric_files, curve_files;
  std::string out_dir = ".";
  app.add_option("--metrics", metric_files, "metrics CSV files")->required();
  app.add_option("--curves", curve_files, "training-curve CSV files");
  app.add_option("--out", out_dir, "output directory");
  app.parse(argc, argv);

  ensure_out(out_dir);
  RunManifest manifest;
  manifest.command_line = join_args(argc, argv);
  Stopwatch total;

  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<double>>
      groups;
  for (const auto& path : metric_files) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string dataset, method, metric, value, stderr_s, seed_s;
      std::getline(ss, dataset, ',');
      std::getline(ss, method, ',');
      std::getline(ss, metric, ',');
      std::getline(ss, value, ',');
      std::getline(ss, stderr_s, ',');
      std::getline(ss, seed_s, ',');
      groups[{dataset, method, metric}].push_back(std::stod(value));
    }
  }
  if (groups.empty()) throw ContractError("report: no metric rows found");

  std::string table_path = out_dir + "/table.md";
  std::string summary_path = out_dir + "/summary.csv";
  {
    std::ofstream md(table_path);
    std::ofstream sum(summary_path);
    md << "| dataset | method | metric | mean | std | runs |\n";
    md << "|---|---|---|---|---|---|\n";
    sum << "dataset,method,metric,mean,std,runs\n";
    for (const auto& [key, vals] : groups) {
      const auto& [dataset, method, metric] = key;
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double var = 0.0;
      for (double v : vals) var += (v - mean) * (v - mean);
      double sd = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1)) : 0.0;
      md << "| " << dataset << " | " << method << " | " << metric << " | "
         << num_str(mean) << " | " << num_str(sd) << " | " << vals.size()
         << " |\n";
      sum << dataset << ',' << method << ',' << metric << ',' << num_str(mean)
          << ',' << num_str(sd) << ',' << vals.size() << '\n';
    }
  }
  manifest.outputs.push_back(table_path);
  manifest.outputs.push_back(summary_path);

  // Mean training curve across runs: XY data for convergence plots.
  if (!curve_files.empty()) {
    std::map<int, std::pair<double, int>> mmd_acc;
    std::map<int, std::pair<double, int>> obj_acc;
    for (const auto& path : curve_files) {
      std::ifstream in(path);
      if (!in) throw ResourceError("cannot open " + path);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string it_s, obj_s, mmd_s;
        std::getline(ss, it_s, ',');
        std::getline(ss, obj_s, ',');
        std::getline(ss, mmd_s, ',');
        int it = std::stoi(it_s);
        obj_acc[it].first += std::stod(obj_s);
        obj_acc[it].second += 1;
        mmd_acc[it].first += std::stod(mmd_s);
        mmd_acc[it].second += 1;
      }
    }
    std::string curve_path = out_dir + "/curve_mean.csv";
    std::ofstream out(curve_path);
    out << "outer_iter,objective_mean,mmd_to_train_mean\n";
    for (const auto& [it, acc] : obj_acc) {
      out << it << ',' << num_str(acc.first / acc.second) << ','
          << num_str(mmd_acc[it].first / mmd_acc[it].second) << '\n';
    }
    manifest.outputs.push_back(curve_path);
  }

  manifest.config_hash_hex = config_hash(
      Json{{"command", "report"}, {"metrics", metric_files}, {"curves", curve_files}});
  manifest.add_timing("report", total.seconds());
  manifest.write(out_dir + "/manifest.json");
  std::cout << "wrote " << table_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: kexpfam {data|train|sample|eval|report} [flags]\n";
    return kExitUsage;
  }
  std::string command = argv[1];
  CLI::App app{"kernel exponential family estimation via saddle-point MLE"};
  try {
    if (command == "data") return cmd_data(app, argc - 1, argv + 1);
    if (command == "train") return cmd_train(app, argc - 1, argv + 1);
    if (command == "sample") return cmd_sample(app, argc - 1, argv + 1);
    if (command == "eval") return cmd_eval(app, argc - 1, argv + 1);
    if (command == "report") return cmd_report(app, argc - 1, argv + 1);
    std::cerr << "unknown command: " << command << "\n";
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kExitResource;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
