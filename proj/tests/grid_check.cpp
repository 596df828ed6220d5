// Temporary tuning harness (deleted before finishing).
#include "kexpfam.hpp"
#include <cstdio>
#include <cstdlib>
#include <chrono>
using namespace kexpfam;

static double getenv_d(const char* k, double d) { const char* v = std::getenv(k); return v ? std::atof(v) : d; }
static int getenv_i(const char* k, int d) { const char* v = std::getenv(k); return v ? std::atoi(v) : d; }

int main(int argc, char** argv) {
  uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  std::string task = argc > 2 ? argv[2] : "grid";

  TrainConfig cfg;
  cfg.seed = seed;
  cfg.outer_iters = getenv_i("L", 1000);
  cfg.eta = getenv_d("ETA", 0.05);
  cfg.lambda = getenv_d("LAMBDA", 5.0);
  cfg.rho0 = getenv_d("RHO0", 0.15);
  cfg.l0 = getenv_d("L0", 800.0);
  cfg.inner_iters = getenv_i("K", 15);
  cfg.batch = getenv_i("B", 64);
  cfg.nu_shrink = getenv_d("SHRINK", 0.1);
  if (getenv_i("RF", 0)) { cfg.backend = RkhsBackend::random_feature; cfg.feature_count = getenv_i("R", 1024); }
  cfg.k0 = getenv_d("K0", 8000.0);
  cfg.noise_dim = getenv_i("ND", 128);
  cfg.inflation = getenv_d("INFL", 2.0);
  cfg.curve_every = 100000;

  if (task == "grid") {
    Dataset train = gen_grid(500, 2, derive_seed(seed, "train"));
    Dataset test = gen_grid(1500, 2, derive_seed(seed, "test"));
    auto t0 = std::chrono::steady_clock::now();
    TrainedModel model = kexpfam::train(train, cfg);
    double dde_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Mat gen = sample_from_model(model, 1500);
    MmdReport dde = mmd_median_kernel(gen, test.samples);

    // Score matching + HMC on the same data.
    t0 = std::chrono::steady_clock::now();
    Mat X = train.samples;
    Normalization norm = fit_normalization(X);
    X = norm.apply(X);
    Dataset fit_ds; fit_ds.samples = X;
    KernelSpec kernel(median_bandwidth(X, derive_seed(seed, "median")), 2);
    ReferenceMeasure base = make_reference(X, 2.0);
    double sm_eta = getenv_d("SM_ETA", 0.01);
    ScoreMatchingModel sm = fit_score_matching(fit_ds, kernel, sm_eta, base, 1.0);
    LogDensityGrad target = [&](const Vec& x) {
      return std::make_pair(base.log_density(x) + eval_score_matching_f(sm, x),
                            Vec(base.grad_log_density(x) + grad_score_matching_f(sm, x)));
    };
    HmcConfig hcfg; hcfg.seed = derive_seed(seed, "hmc"); hcfg.chain_length = 2000 + 1500; hcfg.burn_in = 2000;
    HmcResult hres = hmc_sample(target, hcfg, Vec::Zero(2));
    Mat kef = norm.invert(hres.draws);
    double kef_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MmdReport kefrep = mmd_median_kernel(kef, test.samples);
    std::printf("grid seed=%llu  DDE %.1fs MMD2u=%.3e  |  KEF+HMC %.1fs MMD2u=%.3e acc=%.2f step=%.3f  -> DDE %s\n",
                (unsigned long long)seed, dde_secs, dde.mmd_unbiased, kef_secs,
                kefrep.mmd_unbiased, hres.acceptance_rate, hres.tuned_step,
                dde.mmd_unbiased < kefrep.mmd_unbiased ? "WINS" : "LOSES");
  } else if (task == "cond") {
    // linear-Gaussian y = 0.5 x + eps, eps ~ N(0, 0.25), x ~ N(0,1)
    Rng rng(derive_seed(seed, "lingauss"));
    int n_train = 500, n_test = getenv_i("NTEST", 1000);
    Mat train(n_train, 2), test(n_test, 2);
    for (int i = 0; i < n_train; ++i) { double x = rng.normal(); train(i,0)=x; train(i,1)=0.5*x+0.5*rng.normal(); }
    for (int i = 0; i < n_test; ++i) { double x = rng.normal(); test(i,0)=x; test(i,1)=0.5*x+0.5*rng.normal(); }
    Dataset ds; ds.samples = train; ds.x_cols = {0}; ds.y_cols = {1};
    auto t0 = std::chrono::steady_clock::now();
    TrainedModel model = train_conditional(ds, cfg);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Dataset tds; tds.samples = test;
    auto t1 = std::chrono::steady_clock::now();
    NllReport rep = nll_conditional(model, tds, getenv_i("NMC", 10000), derive_seed(seed, "nll"));
    double nll_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    double truth = 0.5 * std::log(2 * M_PI * 0.25) + 0.5;
    std::printf("cond seed=%llu train %.1fs nll-eval %.1fs  NLL=%.4f +- %.4f  truth=%.4f  diff=%+.4f\n",
                (unsigned long long)seed, secs, nll_secs, rep.mean_nll, rep.std_err,
                truth, rep.mean_nll - truth);
  }
  return 0;
}
