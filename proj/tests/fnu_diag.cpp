// Temporary diagnostics (deleted before finishing).
#include "kexpfam.hpp"
#include <cstdio>
#include <cstdlib>
using namespace kexpfam;
static double getenv_d(const char* k, double d) { const char* v = std::getenv(k); return v ? std::atof(v) : d; }
static int getenv_i(const char* k, int d) { const char* v = std::getenv(k); return v ? std::atoi(v) : d; }

int main() {
  uint64_t seed = 3;
  Rng rng(derive_seed(seed, "data"));
  int n = 500;
  Mat X(n, 1);
  for (int i = 0; i < n; ++i) X(i,0) = 0.5 + 0.8 * rng.normal();
  Dataset ds; ds.samples = X;

  TrainConfig cfg;
  cfg.seed = seed;
  cfg.outer_iters = getenv_i("L", 800);
  cfg.eta = getenv_d("ETA", 0.05);
  cfg.lambda = getenv_d("LAMBDA", 1.0);
  cfg.rho0 = getenv_d("RHO0", 0.15);
  cfg.l0 = getenv_d("L0", 800.0);
  cfg.inner_iters = getenv_i("K", 15);
  cfg.batch = getenv_i("B", 64);
  cfg.k0 = getenv_d("K0", 8000.0);
  cfg.tau0 = getenv_d("TAU0", 0.5);
  cfg.nu_updates_per_sampler = getenv_i("NUPS", 3);
  cfg.normalize = false;
  if (getenv_i("RF", 0)) { cfg.backend = RkhsBackend::random_feature; cfg.feature_count = getenv_i("R", 1024); }      // keep everything in raw coordinates
  cfg.curve_every = 100000;
  TrainedModel m = kexpfam::train(ds, cfg);

  std::printf("|f|=%.4f |nu|=%.4f\n", std::sqrt(m.f.norm_sq()), std::sqrt(m.nu.norm_sq()));

  // quadrature: A(lambda f), then compare p_f, sampler pushforward, nu
  auto f_eval = [&](const Vec& x) { return m.f.eval(x); };
  double A = log_partition_quadrature(f_eval, m.base, 2001, cfg.lambda);
  // sampler density via histogram
  Mat gen = m.sampler.sample(200000);
  std::printf("sampler mean=%.3f sd=%.3f (data mean=%.3f sd=%.3f; p0 mean=%.3f sd=%.3f)\n",
    gen.col(0).mean(), std::sqrt((gen.col(0).array()-gen.col(0).mean()).square().mean()),
    X.col(0).mean(), std::sqrt((X.col(0).array()-X.col(0).mean()).square().mean()),
    m.base.mean[0], std::sqrt(m.base.variance()[0]));
  std::printf("A(lambda f) = %.4f\n", A);
  std::printf("  y      lam*f(y)   log(pf/p0)  log(pdata/p0)   nu(y)\n");
  for (double y : {-1.5, -0.5, 0.0, 0.5, 1.0, 1.5, 2.5}) {
    Vec p(1); p << y;
    double lf = cfg.lambda * m.f.eval(p);
    double log_ratio_model = lf - A;
    double log_pdata = -0.5*std::pow((y-0.5)/0.8,2) - std::log(0.8*std::sqrt(2*M_PI));
    double log_ratio_data = log_pdata - m.base.log_density(p);
    std::printf("%+5.1f   %+8.4f   %+8.4f   %+8.4f   %+8.4f\n",
                y, lf, log_ratio_model, log_ratio_data, m.nu.eval(p));
  }
  return 0;
}
