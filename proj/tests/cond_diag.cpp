// Temporary diagnostics (deleted before finishing).
#include "kexpfam.hpp"
#include <cstdio>
#include <cstdlib>
using namespace kexpfam;
static double getenv_d(const char* k, double d) { const char* v = std::getenv(k); return v ? std::atof(v) : d; }
static int getenv_i(const char* k, int d) { const char* v = std::getenv(k); return v ? std::atoi(v) : d; }

int main(int argc, char** argv) {
  uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  Rng rng(derive_seed(seed, "lingauss"));
  int n_train = 500;
  Mat train(n_train, 2);
  for (int i = 0; i < n_train; ++i) { double x = rng.normal(); train(i,0)=x; train(i,1)=0.5*x+0.5*rng.normal(); }
  Dataset ds; ds.samples = train; ds.x_cols = {0}; ds.y_cols = {1};
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.outer_iters = getenv_i("L", 800);
  cfg.eta = getenv_d("ETA", 0.05);
  cfg.lambda = getenv_d("LAMBDA", 5.0);
  cfg.rho0 = getenv_d("RHO0", 0.15);
  cfg.l0 = getenv_d("L0", 800.0);
  cfg.inner_iters = getenv_i("K", 15);
  cfg.batch = getenv_i("B", 64);
  cfg.noise_dim = getenv_i("ND", 128);
  cfg.curve_every = 100000;
  TrainedModel model = train_conditional(ds, cfg);
  std::printf("|f|=%.4f  |nu|=%.4f\n", std::sqrt(model.f.norm_sq()), std::sqrt(model.nu.norm_sq()));
  // conditional mean/sd of generator at several x
  for (double x : {-1.5, -0.5, 0.0, 0.5, 1.5}) {
    Mat X = Mat::Constant(2000, 1, x);
    Mat Y = sample_conditional(model, X);
    double m = Y.col(0).mean();
    double sd = std::sqrt((Y.col(0).array() - m).square().mean());
    std::printf("x=%+.1f  E[y|x]=%+.3f (want %+.3f)  sd=%.3f (want 0.5)\n", x, m, 0.5*x, sd);
  }
  return 0;
}
