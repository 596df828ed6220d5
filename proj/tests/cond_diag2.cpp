// Temporary diagnostics (deleted before finishing).
#include "kexpfam.hpp"
#include <cstdio>
#include <cstdlib>
using namespace kexpfam;
static double getenv_d(const char* k, double d) { const char* v = std::getenv(k); return v ? std::atof(v) : d; }
static int getenv_i(const char* k, int d) { const char* v = std::getenv(k); return v ? std::atoi(v) : d; }

int main() {
  uint64_t seed = 1;
  Rng rng(derive_seed(seed, "lingauss"));
  int n_train = 500;
  Mat train(n_train, 2);
  for (int i = 0; i < n_train; ++i) { double x = rng.normal(); train(i,0)=x; train(i,1)=0.5*x+0.5*rng.normal(); }
  Dataset ds; ds.samples = train; ds.x_cols = {0}; ds.y_cols = {1};

  TrainConfig cfg;
  cfg.seed = seed;
  cfg.outer_iters = getenv_i("L", 1800);
  cfg.eta = getenv_d("ETA", 0.03);
  cfg.lambda = getenv_d("LAMBDA", 1.0);
  cfg.rho0 = getenv_d("RHO0", 0.1);
  cfg.l0 = getenv_d("L0", 800.0);
  cfg.inner_iters = getenv_i("K", 15);
  cfg.batch = getenv_i("B", 48);
  cfg.k0 = getenv_d("K0", 4000.0);
  cfg.nu_shrink = getenv_d("SHRINK", 0.1);
  cfg.inflation = getenv_d("INFL", 1.0);
  cfg.backend = RkhsBackend::random_feature;
  cfg.feature_count = getenv_i("R", 768);
  cfg.curve_every = 100000;
  TrainedModel m = train_conditional(ds, cfg);

  // Model conditional log-density on a y-grid per x, in NORMALIZED space,
  // then compare against the true conditional transformed to that space.
  const auto& norm = *m.normalization;
  double mx = norm.mean[0], sx = norm.scale[0], my = norm.mean[1], sy = norm.scale[1];
  std::printf("norm: mean=(%.3f, %.3f) scale=(%.3f, %.3f)\n", mx, my, sx, sy);
  int G = 801;
  double ylo = -4, yhi = 4;                       // normalized y grid
  double w = (yhi - ylo) / (G - 1);
  for (double x_orig : {-1.0, 0.0, 1.0}) {
    double xn = (x_orig - mx) / sx;
    Vec lf(G), lp0(G);
    for (int i = 0; i < G; ++i) {
      double yn = ylo + i * w;
      Vec xy(2); xy << xn, yn;
      Vec yv(1); yv << yn;
      lf[i] = cfg.lambda * m.f.eval(xy);
      lp0[i] = m.base.log_density(yv);
    }
    // A_x by quadrature on the grid
    Vec t = lf + lp0;
    double mx2 = t.maxCoeff();
    double Ax = mx2 + std::log(((t.array() - mx2).exp() * w).sum());
    // report model vs truth at a few y (original units)
    std::printf("x=%+.1f (A_x=%.4f):\n  y_orig   model_logp   true_logp   lam*f\n", x_orig, Ax);
    for (double dy : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      double y_orig = 0.5 * x_orig + dy;
      double yn = (y_orig - my) / sy;
      Vec xy(2); xy << xn, yn;
      Vec yv(1); yv << yn;
      double model = cfg.lambda * m.f.eval(xy) + m.base.log_density(yv) - Ax - std::log(sy);
      double truth = -0.5 * std::pow(dy / 0.5, 2) - std::log(0.5 * std::sqrt(2 * M_PI));
      std::printf("  %+5.2f   %+9.4f   %+9.4f   %+8.4f\n", y_orig, model, truth,
                  cfg.lambda * m.f.eval(xy));
    }
  }
  return 0;
}
