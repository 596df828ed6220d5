// Temporary trainer tuning harness (deleted before finishing).
#include "kexpfam.hpp"
#include <cstdio>
#include <cstdlib>
#include <chrono>
using namespace kexpfam;

static double getenv_d(const char* k, double dflt) {
  const char* v = std::getenv(k); return v ? std::atof(v) : dflt;
}
static int getenv_i(const char* k, int dflt) {
  const char* v = std::getenv(k); return v ? std::atoi(v) : dflt;
}

int main(int argc, char** argv) {
  uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.outer_iters = getenv_i("L", 400);
  cfg.eta = getenv_d("ETA", 0.25);
  cfg.lambda = getenv_d("LAMBDA", 1.0);
  cfg.rho0 = getenv_d("RHO0", 0.05);
  cfg.l0 = getenv_d("L0", 400.0);
  cfg.inner_iters = getenv_i("K", 10);
  cfg.noise_dim = getenv_i("ND", 128);
  cfg.batch = getenv_i("B", 100);
  cfg.max_expansion_terms = getenv_i("MT", 800);
  cfg.tau0 = getenv_d("TAU0", 0.5);
  cfg.k0 = getenv_d("K0", 4000.0);
  cfg.depth = getenv_i("DEPTH", 3);
  cfg.curve_every = 100000;
  if (getenv_i("RF", 0)) { cfg.backend = RkhsBackend::random_feature; cfg.feature_count = getenv_i("R", 4096); }

  Dataset train = gen_two_moons(500, derive_seed(seed, "train"));
  Dataset test = gen_two_moons(5000, derive_seed(seed, "test"));

  auto t0 = std::chrono::steady_clock::now();
  TrainedModel model = kexpfam::train(train, cfg);
  auto t1 = std::chrono::steady_clock::now();

  Mat gen = sample_from_model(model, 5000);
  MmdReport rep = mmd_median_kernel(gen, test.samples);
  std::printf("seed=%llu L=%d eta=%.3g lam=%.3g rho0=%.3g K=%d nd=%d B=%d MT=%d "
              "t=%.1fs  MMD2u=%.3e  |f|=%.3f mean=(%.2f,%.2f) sd=(%.2f,%.2f)\n",
              (unsigned long long)seed, cfg.outer_iters, cfg.eta, cfg.lambda,
              cfg.rho0, cfg.inner_iters, cfg.noise_dim, cfg.batch,
              cfg.max_expansion_terms,
              std::chrono::duration<double>(t1 - t0).count(), rep.mmd_unbiased,
              std::sqrt(model.f.norm_sq()),
              gen.col(0).mean(), gen.col(1).mean(),
              std::sqrt((gen.col(0).array() - gen.col(0).mean()).square().mean()),
              std::sqrt((gen.col(1).array() - gen.col(1).mean()).square().mean()));
  return 0;
}
