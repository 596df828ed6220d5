// Temporary developer smoke check (deleted before finishing).
#include "kexpfam.hpp"
#include <cstdio>
using namespace kexpfam;

int main() {
  // 1. Kernel basics
  KernelSpec ks(1.0, 1);
  Vec x0(1), x1(1);
  x0 << 0.0; x1 << 1.0;
  std::printf("k(0,1)=%.6f (expect %.6f)\n", eval_kernel(ks, x0, x1), std::exp(-1.0));

  // 2. Witness recovery: 200 full-batch f updates vs closed form
  Rng rng(7);
  Mat D = rng.normal_mat(40, 1);
  Mat Q = rng.normal_mat(30, 1);
  Q.array() += 1.0;
  ProductKernel pk(KernelSpec(2.0, 1));
  InnerLoopState st{RkhsFunction::expansion(pk), RkhsFunction::expansion(pk), 0,
                    StepSchedule{0.5, 100.0}};
  double eta = 1.0;
  for (int k = 0; k < 200; ++k) update_f(st, D, Q, eta);
  double max_err = 0.0;
  for (double p = -3.0; p <= 4.0; p += 0.25) {
    Vec pt(1); pt << p;
    double witness = 0.0;
    for (int i = 0; i < D.rows(); ++i) witness += pk.eval(D.row(i).transpose(), pt);
    witness /= D.rows();
    double qpart = 0.0;
    for (int i = 0; i < Q.rows(); ++i) qpart += pk.eval(Q.row(i).transpose(), pt);
    qpart /= Q.rows();
    witness = (witness - qpart) / eta;
    max_err = std::max(max_err, std::abs(st.f.eval(pt) - witness));
  }
  std::printf("witness sup err = %.3e (expect < 1e-2)\n", max_err);

  // 3. Dual gradient vs finite differences with common noise
  TransportSampler g = TransportSampler::mlp(3, 3, 2, 8, 3, 11, 12);
  RkhsFunction f = RkhsFunction::expansion(ProductKernel(KernelSpec(1.5, 2)));
  RkhsFunction nu = RkhsFunction::expansion(ProductKernel(KernelSpec(0.8, 2)));
  Rng r2(21);
  f.add_point_masses(r2.normal_mat(5, 2), r2.normal_vec(5));
  nu.add_point_masses(r2.normal_mat(4, 2), r2.normal_vec(4));
  double lambda = 0.7;
  Mat noise = g.draw_noise(16);
  ParamGradient grad = dual_gradient_on_noise(g, f, nu, lambda, noise);
  auto objective = [&](const TransportSampler& s) {
    Mat out = s.forward(noise);
    double acc = 0.0;
    for (int b = 0; b < out.rows(); ++b) {
      Vec xb = out.row(b).transpose();
      acc += -f.eval(xb) + nu.eval(xb) / lambda;
    }
    return acc / out.rows();
  };
  double worst_rel = 0.0;
  const double h = 1e-5;
  for (size_t l = 0; l < g.layers().size(); ++l) {
    for (int idx = 0; idx < std::min<int>(6, (int)g.layers()[l].weight.size()); ++idx) {
      TransportSampler gp = g, gm = g;
      gp.layers()[l].weight.data()[idx] += h;
      gm.layers()[l].weight.data()[idx] -= h;
      double fd = (objective(gp) - objective(gm)) / (2 * h);
      double an = grad.weight_grads[l].data()[idx];
      double rel = std::abs(fd - an) / std::max(1e-8, std::abs(fd));
      worst_rel = std::max(worst_rel, rel);
    }
  }
  std::printf("dual gradient worst rel err = %.3e (expect < 1e-4)\n", worst_rel);

  // 4. nu update toward KL: simple 1-d check of objective growth
  ReferenceMeasure base; base.mean = Vec::Zero(1); base.base_variance = Vec::Ones(1); base.inflation = 1.0;
  Rng r3(5);
  InnerLoopState st2{RkhsFunction::expansion(pk), RkhsFunction::expansion(pk), 0, StepSchedule{0.5, 500.0}};
  for (int k = 0; k < 2000; ++k) {
    Mat qdraw(8, 1), bdraw(8, 1);
    for (int i = 0; i < 8; ++i) { qdraw(i,0) = 0.5 + 0.8 * r3.normal(); bdraw(i,0) = base.sample(r3)[0]; }
    update_nu(st2, qdraw, bdraw, 1.0);
  }
  // dual value by quadrature: E_q[nu] - E_p0[exp nu] + 1 vs true KL
  double eq = 0, ep = 0;
  int Ngrid = 4001; double lo = -8, hi = 8, w = (hi-lo)/(Ngrid-1);
  for (int i = 0; i < Ngrid; ++i) {
    double xx = lo + i * w;
    Vec pt(1); pt << xx;
    double nuv = st2.nu.eval(pt);
    double qd = std::exp(-0.5*std::pow((xx-0.5)/0.8,2))/(0.8*std::sqrt(2*M_PI));
    double pd = std::exp(base.log_density(pt));
    double wt = (i==0||i==Ngrid-1)? 0.5*w : w;
    eq += wt * qd * nuv;
    ep += wt * pd * std::exp(nuv);
  }
  double kl_true = std::log(1.0/0.8) + (0.64 + 0.25 - 1.0)/2.0;
  std::printf("nu dual value = %.4f vs true KL = %.4f (expect within 0.05)\n", eq - ep + 1.0, kl_true);
  return 0;
}
