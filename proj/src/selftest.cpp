#include "gedkit/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "gedkit/assignment.hpp"
#include "gedkit/ged.hpp"
#include "gedkit/metrics.hpp"
#include "gedkit/model.hpp"

namespace gedkit {

namespace {

struct Reporter {
  std::ostream& out;
  bool all_ok = true;

  void check(const std::string& name, bool ok) {
    out << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    all_ok = all_ok && ok;
  }
};

Graph random_graph(std::mt19937_64& rng, int n, bool labeled) {
  std::uniform_real_distribution<double> dens(0.0, 0.7);
  std::vector<std::string> alphabet;
  if (labeled) alphabet = {"A", "B", "C"};
  return generate_graph(n, dens(rng), alphabet, rng());
}

bool model_gradcheck() {
  ModelConfig mc;
  mc.gcn_dims = {6, 4};
  mc.ntn_k = 3;
  mc.hist_bins = 4;
  mc.fc_dims = {5, 1};
  std::mt19937_64 rng(17);
  Graph a = random_graph(rng, 4, true);
  Graph b = random_graph(rng, 5, true);
  LabelEncoder enc = LabelEncoder::from_labels({"A", "B", "C"});
  ModelParams params = ModelParams::init(mc, enc.dimension(), 99);

  Tape tape;
  Tensor loss = pair_loss(tape, predict_forward(tape, a, b, params, enc), 0.6);
  tape.backward(loss);

  auto loss_value = [&] {
    Tape t(false);
    return pair_loss(t, predict_forward(t, a, b, params, enc), 0.6).item();
  };
  const double h = 1e-5;
  for (auto& [name, p] : params.entries) {
    for (std::size_t i = 0; i < p.value().size(); ++i) {
      const double saved = p.value()[i];
      p.value()[i] = saved + h;
      const double up = loss_value();
      p.value()[i] = saved - h;
      const double down = loss_value();
      p.value()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p.grad()[i];
      const double err = std::abs(numeric - analytic);
      if (err > 1e-5 && err > 1e-4 * std::max(std::abs(numeric), std::abs(analytic)))
        return false;
    }
  }
  return true;
}

bool astar_matches_bruteforce() {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> size(2, 5);
    const bool labeled = trial % 2 == 0;
    Graph a = random_graph(rng, size(rng), labeled);
    Graph b = random_graph(rng, size(rng), labeled);
    GedResult exact = ged_bruteforce(a, b);
    if (ged_astar(a, b).distance != exact.distance) return false;
    if (ged_beam(a, b, {}, 5).distance < exact.distance) return false;
    if (ged_hungarian(a, b).distance < exact.distance) return false;
    if (ged_vj(a, b).distance < exact.distance) return false;
  }
  return true;
}

bool lap_solvers_agree() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(0.0, 5.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> size(1, 9);
    const int n = size(rng);
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (auto& c : cost) c = val(rng);
    const double h = solve_assignment_hungarian(cost, n).cost;
    const double j = solve_assignment_jv(cost, n).cost;
    if (std::abs(h - j) > 1e-9) return false;
  }
  return true;
}

bool metric_oracles() {
  auto rho = spearman_rho({1, 2, 3, 4}, {1, 2, 4, 3});
  auto tau = kendall_tau({1, 2, 3}, {1, 3, 2});
  return rho && std::abs(*rho - 0.8) < 1e-12 && tau &&
         std::abs(*tau - 1.0 / 3.0) < 1e-12;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  Reporter r{out};
  r.check("model gradient check vs finite differences", model_gradcheck());
  r.check("astar equals brute force; approximations bound it", astar_matches_bruteforce());
  r.check("hungarian and jonker-volgenant objectives agree", lap_solvers_agree());
  r.check("rank correlation oracles", metric_oracles());
  out << (r.all_ok ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
  return r.all_ok;
}

}  // namespace gedkit
