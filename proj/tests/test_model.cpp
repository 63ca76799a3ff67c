#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "gedkit/model.hpp"
#include "test_util.hpp"

using namespace gedkit;
using testutil::random_graph;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ModelConfig tiny_config(PoolingVariant pooling = PoolingVariant::learnable_gc,
                        bool strategy2 = true) {
  ModelConfig mc;
  mc.gcn_dims = {8, 8, 4};
  mc.ntn_k = 4;
  mc.hist_bins = 4;
  mc.fc_dims = {16, 8, 4, 1};
  mc.pooling = pooling;
  mc.strategy2 = strategy2;
  return mc;
}

std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

TEST_CASE("gcn: hand-computed example on a 2-node path") {
  Graph path = make_graph("p", {"C", "N"}, {{0, 1}});
  LabelEncoder enc = LabelEncoder::from_labels({"C", "N"});

  ModelConfig mc;
  mc.gcn_dims = {2};
  mc.ntn_k = 1;
  mc.hist_bins = 1;
  mc.fc_dims = {1};
  ModelParams p = ModelParams::init(mc, 2, 1);
  p.gcn_w(0).value() = {0.3, -0.7, 1.1, 0.4};  // row-major 2x2
  p.gcn_b(0).value() = {0.05, -0.02};

  Tape t(false);
  Tensor x = Tensor::from_data({2, 2}, enc.encode(path));
  Tensor u = gcn_forward(t, x, path, p);

  // d_0 = d_1 = 2, both nodes aggregate (x0 + x1) / 2 = [0.5, 0.5];
  // a single layer is the last layer, so it stays linear.
  const double r0 = 0.5 * 0.3 + 0.5 * 1.1 + 0.05;
  const double r1 = 0.5 * -0.7 + 0.5 * 0.4 - 0.02;
  for (int n = 0; n < 2; ++n) {
    CHECK(u.value()[n * 2 + 0] == doctest::Approx(r0).epsilon(1e-12));
    CHECK(u.value()[n * 2 + 1] == doctest::Approx(r1).epsilon(1e-12));
  }
}

TEST_CASE("gcn: isolated node is a relu chain of its own features") {
  Graph dot = make_graph("d", {"C"}, {});
  ModelConfig mc;
  mc.gcn_dims = {2, 2};
  mc.ntn_k = 1;
  mc.hist_bins = 1;
  mc.fc_dims = {1};
  ModelParams p = ModelParams::init(mc, 1, 3);
  p.gcn_w(0).value() = {1.5, -2.0};
  p.gcn_b(0).value() = {0.25, 0.5};
  p.gcn_w(1).value() = {2.0, 1.0, -1.0, 0.0};
  p.gcn_b(1).value() = {0.0, -0.1};

  Tape t(false);
  Tensor u = gcn_forward(t, Tensor::from_data({1, 1}, {1.0}), dot, p);

  const double h0 = std::max(0.0, 1.5 + 0.25), h1 = std::max(0.0, -2.0 + 0.5);
  CHECK(u.value()[0] == doctest::Approx(h0 * 2.0 + h1 * -1.0).epsilon(1e-12));
  CHECK(u.value()[1] == doctest::Approx(h0 * 1.0 + h1 * 0.0 - 0.1).epsilon(1e-12));
}

TEST_CASE("gcn: permutation equivariance") {
  std::mt19937_64 rng(12);
  LabelEncoder enc = LabelEncoder::from_labels({"A", "B", "C"});
  ModelParams p = ModelParams::init(tiny_config(), enc.dimension(), 5);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = random_graph(rng, 2, 7, true);
    auto perm = random_permutation(g.node_count(), rng);
    Graph pg = permute_nodes(g, perm);

    Tape t(false);
    Tensor u =
        gcn_forward(t, Tensor::from_data({g.node_count(), 3}, enc.encode(g)), g, p);
    Tensor up =
        gcn_forward(t, Tensor::from_data({g.node_count(), 3}, enc.encode(pg)), pg, p);
    const int d = u.dim(1);
    for (int n = 0; n < g.node_count(); ++n)
      for (int j = 0; j < d; ++j)
        CHECK(up.value()[perm[n] * d + j] ==
              doctest::Approx(u.value()[n * d + j]).epsilon(1e-12));
  }
}

TEST_CASE("pooling variants") {
  const int d = 4;
  ModelConfig mc = tiny_config();
  mc.gcn_dims = {d};

  SUBCASE("simple mean of identical embeddings returns the embedding") {
    mc.pooling = PoolingVariant::simple_mean;
    ModelParams p = ModelParams::init(mc, 2, 1);
    Graph g = make_graph("g", {"A", "A", "A"}, {{0, 1}, {1, 2}});
    std::vector<double> row{0.5, -1.0, 2.0, 0.25};
    std::vector<double> data;
    for (int i = 0; i < 3; ++i) data.insert(data.end(), row.begin(), row.end());
    Tape t(false);
    std::vector<double> att;
    Tensor h = pool(t, Tensor::from_data({3, d}, data), g, p, &att);
    for (int j = 0; j < d; ++j)
      CHECK(h.value()[j] == doctest::Approx(row[j]).epsilon(1e-12));
    CHECK(att == std::vector<double>(3, 1.0 / 3));
  }

  SUBCASE("degree attention uses ln(degree + 1)") {
    mc.pooling = PoolingVariant::degree;
    ModelParams p = ModelParams::init(mc, 2, 1);
    Graph star = make_graph("s", {"A", "A", "A"}, {{0, 1}, {0, 2}});
    Tensor u = Tensor::from_data({3, d}, std::vector<double>(3 * d, 1.0));
    Tape t(false);
    std::vector<double> att;
    Tensor h = pool(t, u, star, p, &att);
    CHECK(att[0] == doctest::Approx(std::log(3.0)));
    CHECK(att[1] == doctest::Approx(std::log(2.0)));
    const double expect = std::log(3.0) + 2 * std::log(2.0);
    for (int j = 0; j < d; ++j)
      CHECK(h.value()[j] == doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("single node, learnable context") {
    mc.pooling = PoolingVariant::learnable_gc;
    ModelParams p = ModelParams::init(mc, 2, 7);
    Graph dot = make_graph("d", {"A"}, {});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1, 1);
    std::vector<double> urow(d);
    for (auto& x : urow) x = dist(rng);
    Tape t(false);
    Tensor h = pool(t, Tensor::from_data({1, d}, urow), dot, p);
    // h = sigmoid(u . tanh(W2 u)) u
    const auto& w2 = p.at("att.W2").value();
    double dot_uc = 0.0;
    for (int i = 0; i < d; ++i) {
      double ci = 0.0;
      for (int j = 0; j < d; ++j) ci += w2[i * d + j] * urow[j];
      dot_uc += urow[i] * std::tanh(ci);
    }
    for (int j = 0; j < d; ++j)
      CHECK(h.value()[j] == doctest::Approx(sig(dot_uc) * urow[j]).epsilon(1e-12));
  }

  SUBCASE("zero W2 forces uniform attention 0.5") {
    mc.pooling = PoolingVariant::learnable_gc;
    ModelParams p = ModelParams::init(mc, 2, 7);
    std::fill(p.at("att.W2").value().begin(), p.at("att.W2").value().end(), 0.0);
    Graph g = make_graph("g", {"A", "A"}, {{0, 1}});
    Tensor u = Tensor::from_data({2, d}, {1, 2, 3, 4, -1, 0, 1, 2});
    Tape t(false);
    std::vector<double> att;
    Tensor h = pool(t, u, g, p, &att);
    CHECK(att == std::vector<double>{0.5, 0.5});
    for (int j = 0; j < d; ++j)
      CHECK(h.value()[j] ==
            doctest::Approx(0.5 * (u.value()[j] + u.value()[d + j])).epsilon(1e-12));
  }

  SUBCASE("sigmoid attention weights stay in (0,1)") {
    for (auto variant :
         {PoolingVariant::global_context, PoolingVariant::learnable_gc}) {
      mc.pooling = variant;
      ModelParams p = ModelParams::init(mc, 2, 11);
      std::mt19937_64 rng(4);
      Graph g = random_graph(rng, 3, 6, true);
      std::uniform_real_distribution<double> dist(-2, 2);
      std::vector<double> data(g.node_count() * d);
      for (auto& x : data) x = dist(rng);
      Tape t(false);
      std::vector<double> att;
      pool(t, Tensor::from_data({g.node_count(), d}, data), g, p, &att);
      for (double a : att) {
        CHECK(a > 0.0);
        CHECK(a < 1.0);
      }
    }
  }

  SUBCASE("duplicating identical nodes at least doubles the embedding norm") {
    for (auto variant : {PoolingVariant::global_context, PoolingVariant::learnable_gc,
                         PoolingVariant::degree}) {
      mc.pooling = variant;
      ModelParams p = ModelParams::init(mc, 2, 13);
      std::vector<double> row{0.4, -0.9, 1.3, 0.2};
      auto rows = [&](int copies) {
        std::vector<double> data;
        for (int i = 0; i < copies; ++i)
          data.insert(data.end(), row.begin(), row.end());
        return data;
      };
      // one triangle vs two disjoint triangles: per-node degrees preserved
      Graph g1 = make_graph("a", {"A", "A", "A"}, {{0, 1}, {1, 2}, {0, 2}});
      Graph g2 = make_graph("b", {"A", "A", "A", "A", "A", "A"},
                            {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
      Tape t(false);
      auto norm = [](const Tensor& h) {
        double s = 0.0;
        for (double x : h.value()) s += x * x;
        return std::sqrt(s);
      };
      double n1 = norm(pool(t, Tensor::from_data({3, d}, rows(3)), g1, p));
      double n2 = norm(pool(t, Tensor::from_data({6, d}, rows(6)), g2, p));
      CHECK(n2 >= 2.0 * n1 * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("ntn interaction") {
  ModelConfig mc = tiny_config();
  const int d = mc.embed_dim(), k = mc.ntn_k;
  ModelParams p = ModelParams::init(mc, 2, 21);
  Tape t(false);

  SUBCASE("all-zero weights give sigmoid(0)") {
    for (auto name : {"ntn.W3", "ntn.V", "ntn.b3"})
      std::fill(p.at(name).value().begin(), p.at(name).value().end(), 0.0);
    Tensor hi = Tensor::from_data({d}, {1, -2, 0.5, 3});
    Tensor out = ntn_interact(t, hi, hi, p);
    for (double v : out.value()) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("zero embeddings leave only the bias") {
    p.at("ntn.b3").value() = {0.2, -0.4, 1.0, 0.0};
    Tensor z = Tensor::zeros({d});
    Tensor out = ntn_interact(t, z, z, p);
    for (int i = 0; i < k; ++i)
      CHECK(out.value()[i] ==
            doctest::Approx(sig(p.at("ntn.b3").value()[i])).epsilon(1e-12));
  }
  SUBCASE("scalar case matches the formula") {
    ModelConfig sc = tiny_config();
    sc.gcn_dims = {1};
    sc.ntn_k = 1;
    ModelParams sp = ModelParams::init(sc, 2, 5);
    sp.at("ntn.W3").value() = {0.7};
    sp.at("ntn.V").value() = {0.3, -0.2};
    sp.at("ntn.b3").value() = {0.1};
    Tensor hi = Tensor::from_data({1}, {1.5});
    Tensor hj = Tensor::from_data({1}, {-0.8});
    Tensor out = ntn_interact(t, hi, hj, sp);
    const double expect = sig(1.5 * 0.7 * -0.8 + 0.3 * 1.5 + -0.2 * -0.8 + 0.1);
    CHECK(out.value()[0] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("pairwise histogram") {
  SUBCASE("zero embeddings put all mass in the sigmoid(0) bin") {
    Tensor z1 = Tensor::zeros({3, 4});
    Tensor z2 = Tensor::zeros({3, 4});
    auto h = pairwise_histogram(z1, z2, 2);
    CHECK(h == std::vector<double>{0.0, 1.0});
  }
  SUBCASE("padding the smaller side adds sigmoid(0) entries") {
    // 3 nodes vs 1 node: S is 3x3 with two padded columns of 0.5.
    Tensor u1 = Tensor::from_data({3, 1}, {10.0, 10.0, 10.0});
    Tensor u2 = Tensor::from_data({1, 1}, {10.0});
    auto h = pairwise_histogram(u1, u2, 4);
    CHECK(h[2] == doctest::Approx(6.0 / 9));  // six padded sigmoid(0) cells
    CHECK(h[3] == doctest::Approx(3.0 / 9));  // three sigmoid(100) ~ 1 cells
  }
  SUBCASE("random 2x2 case vs direct enumeration") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-2, 2);
    std::vector<double> a(2 * 3), b(2 * 3);
    for (auto& x : a) x = dist(rng);
    for (auto& x : b) x = dist(rng);
    const int bins = 5;
    auto h = pairwise_histogram(Tensor::from_data({2, 3}, a),
                                Tensor::from_data({2, 3}, b), bins);
    std::vector<double> expect(bins, 0.0);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s = 0.0;
        for (int x = 0; x < 3; ++x) s += a[i * 3 + x] * b[j * 3 + x];
        const double v = sig(s);
        expect[std::min(bins - 1, static_cast<int>(v * bins))] += 0.25;
      }
    for (int i = 0; i < bins; ++i)
      CHECK(h[i] == doctest::Approx(expect[i]).epsilon(1e-12));
  }
  SUBCASE("normalized and non-negative") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
      std::uniform_int_distribution<int> nd(1, 6);
      std::uniform_real_distribution<double> dist(-3, 3);
      const int n1 = nd(rng), n2 = nd(rng), d = 4, bins = 1 + trial;
      std::vector<double> a(n1 * d), b(n2 * d);
      for (auto& x : a) x = dist(rng);
      for (auto& x : b) x = dist(rng);
      auto h = pairwise_histogram(Tensor::from_data({n1, d}, a),
                                  Tensor::from_data({n2, d}, b), bins);
      double total = 0.0;
      for (double v : h) {
        CHECK(v >= 0.0);
        total += v;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("predict: output range and representation invariance") {
  std::mt19937_64 rng(61);
  LabelEncoder enc = LabelEncoder::from_labels({"A", "B", "C"});
  ModelParams p = ModelParams::init(tiny_config(), enc.dimension(), 23);
  for (int trial = 0; trial < 25; ++trial) {
    Graph a = random_graph(rng, 2, 7, true);
    Graph b = random_graph(rng, 2, 7, true);
    const double s = predict_similarity(a, b, p, enc);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    Graph pa = permute_nodes(a, random_permutation(a.node_count(), rng));
    Graph pb = permute_nodes(b, random_permutation(b.node_count(), rng));
    CHECK(std::abs(predict_similarity(pa, pb, p, enc) - s) < 1e-9);
  }
}

TEST_CASE("full model gradients match finite differences") {
  std::mt19937_64 rng(71);
  LabelEncoder enc = LabelEncoder::from_labels({"A", "B", "C"});
  Graph a = random_graph(rng, 4, 4, true);
  Graph b = random_graph(rng, 5, 5, true);
  ModelParams params = ModelParams::init(tiny_config(), enc.dimension(), 29);
  const double s_true = 0.65;

  Tape tape;
  tape.backward(pair_loss(tape, predict_forward(tape, a, b, params, enc), s_true));

  auto loss_value = [&] {
    Tape t(false);
    return pair_loss(t, predict_forward(t, a, b, params, enc), s_true).item();
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
      const double tol =
          std::max(1e-5, 1e-4 * std::max(std::abs(numeric), std::abs(analytic)));
      INFO(name << "[" << i << "] numeric=" << numeric << " analytic=" << analytic);
      CHECK(std::abs(numeric - analytic) <= tol);
    }
  }
}

TEST_CASE("histogram is a stop-gradient: B=4 vs B=32 identical shared grads") {
  std::mt19937_64 rng(83);
  LabelEncoder enc = LabelEncoder::from_labels({"A", "B", "C"});
  Graph a = random_graph(rng, 4, 6, true);
  Graph b = random_graph(rng, 4, 6, true);

  ModelConfig big = tiny_config();
  big.hist_bins = 32;
  ModelParams pb = ModelParams::init(big, enc.dimension(), 41);
  ModelConfig small = big;
  small.hist_bins = 4;
  ModelParams ps = ModelParams::init(small, enc.dimension(), 41);

  // Same shared weights; histogram columns of the first FC layer zeroed.
  const int k = big.ntn_k, out0 = big.fc_dims[0];
  for (auto& [name, t] : ps.entries) {
    if (name == "fc0.W") continue;
    t.value() = pb.at(name).value();
  }
  auto& wb = pb.at("fc0.W").value();
  auto& ws = ps.at("fc0.W").value();
  const int in_b = k + 32, in_s = k + 4;
  for (int r = 0; r < out0; ++r)
    for (int c = 0; c < in_b; ++c) {
      if (c >= k) wb[r * in_b + c] = 0.0;
      if (c < in_s) ws[r * in_s + c] = c < k ? wb[r * in_b + c] : 0.0;
    }

  const double s_true = 0.4;
  Tape tb;
  tb.backward(pair_loss(tb, predict_forward(tb, a, b, pb, enc), s_true));
  Tape ts;
  ts.backward(pair_loss(ts, predict_forward(ts, a, b, ps, enc), s_true));

  for (auto& [name, t] : ps.entries) {
    if (name == "fc0.W") continue;
    CHECK(t.grad() == pb.at(name).grad());  // bitwise
  }
  const auto& gb = pb.at("fc0.W").grad();
  const auto& gs = ps.at("fc0.W").grad();
  for (int r = 0; r < out0; ++r)
    for (int c = 0; c < k; ++c) CHECK(gs[r * in_s + c] == gb[r * in_b + c]);
}

TEST_CASE("pair_loss") {
  Tape t(false);
  CHECK(pair_loss(t, Tensor::scalar(0.5), 0.5).item() == 0.0);
  CHECK(pair_loss(t, Tensor::scalar(0.2), 0.5).item() == doctest::Approx(0.09));
  // batch mean of two losses
  Tensor l1 = Tensor::scalar(0.01), l2 = Tensor::scalar(0.03);
  CHECK(scale(t, add(t, l1, l2), 0.5).item() == doctest::Approx(0.02));
}

TEST_CASE("checkpoint round trip preserves predictions bitwise") {
  namespace fs = std::filesystem;
  std::mt19937_64 rng(91);
  LabelEncoder enc = LabelEncoder::from_labels({"A", "B", "C"});
  ModelParams p = ModelParams::init(tiny_config(), enc.dimension(), 57);

  const auto path = (fs::temp_directory_path() / "gedkit_ckpt_test.json").string();
  save_checkpoint(path, p, enc);
  Checkpoint ck = load_checkpoint(path);

  CHECK(ck.params.config.gcn_dims == p.config.gcn_dims);
  CHECK(ck.params.config.pooling == p.config.pooling);
  CHECK(ck.encoder.labels() == enc.labels());
  for (int trial = 0; trial < 10; ++trial) {
    Graph a = random_graph(rng, 2, 6, true);
    Graph b = random_graph(rng, 2, 6, true);
    CHECK(predict_similarity(a, b, ck.params, ck.encoder) ==
          predict_similarity(a, b, p, enc));
  }
  fs::remove(path);
}

TEST_CASE("inference accepts unseen graphs over the known alphabet") {
  std::mt19937_64 rng(99);
  LabelEncoder enc = LabelEncoder::from_labels({"A", "B", "C"});
  ModelParams p = ModelParams::init(tiny_config(), enc.dimension(), 3);
  Graph a = random_graph(rng, 9, 12, true);  // larger than anything "trained on"
  Graph b = random_graph(rng, 3, 6, true);
  const double ab = predict_similarity(a, b, p, enc);
  const double ba = predict_similarity(b, a, p, enc);
  CHECK(ab > 0.0);
  CHECK(ab < 1.0);
  CHECK(ba > 0.0);  // order may legitimately matter (NTN asymmetry)
}
