// gedkit: graph edit distance toolkit and SimGNN-style neural similarity.
//
// Subcommands: gen, ged, train, eval, query, selftest. All randomness is
// seeded; --jobs 1 (the default) keeps every run bit-reproducible.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gedkit/dataset.hpp"
#include "gedkit/ged.hpp"
#include "gedkit/graph.hpp"
#include "gedkit/metrics.hpp"
#include "gedkit/model.hpp"
#include "gedkit/selftest.hpp"
#include "gedkit/train.hpp"

namespace {

constexpr const char* kVersion = "gedkit 0.1.0";

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_csv(s)) out.push_back(std::stoi(tok));
  return out;
}

void log_line(const std::string& msg) { std::cerr << "[gedkit] " << msg << "\n"; }

// Flags not given on the command line fall back to config-file values, which
// fall back to built-in defaults.
struct Options {
  std::string config_path;
  std::uint64_t seed = 1;
  int jobs = 1;

  // gen
  std::string out_dir;
  int n_graphs = 100;
  int min_nodes = 4;
  int max_nodes = 8;
  std::string alphabet = "A,B,C,D";
  double density_min = 0.1;
  double density_max = 0.4;
  int variants_per_base = 3;
  int perturb_min = 1;
  int perturb_max = 4;
  int size_threshold = 10;
  int beam_width = 100;
  std::int64_t budget = 20'000'000;

  // ged
  std::string algo = "astar";
  std::string g1_path, g2_path;
  bool no_edit_path = false;

  // train / model
  std::string data_dir;
  std::string ckpt_out;
  std::string run_log;
  int iterations = 10000;
  int batch_size = 128;
  double lr = 0.001;
  int val_every = 100;
  std::string pooling = "learnable-gc";
  bool strategy2 = true;
  std::string gcn_dims = "64,32,16";
  int ntn_k = 16;
  int hist_bins = 16;
  std::string fc_dims = "16,8,4,1";

  // eval / query
  std::vector<std::string> ckpts;
  std::string methods = "simgnn";
  std::string k_list = "10,20";
  std::string report_out;
  std::string csv_out;
  bool include_queries = false;
  std::string query_graph;
  int topk = 6;
  bool no_true_ged = false;
};

void apply_config_file(Options& o, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": config parse error: " + e.what());
  }
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get("seed", o.seed);
  get("jobs", o.jobs);
  get("n-graphs", o.n_graphs);
  get("min-nodes", o.min_nodes);
  get("max-nodes", o.max_nodes);
  get("alphabet", o.alphabet);
  get("density-min", o.density_min);
  get("density-max", o.density_max);
  get("variants-per-base", o.variants_per_base);
  get("perturb-min", o.perturb_min);
  get("perturb-max", o.perturb_max);
  get("size-threshold", o.size_threshold);
  get("beam-width", o.beam_width);
  get("budget", o.budget);
  get("iterations", o.iterations);
  get("batch-size", o.batch_size);
  get("lr", o.lr);
  get("val-every", o.val_every);
  get("pooling", o.pooling);
  get("strategy2", o.strategy2);
  get("gcn-dims", o.gcn_dims);
  get("ntn-k", o.ntn_k);
  get("hist-bins", o.hist_bins);
  get("fc-dims", o.fc_dims);
  get("methods", o.methods);
  get("k", o.k_list);
  get("topk", o.topk);
}

gedkit::ModelConfig model_config(const Options& o) {
  gedkit::ModelConfig mc;
  mc.gcn_dims = split_ints(o.gcn_dims);
  mc.ntn_k = o.ntn_k;
  mc.hist_bins = o.hist_bins;
  mc.fc_dims = split_ints(o.fc_dims);
  mc.pooling = gedkit::pooling_from_string(o.pooling);
  mc.strategy2 = o.strategy2;
  return mc;
}

std::string method_name(const gedkit::ModelConfig& mc) {
  using gedkit::PoolingVariant;
  if (mc.strategy2 && mc.pooling == PoolingVariant::learnable_gc) return "simgnn";
  std::string base;
  switch (mc.pooling) {
    case PoolingVariant::simple_mean: base = "simplemean"; break;
    case PoolingVariant::degree: base = "attdegree"; break;
    case PoolingVariant::global_context: base = "attglobalcontext"; break;
    case PoolingVariant::learnable_gc: base = "attlearnablegc"; break;
  }
  return mc.strategy2 ? base + "+hist" : base;
}

int cmd_gen(const Options& o) {
  gedkit::CorpusOptions co;
  co.n_graphs = o.n_graphs;
  co.min_nodes = o.min_nodes;
  co.max_nodes = o.max_nodes;
  co.alphabet = split_csv(o.alphabet);
  co.density_min = o.density_min;
  co.density_max = o.density_max;
  co.variants_per_base = o.variants_per_base;
  co.perturb_min = o.perturb_min;
  co.perturb_max = o.perturb_max;
  co.seed = o.seed;
  log_line("generating " + std::to_string(co.n_graphs) + " graphs");
  auto graphs = gedkit::make_corpus(co);

  gedkit::BuildOptions bo;
  bo.seed = o.seed;
  bo.size_threshold = o.size_threshold;
  bo.beam_width = o.beam_width;
  bo.jobs = o.jobs;
  bo.search.max_expansions = o.budget;
  log_line("computing ground-truth distances (threshold " +
           std::to_string(bo.size_threshold) + ", jobs " + std::to_string(bo.jobs) +
           ")");
  gedkit::Dataset ds = gedkit::build_dataset(graphs, bo);
  gedkit::save_dataset(ds, o.out_dir);
  log_line("wrote " + o.out_dir + ": " + std::to_string(ds.train_pairs.size()) +
           " train / " + std::to_string(ds.val_pairs.size()) + " val / " +
           std::to_string(ds.eval_pairs.size()) + " eval pairs, " +
           std::to_string(ds.skipped_pairs) + " skipped");
  return 0;
}

int cmd_ged(const Options& o) {
  gedkit::Graph a = gedkit::load_graph(o.g1_path);
  gedkit::Graph b = gedkit::load_graph(o.g2_path);
  gedkit::SearchOptions so;
  so.max_expansions = o.budget;

  gedkit::GedResult r;
  if (o.algo == "bruteforce")
    r = gedkit::ged_bruteforce(a, b);
  else if (o.algo == "astar")
    r = gedkit::ged_astar(a, b, {}, so);
  else if (o.algo == "beam")
    r = gedkit::ged_beam(a, b, {}, o.beam_width, so);
  else if (o.algo == "hungarian")
    r = gedkit::ged_hungarian(a, b);
  else if (o.algo == "vj")
    r = gedkit::ged_vj(a, b);
  else if (o.algo == "ensemble")
    r = gedkit::ged_min_ensemble(a, b, {}, o.beam_width, so);
  else
    throw std::runtime_error("ged: unknown --algo " + o.algo);

  json out{{"algo", o.algo},
           {"distance", r.distance},
           {"kind", gedkit::to_string(r.kind)},
           {"elapsed_ms", r.elapsed.count()}};
  if (r.edit_path && !o.no_edit_path) {
    json path = json::array();
    for (const auto& op : *r.edit_path) {
      json oj{{"op", gedkit::to_string(op.kind)}, {"a", op.a}};
      if (op.b >= 0) oj["b"] = op.b;
      if (!op.label.empty()) oj["label"] = op.label;
      path.push_back(oj);
    }
    out["edit_path"] = path;
  }
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  gedkit::Dataset ds = gedkit::load_dataset(o.data_dir);
  gedkit::LabelEncoder enc = gedkit::LabelEncoder::fit(ds.graphs);
  gedkit::ModelConfig mc = model_config(o);
  gedkit::TrainConfig tc;
  tc.iterations = o.iterations;
  tc.batch_size = o.batch_size;
  tc.lr = o.lr;
  tc.val_every = o.val_every;
  tc.seed = o.seed;

  std::ofstream log_file;
  std::ostream* log_stream = nullptr;
  if (!o.run_log.empty()) {
    log_file.open(o.run_log);
    if (!log_file) throw std::runtime_error("cannot write run log: " + o.run_log);
    log_stream = &log_file;
  }
  log_line("training " + method_name(mc) + " for " + std::to_string(tc.iterations) +
           " iterations (batch " + std::to_string(tc.batch_size) + ", lr " +
           std::to_string(tc.lr) + ", seed " + std::to_string(tc.seed) + ")");
  gedkit::TrainResult r = gedkit::train_model(ds, enc, mc, tc, log_stream);
  gedkit::save_checkpoint(o.ckpt_out, r.best_params, enc);
  log_line("best validation mse " + std::to_string(r.best_val_mse) +
           " at iteration " + std::to_string(r.best_iteration) +
           "; checkpoint written to " + o.ckpt_out);
  return 0;
}

int cmd_eval(const Options& o) {
  gedkit::Dataset ds = gedkit::load_dataset(o.data_dir);
  gedkit::SearchOptions so;
  so.max_expansions = o.budget;

  std::vector<std::pair<std::string, gedkit::SimilarityFn>> available;
  std::vector<gedkit::Checkpoint> loaded;  // keeps params alive for the lambdas
  loaded.reserve(o.ckpts.size());
  for (const auto& path : o.ckpts) {
    loaded.push_back(gedkit::load_checkpoint(path));
    const auto& ck = loaded.back();
    available.emplace_back(method_name(ck.params.config),
                           [&ck](const gedkit::Graph& a, const gedkit::Graph& b) {
                             return gedkit::predict_similarity(a, b, ck.params,
                                                               ck.encoder);
                           });
  }
  for (const char* algo : {"beam", "hungarian", "vj", "ensemble", "astar"})
    available.emplace_back(algo, gedkit::classical_similarity(algo, o.beam_width, so));

  std::vector<int> ks = split_ints(o.k_list);
  std::vector<gedkit::EvalReport> reports;
  for (const auto& want : split_csv(o.methods)) {
    bool found = false;
    for (const auto& [name, fn] : available) {
      if (name != want) continue;
      log_line("evaluating " + name);
      reports.push_back(gedkit::evaluate_method(name, fn, ds, ks));
      found = true;
      break;
    }
    if (!found)
      throw std::runtime_error("eval: no method '" + want +
                               "' (neural methods need a matching --ckpt)");
  }

  const std::string js = gedkit::report_to_json(reports, o.include_queries);
  if (o.report_out.empty()) {
    std::cout << js << "\n";
  } else {
    std::ofstream out(o.report_out);
    if (!out) throw std::runtime_error("cannot write report: " + o.report_out);
    out << js << "\n";
    log_line("wrote " + o.report_out);
  }
  if (!o.csv_out.empty()) {
    std::ofstream out(o.csv_out);
    if (!out) throw std::runtime_error("cannot write csv: " + o.csv_out);
    out << gedkit::report_to_csv(reports);
    log_line("wrote " + o.csv_out);
  }
  return 0;
}

int cmd_query(const Options& o) {
  gedkit::Checkpoint ck = gedkit::load_checkpoint(o.ckpts.front());
  gedkit::Dataset ds = gedkit::load_dataset(o.data_dir);
  gedkit::Graph q = gedkit::load_graph(o.query_graph);

  std::vector<std::string> db = ds.split.train;
  db.insert(db.end(), ds.split.val.begin(), ds.split.val.end());
  std::sort(db.begin(), db.end());

  gedkit::PredictDetail detail;
  std::vector<std::pair<std::string, double>> scored;
  for (const auto& did : db)
    scored.emplace_back(
        did, gedkit::predict_similarity(q, ds.by_id(did), ck.params, ck.encoder,
                                        scored.empty() ? &detail : nullptr));
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const int k = std::min<int>(o.topk, static_cast<int>(scored.size()));

  gedkit::SearchOptions so;
  so.max_expansions = o.budget;
  json ranking = json::array();
  for (int i = 0; i < k; ++i) {
    const auto& [id, pred] = scored[i];
    json row{{"rank", i + 1}, {"id", id}, {"predicted_similarity", pred}};
    const gedkit::Graph& d = ds.by_id(id);
    if (!o.no_true_ged &&
        std::max(q.node_count(), d.node_count()) <= o.size_threshold) {
      try {
        gedkit::GedResult r = gedkit::ged_astar(q, d, {}, so);
        row["true_ged"] = r.distance;
        row["true_nged"] =
            gedkit::pair_nged(r.distance, q.node_count(), d.node_count());
      } catch (const gedkit::BudgetExceeded&) {
        // leave the truth fields out
      }
    }
    ranking.push_back(row);
  }
  json out{{"query", q.id.empty() ? o.query_graph : q.id},
           {"topk", k},
           {"ranking", ranking},
           {"query_attention", detail.attention1}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph edit distance toolkit with a neural similarity model"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Options o;
  // Config-file values are applied before parsing, so explicit flags win.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      o.config_path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      o.config_path = arg.substr(9);
  }
  try {
    if (!o.config_path.empty()) apply_config_file(o, o.config_path);
  } catch (const std::exception& e) {
    std::cerr << "[gedkit] error: " << e.what() << "\n";
    return 2;
  }

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--jobs", o.jobs, "worker threads (1 = deterministic)");
    cmd->add_option("--config", o.config_path, "JSON config file (flags override it)");
  };

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_common(gen);
  gen->add_option("--out", o.out_dir, "output dataset directory")->required();
  gen->add_option("--n-graphs", o.n_graphs);
  gen->add_option("--min-nodes", o.min_nodes);
  gen->add_option("--max-nodes", o.max_nodes);
  gen->add_option("--alphabet", o.alphabet,
                  "comma-separated labels; empty = unlabeled");
  gen->add_option("--density-min", o.density_min);
  gen->add_option("--density-max", o.density_max);
  gen->add_option("--variants-per-base", o.variants_per_base);
  gen->add_option("--perturb-min", o.perturb_min);
  gen->add_option("--perturb-max", o.perturb_max);
  gen->add_option("--size-threshold", o.size_threshold,
                  "exact GED up to this node count, min-ensemble beyond");
  gen->add_option("--beam-width", o.beam_width);
  gen->add_option("--budget", o.budget, "A* expansion budget");

  CLI::App* ged = app.add_subcommand("ged", "compute GED between two graph files");
  add_common(ged);
  ged->add_option("--algo", o.algo, "bruteforce|astar|beam|hungarian|vj|ensemble");
  ged->add_option("--g1", o.g1_path)->required();
  ged->add_option("--g2", o.g2_path)->required();
  ged->add_option("--beam-width", o.beam_width);
  ged->add_option("--budget", o.budget);
  ged->add_flag("--no-edit-path", o.no_edit_path, "omit the edit path from output");

  CLI::App* train = app.add_subcommand("train", "train a similarity model");
  add_common(train);
  train->add_option("--data", o.data_dir)->required();
  train->add_option("--out", o.ckpt_out, "checkpoint path")->required();
  train->add_option("--iterations", o.iterations);
  train->add_option("--batch-size", o.batch_size);
  train->add_option("--lr", o.lr);
  train->add_option("--val-every", o.val_every);
  train->add_option("--pooling", o.pooling,
                    "simple-mean|degree|global-context|learnable-gc");
  train->add_flag("--strategy2,!--no-strategy2", o.strategy2,
                  "pairwise-node histogram features");
  train->add_option("--gcn-dims", o.gcn_dims);
  train->add_option("--ntn-k", o.ntn_k);
  train->add_option("--hist-bins", o.hist_bins);
  train->add_option("--fc-dims", o.fc_dims);
  train->add_option("--run-log", o.run_log, "JSON-lines training log file");

  CLI::App* eval = app.add_subcommand("eval", "ranking evaluation on the test split");
  add_common(eval);
  eval->add_option("--data", o.data_dir)->required();
  eval->add_option("--ckpt", o.ckpts, "checkpoint(s); method name comes from config");
  eval->add_option("--methods", o.methods,
                   "comma list: simgnn,simplemean,...,beam,hungarian,vj,ensemble");
  eval->add_option("--k", o.k_list, "precision@k cutoffs");
  eval->add_option("--out", o.report_out, "report JSON path (stdout if omitted)");
  eval->add_option("--csv", o.csv_out, "flat CSV (method,metric,value)");
  eval->add_flag("--include-queries", o.include_queries,
                 "embed per-query rankings in the report");
  eval->add_option("--beam-width", o.beam_width);
  eval->add_option("--budget", o.budget);

  CLI::App* query =
      app.add_subcommand("query", "rank the database against a query graph");
  add_common(query);
  query->add_option("--ckpt", o.ckpts)->required();
  query->add_option("--data", o.data_dir)->required();
  query->add_option("--graph", o.query_graph, "query graph file")->required();
  query->add_option("--topk", o.topk);
  query->add_option("--size-threshold", o.size_threshold,
                    "compute true GED for results up to this size");
  query->add_option("--budget", o.budget);
  query->add_flag("--no-true-ged", o.no_true_ged);

  CLI::App* selftest =
      app.add_subcommand("selftest", "gradient checks and oracle equivalences");
  add_common(selftest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1
  }

  try {
    if (gen->parsed()) return cmd_gen(o);
    if (ged->parsed()) return cmd_ged(o);
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o);
    if (query->parsed()) return cmd_query(o);
    if (selftest->parsed()) return gedkit::run_selftest(std::cout) ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "[gedkit] error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
