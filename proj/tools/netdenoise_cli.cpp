// netdenoise: command-line front end.
//
//   netdenoise synth    --config planted.json --out DIR
//   netdenoise estimate --in DIR --method em --out DIR
//   netdenoise eval     --est PATH --truth PATH
//   netdenoise sweep    --config experiment.json
//   netdenoise brain    --stack DIR --nu-grid 0.2:0.8:0.05
//   netdenoise diag     --p 0.25 --q 0.25 --N 1e6 --json
//
// Exit status: 0 success, 2 configuration or usage error, 3 data error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netdenoise/core_model.hpp"
#include "netdenoise/em.hpp"
#include "netdenoise/io.hpp"
#include "netdenoise/metrics.hpp"
#include "netdenoise/oracle.hpp"
#include "netdenoise/pipeline.hpp"
#include "netdenoise/spectral.hpp"
#include "netdenoise/synthgen.hpp"
#include "netdenoise/theory.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace netdenoise;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

json read_json(const fs::path& p) {
  try {
    return json::parse(io::read_text(p));
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

/// A single network from either an adjacency file or a one-network bundle.
BinaryNetwork load_network(const fs::path& p) {
  if (fs::is_directory(p)) {
    auto nets = io::read_bundle_networks(p);
    if (nets.size() != 1) throw DataError(p.string() + ": expected a bundle with exactly one network");
    return std::move(nets.front());
  }
  return io::read_adjacency(p);
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto parts = io::split(spec, ':');
  if (parts.size() != 3) throw ConfigError("--nu-grid must look like a:b:step");
  double a = 0, b = 0, step = 0;
  try {
    a = io::parse_number<double>(parts[0], "--nu-grid");
    b = io::parse_number<double>(parts[1], "--nu-grid");
    step = io::parse_number<double>(parts[2], "--nu-grid");
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  if (!(step > 0.0) || b < a) throw ConfigError("--nu-grid needs a <= b and step > 0");
  std::vector<double> grid;
  // Grid points are a + i*step, so rounding error does not accumulate.
  for (long i = 0;; ++i) {
    const double v = a + double(i) * step;
    if (v > b + 1e-9 * step) break;
    grid.push_back(v);
  }
  return grid;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string out = "synth_out";
  std::optional<std::uint64_t> seed;
  std::string format = "dense-csv";
  bool stack = false;
  double signal = 0.6, noise_sd = 0.2;
};

int run_synth(const SynthArgs& a) {
  PlantedConfig pc = a.config.empty() ? PlantedConfig{} : planted_from_json(read_json(a.config));
  if (a.seed) pc.seed = *a.seed;
  const BlockParams params = planted_params(pc);
  const auto fmt = io::parse_format(a.format);
  const fs::path out = a.out;
  const BinaryNetwork truth = sample_sbm(params, derive_seed(pc.seed, {1}));
  const NetworkSample sample = corrupt_sample(truth, params, pc.N, derive_seed(pc.seed, {2}));
  io::write_bundle(out / "truth", {truth}, fmt);
  io::write_bundle(out / "sample", sample.observations(), fmt);
  io::write_text(out / "params.json", io::block_params_json(params).dump(2) + "\n");
  io::write_text(out / "labels.csv", io::labels_text(params.labels));
  if (a.stack)
    write_stack(out / "stack",
                synthetic_correlation_stack(truth, pc.N, a.signal, a.noise_sd, derive_seed(pc.seed, {3})));
  json prov = {{"command", "synth"}, {"planted", planted_json(pc)}, {"format", a.format}};
  io::write_text(out / "provenance.json", prov.dump(2) + "\n");
  std::cout << "wrote " << out.string() << " (n=" << pc.n << ", N=" << pc.N << ", edges=" << truth.edge_count()
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string in, out = "estimate_out", method = "em", params, labels, format = "dense-csv";
  int k = 3, t_outer = 2, em_iters = 20;
  double target_fdr = 0.05;
  std::uint64_t seed = 1;
  bool conservative = false;
};

void write_block_tables(const fs::path& out, const BlockParams& bp) {
  io::write_text(out / "w.csv", io::matrix_csv(bp.B));
  io::write_text(out / "p.csv", io::matrix_csv(bp.P));
  io::write_text(out / "q.csv", io::matrix_csv(bp.Q));
}

std::string trace_csv(const std::vector<EmTraceRow>& trace) {
  std::string s = "round,iteration,block,w,p,q\n";
  for (const auto& r : trace)
    s += std::to_string(r.round) + "," + std::to_string(r.iteration) + "," + std::to_string(r.k + 1) + "-" +
         std::to_string(r.l + 1) + "," + io::format_double(r.theta.w) + "," + io::format_double(r.theta.p) + "," +
         io::format_double(r.theta.q) + "\n";
  return s;
}

int run_estimate(const EstimateArgs& a) {
  const Method method = parse_method(a.method);
  const auto fmt = io::parse_format(a.format);
  const NetworkSample sample = io::read_bundle(a.in);
  const fs::path out = a.out;
  EmOptions opt;
  opt.K = a.k;
  opt.outer_rounds = a.t_outer;
  opt.em_iterations = a.em_iters;
  const LrtMode mode = a.conservative ? LrtMode::Conservative : LrtMode::Randomized;
  json report = {{"method", method_name(method)}, {"seed", a.seed}, {"n", sample.size()}, {"N", sample.count()}};
  std::vector<std::string> warnings;
  BinaryNetwork est;
  Labels labels;

  switch (method) {
    case Method::MV: {
      est = majority_vote(sample);
      labels = spectral_cluster(est, a.k, derive_seed(a.seed, {3}), opt.kmeans);
      const MvParams mv = mv_params(sample, est, labels);
      io::write_text(out / "w.csv", io::matrix_csv(mv.W_block));
      warnings = mv.warnings;
      break;
    }
    case Method::EM:
    case Method::EMT: {
      EmReport rep;
      if (!a.labels.empty()) {
        const Labels given = io::read_labels(a.labels, a.k);
        opt.K = given.communities();
        rep = em_fit_labels(sample, given, opt);
      } else {
        rep = em_fit(sample, opt, a.seed);
      }
      if (method == Method::EMT)
        apply_plugin_lrt(sample, rep.params, a.target_fdr, a.seed, mode, rep.A_hat, rep.warnings);
      est = rep.A_hat;
      labels = rep.labels;
      write_block_tables(out, rep.params);
      io::write_text(out / "fit_labels.csv", io::labels_text(rep.params.labels));
      io::write_text(out / "trace.csv", trace_csv(rep.trace));
      warnings = rep.warnings;
      break;
    }
    case Method::OP:
    case Method::OPT: {
      if (a.params.empty()) throw ConfigError("--params is required for oracle methods");
      const BlockParams truth = io::block_params_from_json(read_json(a.params));
      est = method == Method::OP ? mle_estimate(sample, truth) : lrt_estimate(sample, truth, a.target_fdr, a.seed, mode);
      labels = truth.labels;
      write_block_tables(out, truth);
      break;
    }
  }
  io::write_bundle(out / "A_hat", {est}, fmt);
  io::write_text(out / "labels.csv", io::labels_text(labels));
  report["edges"] = est.edge_count();
  report["warnings"] = warnings;
  io::write_text(out / "report.json", report.dump(2) + "\n");
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << method_name(method) << ": " << est.edge_count() << " edges -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string est, truth, est_labels, truth_labels;
  bool summaries = false;
  std::uint64_t seed = 1;
};

int run_eval(const EvalArgs& a) {
  const BinaryNetwork est = load_network(a.est);
  const BinaryNetwork truth = load_network(a.truth);
  const auto ft = fdr_tpr(est, truth);
  json r = {{"fdr", ft.fdr}, {"tpr", ft.tpr}, {"edges_est", est.edge_count()}, {"edges_truth", truth.edge_count()}};
  if (!a.est_labels.empty() && !a.truth_labels.empty()) {
    const Labels tl = io::read_labels(a.truth_labels), el = io::read_labels(a.est_labels);
    const auto g = label_error_gamma(tl, el);
    r["gamma"] = g.gamma;
    r["overlap"] = g.overlap();
  }
  if (a.summaries) {
    const auto s = graph_summaries(est, a.seed);
    r["summaries"] = {{"avg_degree", s.avg_degree},
                      {"efficiency", s.global_efficiency},
                      {"transitivity", s.transitivity},
                      {"modularity", s.modularity_defined ? json(s.modularity) : json(nullptr)},
                      {"k_hat", s.k_hat}};
  }
  std::cout << r.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string config, out;
  std::optional<int> workers;
  std::optional<int> reps;
};

int run_sweep_cmd(const SweepArgs& a) {
  ExperimentConfig cfg = experiment_from_json(read_json(a.config));
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.reps) {
    cfg.reps = *a.reps;
    cfg.validate();
  }
  const SweepResult res = run_sweep(cfg, a.workers);
  write_sweep(cfg.output_dir, cfg, res);
  std::size_t na = 0;
  for (const auto& r : res.rows) na += std::isnan(r.fdr);
  std::cout << res.rows.size() << " rows -> " << cfg.output_dir << (na ? " (" + std::to_string(na) + " NA)" : "")
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BrainArgs {
  std::string stack, grid = "0.1:0.9:0.05", out = "brain_out";
  std::optional<int> k;
  std::uint64_t seed = 1;
  int workers = 1, t_outer = 2, em_iters = 20;
  std::vector<std::string> methods;
};

int run_brain(const BrainArgs& a) {
  for (const auto& m : a.methods) {
    const Method mm = parse_method(m);
    if (mm == Method::OP || mm == Method::OPT) throw ConfigError("oracle methods need a planted truth");
    if (mm == Method::EMT) throw ConfigError("EM-T is not part of the thresholding pipeline");
  }
  const CorrelationStack stack = read_stack(a.stack);
  BrainOptions opt;
  opt.K = a.k;
  opt.workers = a.workers;
  opt.em.outer_rounds = a.t_outer;
  opt.em.em_iterations = a.em_iters;
  const BrainResult res = brain_sweep(stack, parse_grid(a.grid), opt, a.seed);
  const fs::path out = a.out;
  io::write_text(out / "results.csv", res.results_csv);
  io::write_text(out / "metadata.json", res.metadata.dump(2) + "\n");
  std::cout << res.rows.size() << " rows -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int run_diag(const theory::BoundInputs& in, bool as_json) {
  const auto cond = theory::check_conditions(in);
  const auto b = theory::theorem1_bound(in);
  if (as_json) {
    json c = json::array();
    for (const auto& x : cond.conditions)
      c.push_back({{"name", x.name}, {"lhs", x.lhs}, {"rhs", x.rhs}, {"pass", x.pass}, {"margin", x.margin}});
    json r = {{"in_region", cond.in_region},
              {"conditions", c},
              {"all_pass", cond.all_pass()},
              {"h_p", theory::h(in.p)},
              {"h_q", theory::h(in.q)},
              {"phi_p", theory::phi(in.p)},
              {"phi_q", theory::phi(in.q)},
              {"varphi", theory::varphi(in.p, in.q)},
              {"bound",
               {{"total", b.bound},
                {"contraction", b.contraction},
                {"label_term", b.label_term},
                {"stat_term", b.stat_term},
                {"Phi", b.Phi},
                {"Phi_sqrt_branch", b.Phi_sqrt_branch},
                {"Phi_exp_branch", b.Phi_exp_branch}}}};
    std::cout << r.dump(2) << "\n";
    return 0;
  }
  std::cout << "region delta <= p,q <= 1/2 - delta: " << (cond.in_region ? "yes" : "no") << "\n";
  for (const auto& x : cond.conditions)
    std::cout << "  " << x.name << ": " << x.lhs << " vs " << x.rhs << (x.pass ? "  ok" : "  FAILS") << "\n";
  std::cout << "bound " << b.bound << " = contraction " << b.contraction << " + label " << b.label_term
            << " + statistical " << b.stat_term << " (Phi " << b.Phi << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network denoising from repeated noisy observations"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Sample a planted truth and its noisy observations");
  synth->add_option("--config", sa.config, "planted-model JSON (defaults when omitted)");
  synth->add_option("--out", sa.out, "output directory");
  synth->add_option("--seed", sa.seed, "overrides the config seed");
  synth->add_option("--format", sa.format, "dense-csv or edge-tsv");
  synth->add_flag("--stack", sa.stack, "also write a synthetic correlation stack");
  synth->add_option("--signal", sa.signal, "stack: correlation added on true edges");
  synth->add_option("--noise-sd", sa.noise_sd, "stack: Gaussian noise level");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Recover the network from a sample bundle");
  estimate->add_option("--in", ea.in, "sample bundle directory")->required();
  estimate->add_option("--out", ea.out, "output directory");
  estimate->add_option("--method", ea.method, "mv | em | em-t | op | op-t");
  estimate->add_option("--k", ea.k, "number of communities");
  estimate->add_option("--t-outer", ea.t_outer, "outer EM rounds (T)");
  estimate->add_option("--em-iters", ea.em_iters, "EM iterations per block");
  estimate->add_option("--target-fdr", ea.target_fdr, "target FDR for the test variants");
  estimate->add_option("--seed", ea.seed);
  estimate->add_option("--params", ea.params, "true block parameters (oracle methods)");
  estimate->add_option("--labels", ea.labels, "fix community labels for EM (1-based, one per line)");
  estimate->add_option("--format", ea.format, "output adjacency format");
  estimate->add_flag("--conservative", ea.conservative, "reject only strictly above k_alpha");

  EvalArgs va;
  auto* eval = app.add_subcommand("eval", "Compare an estimate with the truth");
  eval->add_option("--est", va.est, "estimated network (file or bundle)")->required();
  eval->add_option("--truth", va.truth, "true network (file or bundle)")->required();
  eval->add_option("--est-labels", va.est_labels);
  eval->add_option("--truth-labels", va.truth_labels);
  eval->add_flag("--summaries", va.summaries, "also report graph summaries of the estimate");
  eval->add_option("--seed", va.seed);

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Run a simulation sweep");
  sweep->add_option("--config", wa.config, "experiment JSON")->required();
  sweep->add_option("--workers", wa.workers, "worker threads (output does not depend on this)");
  sweep->add_option("--out", wa.out, "overrides output_dir");
  sweep->add_option("--reps", wa.reps, "overrides reps");

  BrainArgs ba;
  auto* brain = app.add_subcommand("brain", "Threshold a correlation stack over a grid of nu");
  brain->add_option("--stack", ba.stack, "stack directory")->required();
  brain->add_option("--nu-grid", ba.grid, "a:b:step");
  brain->add_option("--k", ba.k, "fix K (default: Bethe-Hessian estimate per nu)");
  brain->add_option("--seed", ba.seed);
  brain->add_option("--out", ba.out);
  brain->add_option("--workers", ba.workers);
  brain->add_option("--t-outer", ba.t_outer);
  brain->add_option("--em-iters", ba.em_iters);
  brain->add_option("--methods", ba.methods, "accepted for symmetry with sweep; oracle methods are rejected");

  theory::BoundInputs di;
  bool diag_json = false;
  auto* diag = app.add_subcommand("diag", "Convergence conditions and error bound for block EM");
  diag->add_option("--delta", di.delta);
  diag->add_option("--w", di.w);
  diag->add_option("--p", di.p);
  diag->add_option("--q", di.q);
  diag->add_option("--N", di.N);
  diag->add_option("--nk", di.n_k);
  diag->add_option("--nl", di.n_l);
  diag->add_option("--gamma", di.gamma);
  diag->add_option("--r", di.r);
  diag->add_option("--t", di.t);
  diag->add_option("--init-dist", di.init_dist);
  diag->add_option("--C", di.C);
  diag->add_flag("--json", diag_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) return run_synth(sa);
    if (*estimate) return run_estimate(ea);
    if (*eval) return run_eval(va);
    if (*sweep) return run_sweep_cmd(wa);
    if (*brain) return run_brain(ba);
    if (*diag) return run_diag(di, diag_json);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
