#pragma once

// Simulation sweeps over the planted model and the correlation
// thresholding pipeline.

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "netdenoise/core_model.hpp"
#include "netdenoise/em.hpp"
#include "netdenoise/io.hpp"
#include "netdenoise/metrics.hpp"
#include "netdenoise/oracle.hpp"
#include "netdenoise/spectral.hpp"
#include "netdenoise/synthgen.hpp"

namespace netdenoise {

/// Runs fn(0..count-1) on `workers` threads. Each index writes only its
/// own output slot, so results do not depend on the schedule. The first
/// exception is rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t count, int workers, F&& fn) {
  const auto nthreads = std::size_t(std::max(1, workers));
  if (nthreads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(nthreads, count); ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline constexpr double kNA = std::numeric_limits<double>::quiet_NaN();

/// One line of a results CSV.
struct ResultRow {
  std::string method;
  int rep = 0;
  double nu = kNA;
  double fdr = kNA, tpr = kNA, overlap = kNA;
  double err_w = kNA, err_p = kNA, err_q = kNA;
  double avg_degree = kNA, efficiency = kNA, transitivity = kNA, modularity = kNA, k_hat = kNA;
  std::string axis;
  double value = kNA;
  std::uint64_t seed = 0;
};

inline const char* kResultsHeader =
    "method,rep,nu,fdr,tpr,overlap,err_w,err_p,err_q,avg_degree,efficiency,transitivity,modularity,k_hat,"
    "axis,value,seed\n";

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  using io::format_double;
  std::string out = kResultsHeader;
  for (const auto& r : rows) {
    out += r.method + "," + std::to_string(r.rep) + "," + format_double(r.nu);
    for (double v : {r.fdr, r.tpr, r.overlap, r.err_w, r.err_p, r.err_q, r.avg_degree, r.efficiency,
                     r.transitivity, r.modularity, r.k_hat})
      out += "," + format_double(v);
    out += "," + r.axis + "," + format_double(r.value) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

inline void set_summaries(ResultRow& row, const GraphSummaries& s) {
  row.avg_degree = s.avg_degree;
  row.efficiency = s.global_efficiency;
  row.transitivity = s.transitivity;
  row.modularity = s.modularity_defined ? s.modularity : kNA;
  row.k_hat = s.k_hat;
}

// ---------------------------------------------------------------------------
// Correlation stacks

/// M symmetric n x n correlation matrices with unit diagonal.
struct CorrelationStack {
  std::size_t n = 0;
  std::vector<SquareMatrix<double>> subjects;

  void validate() const {
    if (subjects.empty()) throw DataError("correlation stack is empty");
    for (const auto& c : subjects) {
      if (c.size() != n) throw DataError("correlation matrix size differs from n");
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (!(std::abs(c(i, j)) <= 1.0)) throw DataError("correlation entry outside [-1, 1]");
          if (std::abs(c(i, j) - c(j, i)) > 1e-9) throw DataError("correlation matrix not symmetric");
        }
    }
  }
};

/// A^(m)_ij = 1{|C^(m)_ij| > nu}, zero diagonal.
inline NetworkSample threshold_stack(const CorrelationStack& stack, double nu) {
  if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("nu must lie in (0, 1)");
  std::vector<BinaryNetwork> obs;
  for (const auto& c : stack.subjects) {
    BinaryNetwork g(stack.n);
    for (std::size_t i = 0; i < stack.n; ++i)
      for (std::size_t j = i + 1; j < stack.n; ++j)
        if (std::abs(c(i, j)) > nu) g.set_edge(i, j, true);
    obs.push_back(std::move(g));
  }
  return vote_matrix(std::move(obs));
}

/// Synthetic subjects: C_ij = clamp(signal * A_ij + noise_sd * z_ij, -1, 1)
/// with independent standard normal z per subject and pair.
inline CorrelationStack synthetic_correlation_stack(const BinaryNetwork& truth, int subjects, double signal,
                                                    double noise_sd, std::uint64_t seed) {
  if (subjects < 1) throw ConfigError("need at least one subject");
  CorrelationStack s{truth.size(), {}};
  for (int m = 0; m < subjects; ++m) {
    Rng rng(derive_seed(seed, {0xc0, std::uint64_t(m)}));
    SquareMatrix<double> c(truth.size(), 0.0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      c(i, i) = 1.0;
      for (std::size_t j = i + 1; j < truth.size(); ++j)
        c(i, j) = c(j, i) = std::clamp(signal * truth.edge(i, j) + noise_sd * rng.normal(), -1.0, 1.0);
    }
    s.subjects.push_back(std::move(c));
  }
  return s;
}

/// Directory with manifest.json {"n", "M", "files"} and one dense CSV per
/// subject.
inline CorrelationStack read_stack(const std::filesystem::path& dir) {
  const auto m = io::read_manifest(dir);
  CorrelationStack s;
  try {
    s.n = m.at("n").get<std::size_t>();
    const auto files = m.at("files").get<std::vector<std::string>>();
    if (m.contains("M") && m.at("M").get<std::size_t>() != files.size())
      throw DataError("manifest: M does not match file count");
    for (const auto& f : files) {
      const auto rows = io::read_real_matrix_csv(dir / f);
      SquareMatrix<double> c(s.n);
      if (rows.size() != s.n) throw DataError(f + ": row count differs from n");
      for (std::size_t i = 0; i < s.n; ++i) {
        if (rows[i].size() != s.n) throw DataError(f + ": matrix is not n x n");
        for (std::size_t j = 0; j < s.n; ++j) c(i, j) = rows[i][j];
      }
      s.subjects.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("stack manifest: " + std::string(e.what()));
  }
  s.validate();
  return s;
}

inline void write_stack(const std::filesystem::path& dir, const CorrelationStack& s) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t m = 0; m < s.subjects.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "subject_%04zu.csv", m + 1);
    io::write_text(dir / name, io::matrix_csv(s.subjects[m]));
    files.push_back(name);
  }
  nlohmann::json manifest = {{"n", s.n}, {"M", s.subjects.size()}, {"files", files}};
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Planted-model sweeps

enum class Method { MV, EM, EMT, OP, OPT };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::MV: return "MV";
    case Method::EM: return "EM";
    case Method::EMT: return "EM-T";
    case Method::OP: return "OP";
    case Method::OPT: return "OP-T";
  }
  return "?";
}

inline Method parse_method(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::toupper(c)); });
  if (s == "MV") return Method::MV;
  if (s == "EM") return Method::EM;
  if (s == "EM-T" || s == "EMT" || s == "EM[T]") return Method::EMT;
  if (s == "OP") return Method::OP;
  if (s == "OP-T" || s == "OPT" || s == "OP[T]") return Method::OPT;
  throw ConfigError("unknown method '" + s + "'");
}

struct ExperimentConfig {
  PlantedConfig planted;
  std::vector<Method> methods{Method::MV, Method::EM, Method::EMT, Method::OP, Method::OPT};
  double target_fdr = 0.05;
  int reps = 20;
  std::string sweep_param = "beta_w";
  std::vector<double> sweep_values{0.2};
  std::string output_dir = "sweep_out";
  std::uint64_t seed = 1;
  int workers = 1;
  EmOptions em{};
  bool summaries = false;
  double corr_signal = 0.6;    ///< nu axis only
  double corr_noise_sd = 0.2;  ///< nu axis only

  void validate() const {
    static const std::vector<std::string> axes{"N", "beta_w", "beta_p", "beta_q", "nu"};
    if (std::find(axes.begin(), axes.end(), sweep_param) == axes.end())
      throw ConfigError("sweep axis must be one of N, beta_w, beta_p, beta_q, nu");
    if (sweep_values.empty()) throw ConfigError("sweep needs at least one value");
    if (reps < 1) throw ConfigError("reps must be >= 1");
    if (methods.empty()) throw ConfigError("no methods requested");
    if (!(target_fdr > 0.0 && target_fdr < 1.0)) throw ConfigError("target_fdr must lie in (0,1)");
    for (double v : sweep_values) (void)apply_axis(v);
  }

  /// Planted configuration at one grid value (the nu axis leaves it unchanged).
  PlantedConfig apply_axis(double v) const {
    PlantedConfig c = planted;
    if (sweep_param == "N") {
      if (v < 1 || v != std::floor(v)) throw ConfigError("N grid values must be positive integers");
      c.N = int(v);
    } else if (sweep_param == "beta_w") {
      c.beta_w = v;
    } else if (sweep_param == "beta_p") {
      c.beta_p = v;
    } else if (sweep_param == "beta_q") {
      c.beta_q = v;
    } else if (!(v > 0.0 && v < 1.0)) {
      throw ConfigError("nu grid values must lie in (0,1)");
    }
    (void)planted_params(c);
    return c;
  }
};

/// Missing keys keep their PlantedConfig defaults.
inline PlantedConfig planted_from_json(const nlohmann::json& p) {
  PlantedConfig pc;
  try {
    pc.n = p.value("n", pc.n);
    pc.K = p.value("K", pc.K);
    pc.sizes = p.value("sizes", pc.sizes);
    pc.rho_w = p.value("rho_w", pc.rho_w);
    pc.beta_w = p.value("beta_w", pc.beta_w);
    pc.rho_p = p.value("rho_p", pc.rho_p);
    pc.beta_p = p.value("beta_p", pc.beta_p);
    pc.rho_q = p.value("rho_q", pc.rho_q);
    pc.beta_q = p.value("beta_q", pc.beta_q);
    pc.N = p.value("N", pc.N);
    pc.seed = p.value("seed", pc.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("planted config: ") + e.what());
  }
  return pc;
}

inline nlohmann::json planted_json(const PlantedConfig& pc) {
  return {{"n", pc.n},         {"K", pc.K},         {"sizes", pc.community_sizes()},
          {"rho_w", pc.rho_w}, {"beta_w", pc.beta_w}, {"rho_p", pc.rho_p},
          {"beta_p", pc.beta_p}, {"rho_q", pc.rho_q}, {"beta_q", pc.beta_q},
          {"N", pc.N},         {"seed", pc.seed}};
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("planted")) c.planted = planted_from_json(j.at("planted"));
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    c.target_fdr = j.value("target_fdr", c.target_fdr);
    c.reps = j.value("reps", c.reps);
    if (j.contains("sweep")) {
      c.sweep_param = j.at("sweep").at("param").get<std::string>();
      c.sweep_values = j.at("sweep").at("values").get<std::vector<double>>();
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    if (j.contains("em")) {
      const auto& e = j.at("em");
      c.em.outer_rounds = e.value("T", c.em.outer_rounds);
      c.em.em_iterations = e.value("iterations", c.em.em_iterations);
      c.em.tol = e.value("tol", c.em.tol);
      c.em.kmeans.restarts = e.value("kmeans_restarts", c.em.kmeans.restarts);
      c.em.kmeans.iterations = e.value("kmeans_iterations", c.em.kmeans.iterations);
    }
    c.summaries = j.value("summaries", c.summaries);
    if (j.contains("correlation")) {
      c.corr_signal = j.at("correlation").value("signal", c.corr_signal);
      c.corr_noise_sd = j.at("correlation").value("noise_sd", c.corr_noise_sd);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.em.K = c.planted.K;
  c.validate();
  return c;
}

namespace detail {

/// Evaluates every requested method on one (grid value, replication).
inline std::vector<ResultRow> run_replication(const ExperimentConfig& cfg, std::size_t grid_index, int rep) {
  const double value = cfg.sweep_values[grid_index];
  const bool nu_axis = cfg.sweep_param == "nu";
  const PlantedConfig pc = cfg.apply_axis(value);
  const BlockParams truth_params = planted_params(pc);
  // On the nu axis every grid value thresholds the same subjects.
  const std::uint64_t rep_seed = nu_axis ? derive_seed(cfg.seed, {0xa11, std::uint64_t(rep)})
                                         : derive_seed(cfg.seed, {std::uint64_t(grid_index), std::uint64_t(rep)});
  const BinaryNetwork truth = sample_sbm(truth_params, derive_seed(rep_seed, {1}));
  const NetworkSample sample =
      nu_axis ? threshold_stack(synthetic_correlation_stack(truth, pc.N, cfg.corr_signal, cfg.corr_noise_sd,
                                                            derive_seed(rep_seed, {2})),
                                value)
              : corrupt_sample(truth, truth_params, pc.N, derive_seed(rep_seed, {2}));
  EmOptions em = cfg.em;
  em.K = pc.K;

  std::optional<EmReport> em_report;
  auto get_em = [&]() -> const EmReport& {
    if (!em_report) em_report = em_fit(sample, em, derive_seed(rep_seed, {4}));
    return *em_report;
  };

  std::vector<ResultRow> rows;
  for (Method m : cfg.methods) {
    ResultRow row;
    row.method = method_name(m);
    row.rep = rep;
    row.nu = nu_axis ? value : kNA;
    row.axis = cfg.sweep_param;
    row.value = value;
    row.seed = cfg.seed;
    std::optional<BinaryNetwork> est;
    std::optional<Labels> labels;
    std::optional<ParamErrors> errs;
    switch (m) {
      case Method::MV: {
        est = majority_vote(sample);
        labels = spectral_cluster(*est, pc.K, derive_seed(rep_seed, {3}), em.kmeans);
        errs = mv_param_errors(mv_params(sample, *est, *labels), truth_params);
        break;
      }
      case Method::EM: {
        const auto& r = get_em();
        est = r.A_hat;
        labels = r.labels;
        errs = block_param_errors(r.params, truth_params);
        break;
      }
      case Method::EMT: {
        const auto& r = get_em();
        BinaryNetwork a = r.A_hat;
        std::vector<std::string> warnings;
        apply_plugin_lrt(sample, r.params, cfg.target_fdr, derive_seed(rep_seed, {5}), LrtMode::Randomized, a,
                         warnings);
        est = std::move(a);
        labels = spectral_cluster(*est, pc.K, derive_seed(rep_seed, {3}), em.kmeans);
        errs = block_param_errors(r.params, truth_params);
        break;
      }
      case Method::OP:
      case Method::OPT: {
        if (nu_axis) break;  // no closed-form noise rates for thresholded correlations
        try {
          est = m == Method::OP ? mle_estimate(sample, truth_params)
                                : lrt_estimate(sample, truth_params, cfg.target_fdr, derive_seed(rep_seed, {5}));
        } catch (const ConfigError&) {
          est.reset();  // infeasible target in some block: NA row
        }
        if (est) labels = spectral_cluster(*est, pc.K, derive_seed(rep_seed, {3}), em.kmeans);
        break;
      }
    }
    if (est) {
      const auto ft = fdr_tpr(*est, truth);
      row.fdr = ft.fdr;
      row.tpr = ft.tpr;
      row.overlap = label_error_gamma(truth_params.labels, *labels).overlap();
      if (errs) {
        row.err_w = errs->w.value;
        if (!nu_axis) {
          row.err_p = errs->p.value;
          row.err_q = errs->q.value;
        }
      }
      if (cfg.summaries) set_summaries(row, graph_summaries(*est, derive_seed(rep_seed, {6})));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Mean and standard error per (grid value, method) for every metric.
inline std::string summary_csv(const std::vector<ResultRow>& rows) {
  using io::format_double;
  static const char* names[] = {"fdr", "tpr", "overlap", "err_w", "err_p", "err_q", "avg_degree",
                                "efficiency", "transitivity", "modularity", "k_hat"};
  std::string out = "axis,value,method,reps";
  for (const char* n : names) out += std::string(",mean_") + n + ",se_" + n;
  out += "\n";
  // Group in first-appearance order.
  std::vector<std::pair<std::string, std::vector<const ResultRow*>>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    const std::string key = r.axis + "|" + format_double(r.value) + "|" + r.method;
    auto [it, fresh] = index.try_emplace(key, groups.size());
    if (fresh) groups.push_back({key, {}});
    groups[it->second].second.push_back(&r);
  }
  for (const auto& [key, members] : groups) {
    const ResultRow& first = *members.front();
    out += first.axis + "," + format_double(first.value) + "," + first.method + "," + std::to_string(members.size());
    for (int f = 0; f < 11; ++f) {
      double sum = 0.0, sq = 0.0;
      int cnt = 0;
      for (const ResultRow* r : members) {
        const double v = std::array{r->fdr, r->tpr, r->overlap, r->err_w, r->err_p, r->err_q, r->avg_degree,
                                    r->efficiency, r->transitivity, r->modularity, r->k_hat}[std::size_t(f)];
        if (std::isnan(v)) continue;
        sum += v;
        sq += v * v;
        ++cnt;
      }
      const double mean = cnt ? sum / cnt : kNA;
      const double se = cnt > 1 ? std::sqrt(std::max(0.0, (sq - cnt * mean * mean) / (cnt - 1)) / cnt) : kNA;
      out += "," + format_double(mean) + "," + format_double(se);
    }
    out += "\n";
  }
  return out;
}

struct SweepResult {
  std::vector<ResultRow> rows;
  std::string results_csv;
  std::string summary_csv;
};

/// Runs every (grid value, replication) job on `workers` threads and
/// collects rows in grid-major, replication-minor, method order.
inline SweepResult run_sweep(const ExperimentConfig& cfg, std::optional<int> workers = std::nullopt) {
  cfg.validate();
  const std::size_t G = cfg.sweep_values.size(), R = std::size_t(cfg.reps);
  std::vector<std::vector<ResultRow>> slots(G * R);
  parallel_for(G * R, workers.value_or(cfg.workers),
               [&](std::size_t job) { slots[job] = detail::run_replication(cfg, job / R, int(job % R)); });
  SweepResult res;
  for (auto& s : slots)
    for (auto& r : s) res.rows.push_back(std::move(r));
  res.results_csv = results_csv(res.rows);
  res.summary_csv = summary_csv(res.rows);
  return res;
}

inline void write_sweep(const std::filesystem::path& dir, const ExperimentConfig& cfg, const SweepResult& res) {
  io::write_text(dir / "results.csv", res.results_csv);
  io::write_text(dir / "summary.csv", res.summary_csv);
  nlohmann::json prov = {{"seed", cfg.seed},
                         {"reps", cfg.reps},
                         {"sweep", {{"param", cfg.sweep_param}, {"values", cfg.sweep_values}}},
                         {"target_fdr", cfg.target_fdr}};
  io::write_text(dir / "provenance.json", prov.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Correlation-thresholding sweep

struct BrainOptions {
  std::optional<int> K;  ///< fixed K for EM; otherwise the Bethe-Hessian count of MV at each nu
  EmOptions em{};
  bool subject_summaries = true;
  int workers = 1;
};

struct BrainResult {
  std::vector<ResultRow> rows;
  nlohmann::json metadata;
  std::string results_csv;
};

inline BrainResult brain_sweep(const CorrelationStack& stack, const std::vector<double>& nu_grid,
                               const BrainOptions& opt, std::uint64_t seed) {
  stack.validate();
  if (nu_grid.empty()) throw ConfigError("nu grid is empty");
  for (double nu : nu_grid)
    if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("nu values must lie in (0, 1)");
  if (opt.K && *opt.K < 1) throw ConfigError("K must be >= 1");

  std::vector<std::vector<ResultRow>> slots(nu_grid.size());
  std::vector<int> k_used(nu_grid.size(), 0);
  parallel_for(nu_grid.size(), opt.workers, [&](std::size_t g) {
    const double nu = nu_grid[g];
    const std::uint64_t s = derive_seed(seed, {0xb7, g});
    const NetworkSample sample = threshold_stack(stack, nu);
    const BinaryNetwork mv = majority_vote(sample);
    auto base = [&](const std::string& method) {
      ResultRow r;
      r.method = method;
      r.nu = nu;
      r.axis = "nu";
      r.value = nu;
      r.seed = seed;
      return r;
    };
    const int k_hat_mv = estimate_k_bethe_hessian(mv);
    const int K = opt.K ? *opt.K : k_hat_mv;
    k_used[g] = K;
    SummaryOptions so;
    so.modularity_k = opt.K ? *opt.K : 0;

    ResultRow mv_row = base("MV"), em_row = base("EM");
    if (mv.edge_count() > 0 && K >= 1 && std::size_t(K) <= stack.n) {
      set_summaries(mv_row, graph_summaries(mv, derive_seed(s, {1}), so));
      EmOptions em = opt.em;
      em.K = K;
      const EmReport rep = em_fit(sample, em, derive_seed(s, {2}));
      if (rep.A_hat.edge_count() > 0) set_summaries(em_row, graph_summaries(rep.A_hat, derive_seed(s, {3}), so));
    }
    slots[g].push_back(mv_row);
    slots[g].push_back(em_row);

    if (opt.subject_summaries) {
      std::vector<GraphSummaries> subj;
      for (std::size_t m = 0; m < sample.observations().size(); ++m)
        subj.push_back(graph_summaries(sample.observations()[m], derive_seed(s, {4, m}), so));
      // min / median / max across subjects, ignoring undefined values
      auto pick = [&](auto field, double q) {
        std::vector<double> v;
        for (const auto& x : subj)
          if (const double f = field(x); !std::isnan(f)) v.push_back(f);
        if (v.empty()) return kNA;
        std::sort(v.begin(), v.end());
        const double pos = q * double(v.size() - 1);
        return 0.5 * (v[std::size_t(std::floor(pos))] + v[std::size_t(std::ceil(pos))]);
      };
      for (auto [name, q] : {std::pair{"subject_min", 0.0}, {"subject_median", 0.5}, {"subject_max", 1.0}}) {
        ResultRow r = base(name);
        r.avg_degree = pick([](const GraphSummaries& x) { return x.avg_degree; }, q);
        r.efficiency = pick([](const GraphSummaries& x) { return x.global_efficiency; }, q);
        r.transitivity = pick([](const GraphSummaries& x) { return x.transitivity; }, q);
        r.modularity = pick([](const GraphSummaries& x) { return x.modularity_defined ? x.modularity : kNA; }, q);
        r.k_hat = pick([](const GraphSummaries& x) { return double(x.k_hat); }, q);
        slots[g].push_back(r);
      }
    }
  });

  BrainResult res;
  for (auto& s : slots)
    for (auto& r : s) res.rows.push_back(std::move(r));
  res.results_csv = results_csv(res.rows);
  res.metadata = {{"seed", seed},
                  {"n", stack.n},
                  {"subjects", stack.subjects.size()},
                  {"nu_grid", nu_grid},
                  {"k_mode", opt.K ? "fixed" : "bethe_hessian_per_nu"},
                  {"k_per_nu", k_used}};
  if (opt.K) res.metadata["K"] = *opt.K;
  return res;
}

}  // namespace netdenoise
