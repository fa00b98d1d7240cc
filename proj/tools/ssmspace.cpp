#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ssms/datagen.hpp"
#include "ssms/io.hpp"
#include "ssms/likelihood.hpp"
#include "ssms/metrics.hpp"
#include "ssms/model.hpp"
#include "ssms/parallel.hpp"
#include "ssms/sampler.hpp"
#include "ssms/spaces.hpp"

namespace {

using namespace ssms;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// 0 = success, 1 = validation error, 2 = degeneracy warning escalated by
// --strict or --check-acceptance. Warnings still write their artifacts.
int g_exit = 0;

constexpr double kBandLo = 0.25;
constexpr double kBandHi = 0.5;

const char* const kSigmaGuidance =
    "--sigma is required (model units). Choose it as the approximation "
    "error you are willing to tolerate: start near that value, run, then "
    "monitor the report's epsilon estimate (mean projection distance of the "
    "retained samples) and the per-chain acceptance rates (aim for the "
    "0.25-0.5 band); tighten sigma until epsilon sits at your tolerance "
    "while acceptance stays in band.";

struct CommonOpts {
  int threads = 0;
  std::string report_path;
  bool timings = false;
};

struct GateOpts {
  bool strict = false;
  bool check_acceptance = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--threads", o.threads,
                  "Worker threads (0: SSM_SPACES_THREADS, then OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--report", o.report_path,
                  "Write the run report JSON to this path instead of stdout");
  sub->add_flag("--timings", o.timings,
                "Record wall-clock seconds in the report (makes otherwise "
                "identical runs differ byte-for-byte)");
}

void add_gate(CLI::App* sub, GateOpts& o) {
  sub->add_flag("--strict", o.strict,
                "Exit 2 when the run raises degeneracy warnings");
  sub->add_flag("--check-acceptance", o.check_acceptance,
                "Exit 2 when any chain's acceptance rate leaves [0.25, 0.5]");
}

void add_chain_opts(CLI::App* sub, ChainConfig& cfg) {
  sub->add_option("--chains", cfg.n_chains, "Number of chains")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--samples", cfg.n_samples, "Steps per chain")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--burn-in", cfg.burn_in, "Discarded steps per chain")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--retain", cfg.thin_to,
                  "Total samples kept after thinning, across all chains")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  sub->add_option("--min-start-separation", cfg.min_start_separation,
                  "Minimum pairwise distance between chain starts")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

struct QOpts {
  int q = 0;
  double fraction = 0.0;
  CLI::Option* q_opt = nullptr;
  CLI::Option* frac_opt = nullptr;

  void add(CLI::App* sub) {
    q_opt = sub->add_option("--q", q, "Retain exactly q components")
                ->check(CLI::PositiveNumber);
    frac_opt = sub->add_option(
                      "--variance-fraction", fraction,
                      "Retain the smallest q reaching this explained-variance "
                      "fraction")
                   ->check(CLI::Range(1e-12, 1.0));
    q_opt->excludes(frac_opt);
    frac_opt->excludes(q_opt);
  }

  QPolicy policy(const QPolicy& fallback) const {
    if (q_opt != nullptr && q_opt->count() > 0) return FixedCount{q};
    if (frac_opt != nullptr && frac_opt->count() > 0)
      return VarianceFraction{fraction};
    return fallback;
  }
};

void apply_threads(const CommonOpts& o) {
  if (o.threads > 0) set_thread_override(o.threads);
}

nlohmann::json chain_json(const ChainConfig& c) {
  return {{"burn_in", c.burn_in},
          {"min_start_separation", c.min_start_separation},
          {"n_chains", c.n_chains},
          {"n_samples", c.n_samples},
          {"seed", c.seed},
          {"thin_to", c.thin_to}};
}

nlohmann::json proposal_json(const ProposalSpec& p) {
  auto arr = nlohmann::json::array();
  for (const auto& c : p.components)
    arr.push_back({{"kind", c.kind == ProposalKind::IsotropicStep
                                ? "isotropic"
                                : "norm"},
                   {"stddev", c.stddev},
                   {"weight", c.weight}});
  return arr;
}

nlohmann::json likelihood_json(const LikelihoodConfig& l) {
  return {{"mode", l.mode == LikelihoodMode::Intersection ? "intersection"
                                                          : "difference"},
          {"sigma", l.sigma}};
}

nlohmann::json policy_json(const QPolicy& p) {
  if (std::holds_alternative<FixedCount>(p))
    return {{"fixed_count", std::get<FixedCount>(p).q}};
  return {{"variance_fraction", std::get<VarianceFraction>(p).fraction}};
}

ChainProgress stderr_progress() {
  return [](int chain, double acceptance) {
    std::fprintf(stderr, "[chain %d] done, acceptance %.3f\n", chain,
                 acceptance);
  };
}

void flag_acceptance(const std::vector<double>& rates, bool degenerate,
                     const GateOpts& gate, RunReport& rep) {
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] >= kBandLo && rates[i] <= kBandHi) continue;
    std::ostringstream os;
    os << "chain " << i << " acceptance " << rates[i] << " outside ["
       << kBandLo << ", " << kBandHi << "]";
    rep.warnings.push_back(os.str());
    if (gate.check_acceptance) g_exit = 2;
  }
  if (degenerate) {
    rep.warnings.push_back(
        "pooled acceptance below 0.01: the sampler is degenerate");
    if (gate.strict) g_exit = 2;
  }
}

void flag_run_quality(bool mean_gap, bool forced_starts, const GateOpts& gate,
                      RunReport& rep) {
  if (mean_gap) {
    rep.warnings.push_back(
        "model means are far apart relative to their leading modes; align "
        "the models first");
    if (gate.strict) g_exit = 2;
  }
  if (forced_starts) {
    rep.warnings.push_back(
        "chain starts could not reach the requested separation; using "
        "closer starts");
    if (gate.strict) g_exit = 2;
  }
}

void finish(RunReport& rep, const CommonOpts& common, Clock::time_point t0,
            bool report_to_stdout = true) {
  if (common.timings)
    rep.wall_clock_seconds =
        std::chrono::duration<double>(Clock::now() - t0).count();
  if (!common.report_path.empty())
    save_report(common.report_path, rep);
  else if (report_to_stdout)
    std::cout << rep.to_json_string() << "\n";
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_number(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw input_error("");
    return v;
  } catch (const std::exception&) {
    throw input_error(std::string(what) + ": cannot parse '" + tok + "'");
  }
}

// Equal-dimension comparison convention: drop trailing components of the
// richer model so both sides present the same k.
double dg_min_k(const ShapeModel& a, const ShapeModel& b) {
  int k = std::min(a.q(), b.q());
  return grassmann_distance(truncate(a, k), truncate(b, k));
}

std::string seed_note(const std::string& command, std::uint64_t seed) {
  return command + " seed " + std::to_string(seed);
}

void save_model_at(const std::string& path, const ShapeModel& m,
                   const std::string& label, const std::string& created) {
  ModelMeta meta;
  meta.label = label;
  meta.created = created;
  save_model(path, m, meta);
}

void setup_star_gen(CLI::App& app) {
  struct Opts {
    StarSpec spec;
    int row = 0;
    std::string sampling = "grid";
    QOpts qopts;
    CommonOpts common;
    std::string out_m1, out_m2, out_inter, out_diff12, out_diff21;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "star-gen",
      "Generate the five-point star family: two overlapping models plus "
      "ground-truth intersection and difference samples");
  auto* row = sub->add_option("--row", o->row, "Preset interval row (1-6)")
                  ->check(CLI::Range(1, 6));
  auto* wa = sub->add_option("--a", o->spec.a,
                             "Shared half-width around the base angle, degrees")
                 ->check(CLI::PositiveNumber);
  auto* wb = sub->add_option("--b", o->spec.b,
                             "Model 1 upper half-width, degrees")
                 ->check(CLI::PositiveNumber);
  auto* wc = sub->add_option("--c", o->spec.c,
                             "Model 2 lower half-width, degrees")
                 ->check(CLI::PositiveNumber);
  row->excludes(wa);
  row->excludes(wb);
  row->excludes(wc);
  sub->add_option("--r", o->spec.r, "Star radius")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--n-train", o->spec.n_train, "Training samples per model")
      ->check(CLI::Range(2, 100000000))
      ->capture_default_str();
  sub->add_option("--sampling", o->sampling, "Training layout")
      ->check(CLI::IsMember({"grid", "random"}))
      ->capture_default_str();
  sub->add_option("--seed", o->spec.seed, "Seed for random sampling")
      ->capture_default_str();
  o->qopts.add(sub);
  sub->add_option("--out-m1", o->out_m1, "Model 1 container path");
  sub->add_option("--out-m2", o->out_m2, "Model 2 container path");
  sub->add_option("--out-intersection", o->out_inter,
                  "Ground-truth intersection container path");
  sub->add_option("--out-diff12", o->out_diff12,
                  "CSV of ground-truth model-1-minus-model-2 samples");
  sub->add_option("--out-diff21", o->out_diff21,
                  "CSV of ground-truth model-2-minus-model-1 samples");
  add_common(sub, o->common);

  sub->callback([o, row, wa, wb, wc] {
    auto t0 = Clock::now();
    apply_threads(o->common);
    if (row->count() > 0) {
      StarSpec preset = star_row_spec(o->row);
      o->spec.a = preset.a;
      o->spec.b = preset.b;
      o->spec.c = preset.c;
    } else if (wa->count() == 0 || wb->count() == 0 || wc->count() == 0) {
      throw config_error("star-gen: give --row or all of --a, --b, --c");
    }
    o->spec.sampling = o->sampling == "random" ? StarSampling::UniformRandom
                                               : StarSampling::UniformGrid;
    o->spec.q_policy = o->qopts.policy(VarianceFraction{1.0});

    StarModels models = generate_star_models(o->spec);
    const std::string note = seed_note("star-gen", o->spec.seed);
    if (!o->out_m1.empty()) save_model_at(o->out_m1, models.m1, "m1", note);
    if (!o->out_m2.empty()) save_model_at(o->out_m2, models.m2, "m2", note);
    if (!o->out_inter.empty())
      save_model_at(o->out_inter, models.gt_intersection, "intersection-gt",
                    note);
    if (!o->out_diff12.empty())
      save_samples_csv(o->out_diff12, models.gt_diff12);
    if (!o->out_diff21.empty())
      save_samples_csv(o->out_diff21, models.gt_diff21);

    RunReport rep;
    rep.command = "star-gen";
    rep.config = {{"a", o->spec.a},
                  {"b", o->spec.b},
                  {"c", o->spec.c},
                  {"base_angles", o->spec.base_angles},
                  {"n_train", o->spec.n_train},
                  {"q_policy", policy_json(o->spec.q_policy)},
                  {"r", o->spec.r},
                  {"sampling", o->sampling},
                  {"seed", o->spec.seed}};
    rep.metrics["q_m1"] = models.m1.q();
    rep.metrics["q_m2"] = models.m2.q();
    rep.metrics["q_intersection"] = models.gt_intersection.q();
    finish(rep, o->common, t0);
  });
}

void setup_split_gen(CLI::App& app) {
  struct Opts {
    SplitSpec spec;
    double eig_scale = 0.0;
    CommonOpts common;
    std::string out_m1, out_m2, out_inter;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "split-gen",
      "Generate two models sharing part of one random orthonormal basis; "
      "the shared part is the known intersection");
  sub->add_option("--ambient", o->spec.ambient_dim,
                  "Ambient dimension d*n (d=3 layout)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--q1", o->spec.q1_unique, "Basis vectors unique to model 1")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--q2", o->spec.q2_unique, "Basis vectors unique to model 2")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--qshared", o->spec.q_shared, "Shared basis vectors")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--seed", o->spec.seed, "Master seed")->capture_default_str();
  sub->add_option("--eigenvalue-scale", o->eig_scale,
                  "0 keeps unit eigenvalues; otherwise assign scale/j over "
                  "the shuffled pool")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--mean-norm", o->spec.mean_norm,
                  "Expected norm of the shared random mean")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--out-m1", o->out_m1, "Model 1 container path");
  sub->add_option("--out-m2", o->out_m2, "Model 2 container path");
  sub->add_option("--out-intersection", o->out_inter,
                  "Ground-truth intersection container path");
  add_common(sub, o->common);

  sub->callback([o] {
    auto t0 = Clock::now();
    apply_threads(o->common);
    int q = o->spec.q1_unique + o->spec.q2_unique + o->spec.q_shared;
    if (o->eig_scale > 0)
      o->spec.eigenvalue_pool = harmonic_eigenvalues(q, o->eig_scale);

    SplitModels models = generate_split_models(o->spec);
    const std::string note = seed_note("split-gen", o->spec.seed);
    if (!o->out_m1.empty()) save_model_at(o->out_m1, models.m1, "m1", note);
    if (!o->out_m2.empty()) save_model_at(o->out_m2, models.m2, "m2", note);
    if (!o->out_inter.empty())
      save_model_at(o->out_inter, models.gt_intersection, "intersection-gt",
                    note);

    RunReport rep;
    rep.command = "split-gen";
    rep.config = {{"ambient", o->spec.ambient_dim},
                  {"eigenvalue_scale", o->eig_scale},
                  {"mean_norm", o->spec.mean_norm},
                  {"q1", o->spec.q1_unique},
                  {"q2", o->spec.q2_unique},
                  {"qshared", o->spec.q_shared},
                  {"seed", o->spec.seed}};
    finish(rep, o->common, t0);
  });
}

void setup_build(CLI::App& app) {
  struct Opts {
    std::string in;
    int d = 2;
    std::string out;
    std::string label = "pca";
    QOpts qopts;
    CommonOpts common;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "build", "Build a PCA model from a CSV sample set");
  sub->add_option("--in", o->in, "Input CSV, one shape per row")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--d", o->d, "Coordinates per vertex (2 or 3)")
      ->required()
      ->check(CLI::Range(2, 3));
  sub->add_option("--out", o->out, "Output container path")->required();
  sub->add_option("--label", o->label, "Model label stored in the container")
      ->capture_default_str();
  o->qopts.add(sub);
  add_common(sub, o->common);

  sub->callback([o] {
    auto t0 = Clock::now();
    apply_threads(o->common);
    std::vector<Shape> samples = load_samples_csv(o->in, o->d);
    QPolicy policy = o->qopts.policy(VarianceFraction{1.0});
    ShapeModel model = build_pca(samples, policy);
    save_model_at(o->out, model, o->label, "build from " + o->in);

    RunReport rep;
    rep.command = "build";
    rep.config = {{"d", o->d},
                  {"in", o->in},
                  {"n_samples", samples.size()},
                  {"out", o->out},
                  {"q_policy", policy_json(policy)}};
    rep.metrics["q"] = model.q();
    finish(rep, o->common, t0);
  });
}

void setup_intersect(CLI::App& app) {
  struct Opts {
    std::string m1, m2;
    double sigma = 0.0;
    ChainConfig chains;
    QOpts qopts;
    CommonOpts common;
    GateOpts gate;
    double warn_gap = std::numeric_limits<double>::quiet_NaN();
    std::string out_model, out_samples;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "intersect",
      "Sample the approximate intersection of two models and build a PCA "
      "model of it");
  sub->add_option("--m1", o->m1, "First model container")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--m2", o->m2, "Second model container")
      ->required()
      ->check(CLI::ExistingFile);
  auto* sig = sub->add_option("--sigma", o->sigma,
                              "Distance likelihood stddev, model units")
                  ->check(CLI::PositiveNumber);
  add_chain_opts(sub, o->chains);
  o->qopts.add(sub);
  sub->add_option("--warn-mean-gap", o->warn_gap,
                  "Mean distance beyond which the models are flagged as "
                  "unaligned (default: sum of leading mode stddevs)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", o->out_model, "Intersection model container path");
  sub->add_option("--out-samples", o->out_samples,
                  "CSV of the retained posterior shapes");
  add_common(sub, o->common);
  add_gate(sub, o->gate);

  sub->callback([o, sig] {
    auto t0 = Clock::now();
    apply_threads(o->common);
    if (sig->count() == 0) throw config_error(kSigmaGuidance);

    LoadedModel a = load_model(o->m1);
    LoadedModel b = load_model(o->m2);
    LikelihoodConfig lik{o->sigma, LikelihoodMode::Intersection};
    QPolicy policy = o->qopts.policy(VarianceFraction{1.0});
    IntersectionResult res =
        compute_intersection(a.model, b.model, lik, o->chains,
                             ProposalSpec::defaults(), policy, o->warn_gap,
                             stderr_progress());

    const std::string note = seed_note("intersect", o->chains.seed);
    if (!o->out_model.empty())
      save_model_at(o->out_model, res.model, "intersection", note);
    if (!o->out_samples.empty()) save_samples_csv(o->out_samples, res.samples);

    RunReport rep;
    rep.command = "intersect";
    rep.config = {{"chains", chain_json(o->chains)},
                  {"likelihood", likelihood_json(lik)},
                  {"m1", o->m1},
                  {"m2", o->m2},
                  {"proposal", proposal_json(ProposalSpec::defaults())},
                  {"q_policy", policy_json(policy)}};
    rep.acceptance_rates = res.acceptance_rates;
    rep.epsilon_estimate = res.epsilon_estimate;
    rep.metrics["q"] = res.model.q();
    flag_acceptance(res.acceptance_rates, res.degenerate, o->gate, rep);
    flag_run_quality(res.mean_gap_warning, res.start_separation_forced,
                     o->gate, rep);
    finish(rep, o->common, t0);
  });
}

void setup_difference(CLI::App& app) {
  struct Opts {
    std::string m1, m2;
    double sigma = 0.0;
    std::string direction = "12";
    ChainConfig chains;
    CommonOpts common;
    GateOpts gate;
    std::string out_samples;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "difference",
      "Sample shapes of one model that the other model cannot represent");
  sub->add_option("--m1", o->m1, "First model container")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--m2", o->m2, "Second model container")
      ->required()
      ->check(CLI::ExistingFile);
  auto* sig = sub->add_option("--sigma", o->sigma,
                              "Distance likelihood stddev, model units")
                  ->check(CLI::PositiveNumber);
  sub->add_option("--direction", o->direction,
                  "12: model 1 minus model 2; 21: the reverse")
      ->check(CLI::IsMember({"12", "21"}))
      ->capture_default_str();
  add_chain_opts(sub, o->chains);
  sub->add_option("--out-samples", o->out_samples,
                  "CSV of the retained difference shapes");
  add_common(sub, o->common);
  add_gate(sub, o->gate);

  sub->callback([o, sig] {
    auto t0 = Clock::now();
    apply_threads(o->common);
    if (sig->count() == 0) throw config_error(kSigmaGuidance);

    LoadedModel a = load_model(o->m1);
    LoadedModel b = load_model(o->m2);
    LikelihoodConfig lik{o->sigma, LikelihoodMode::Difference};
    DiffDirection dir = o->direction == "12" ? DiffDirection::OneMinusTwo
                                             : DiffDirection::TwoMinusOne;
    DifferenceResult res =
        compute_difference(a.model, b.model, lik, o->chains,
                           ProposalSpec::defaults(), dir, stderr_progress());

    if (!o->out_samples.empty()) save_samples_csv(o->out_samples, res.samples);

    RunReport rep;
    rep.command = "difference";
    rep.config = {{"chains", chain_json(o->chains)},
                  {"direction", o->direction},
                  {"likelihood", likelihood_json(lik)},
                  {"m1", o->m1},
                  {"m2", o->m2},
                  {"proposal", proposal_json(ProposalSpec::defaults())}};
    rep.acceptance_rates = res.acceptance_rates;
    rep.epsilon_estimate = res.epsilon_estimate;
    flag_acceptance(res.acceptance_rates, res.degenerate, o->gate, rep);
    flag_run_quality(false, res.start_separation_forced, o->gate, rep);
    finish(rep, o->common, t0);
  });
}

void setup_grassmann(CLI::App& app) {
  struct Opts {
    std::string a, b;
    bool trunc = false;
    CommonOpts common;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "grassmann", "Distance between the affine spans of two models");
  sub->add_option("--a", o->a, "First model container")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--b", o->b, "Second model container")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_flag("--truncate", o->trunc,
                "Truncate the richer model to the smaller dimension instead "
                "of rejecting unequal dimensions");
  add_common(sub, o->common);

  sub->callback([o] {
    auto t0 = Clock::now();
    apply_threads(o->common);
    ShapeModel a = load_model(o->a).model;
    ShapeModel b = load_model(o->b).model;
    double d = o->trunc ? dg_min_k(a, b) : grassmann_distance(a, b);
    std::cout << fmt_double(d) << "\n";

    RunReport rep;
    rep.command = "grassmann";
    rep.config = {{"a", o->a}, {"b", o->b}, {"truncate", o->trunc}};
    rep.metrics["d_g"] = d;
    finish(rep, o->common, t0, false);
  });
}

void setup_recon_error(CLI::App& app) {
  struct Opts {
    std::string samples, model;
    CommonOpts common;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "recon-error",
      "Mean and stddev of the average vertex distance between samples and "
      "their projections onto a model");
  sub->add_option("--samples", o->samples, "Sample CSV")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--model", o->model, "Model container")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(sub, o->common);

  sub->callback([o] {
    auto t0 = Clock::now();
    apply_threads(o->common);
    ShapeModel m = load_model(o->model).model;
    std::vector<Shape> samples = load_samples_csv(o->samples, m.d());
    ReconError err = reconstruction_error(samples, m);
    std::cout << fmt_double(err.mean) << " " << fmt_double(err.stddev) << "\n";

    RunReport rep;
    rep.command = "recon-error";
    rep.config = {{"model", o->model},
                  {"n_samples", samples.size()},
                  {"samples", o->samples}};
    rep.metrics["recon_mean"] = err.mean;
    rep.metrics["recon_stddev"] = err.stddev;
    finish(rep, o->common, t0, false);
  });
}

void setup_union(CLI::App& app) {
  struct Opts {
    std::string m1, m2, out;
    int n_samples = 5000;
    std::uint64_t seed = 0;
    QOpts qopts;
    CommonOpts common;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "union", "Baseline union model: PCA over draws pooled from two models");
  sub->add_option("--m1", o->m1, "First model container")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--m2", o->m2, "Second model container")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--n-samples", o->n_samples, "Total pooled draws")
      ->check(CLI::Range(4, 100000000))
      ->capture_default_str();
  sub->add_option("--seed", o->seed, "Master seed")->capture_default_str();
  o->qopts.add(sub);
  sub->add_option("--out", o->out, "Output container path")->required();
  add_common(sub, o->common);

  sub->callback([o] {
    auto t0 = Clock::now();
    apply_threads(o->common);
    ShapeModel a = load_model(o->m1).model;
    ShapeModel b = load_model(o->m2).model;
    QPolicy policy = o->qopts.policy(VarianceFraction{1.0});
    ShapeModel u = union_model(a, b, o->n_samples, policy, o->seed);
    save_model_at(o->out, u, "union", seed_note("union", o->seed));

    RunReport rep;
    rep.command = "union";
    rep.config = {{"m1", o->m1},
                  {"m2", o->m2},
                  {"n_samples", o->n_samples},
                  {"q_policy", policy_json(policy)},
                  {"seed", o->seed}};
    rep.metrics["q"] = u.q();
    finish(rep, o->common, t0);
  });
}

void setup_export(CLI::App& app) {
  struct Opts {
    std::string model, obj, coeffs;
    std::string samples, svg;
    std::vector<std::string> bounds;
    CommonOpts common;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "export", "Write a mesh (OBJ) from a model or a star plot (SVG) from "
                "a sample CSV");
  auto* model = sub->add_option("--model", o->model, "Model container")
                    ->check(CLI::ExistingFile);
  auto* obj = sub->add_option("--obj", o->obj,
                              "OBJ output path (mean shape, or --coeffs)");
  sub->add_option("--coeffs", o->coeffs,
                  "Comma-separated coefficients to synthesize before export")
      ->needs(obj);
  auto* samples = sub->add_option("--samples", o->samples,
                                  "2D sample CSV for the star plot")
                      ->check(CLI::ExistingFile);
  auto* svg = sub->add_option("--svg", o->svg, "SVG output path");
  sub->add_option("--bound", o->bounds,
                  "Angular bound overlay as point:lo:hi in degrees; "
                  "repeatable");
  obj->needs(model);
  svg->needs(samples);
  add_common(sub, o->common);

  sub->callback([o, obj, svg] {
    auto t0 = Clock::now();
    apply_threads(o->common);
    if (obj->count() == 0 && svg->count() == 0)
      throw config_error("export: nothing to do; give --obj and/or --svg");

    RunReport rep;
    rep.command = "export";
    rep.config = nlohmann::json::object();

    if (obj->count() > 0) {
      LoadedModel lm = load_model(o->model);
      Shape shape = lm.model.mean;
      if (!o->coeffs.empty()) {
        std::vector<std::string> toks = split(o->coeffs, ',');
        Coefficients alpha(toks.size());
        for (std::size_t i = 0; i < toks.size(); ++i)
          alpha[static_cast<Eigen::Index>(i)] =
              parse_number(toks[i], "--coeffs");
        shape = synthesize(lm.model, alpha);
      }
      export_mesh(shape, lm.meta.topology, o->obj);
      rep.config["model"] = o->model;
      rep.config["obj"] = o->obj;
    }

    if (svg->count() > 0) {
      std::vector<Shape> shapes = load_samples_csv(o->samples, 2);
      std::vector<AngularBound> bounds;
      for (const std::string& spec : o->bounds) {
        std::vector<std::string> toks = split(spec, ':');
        if (toks.size() != 3)
          throw input_error("--bound: expected point:lo:hi, got '" + spec +
                            "'");
        AngularBound ab;
        ab.point = static_cast<int>(parse_number(toks[0], "--bound"));
        ab.lo_deg = parse_number(toks[1], "--bound");
        ab.hi_deg = parse_number(toks[2], "--bound");
        bounds.push_back(ab);
      }
      export_star_plot(shapes, bounds, o->svg);
      rep.config["samples"] = o->samples;
      rep.config["svg"] = o->svg;
      rep.config["bounds"] = o->bounds;
    }
    finish(rep, o->common, t0);
  });
}

// Full pipeline over one star row: generate, sample the intersection,
// compare against the known answer, optionally also both differences.
void setup_eval_star(CLI::App& app) {
  struct Opts {
    int row = 1;
    double r = StarSpec{}.r;
    double sigma = 0.003;
    int n_train = 2000;
    std::string sampling = "grid";
    ChainConfig chains;
    bool with_diff = false;
    std::string out_dir;
    CommonOpts common;
    GateOpts gate;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "eval-star",
      "Generate a star row, estimate its intersection, and report distances "
      "against the ground truth");
  sub->add_option("--row", o->row, "Preset interval row (1-6)")
      ->required()
      ->check(CLI::Range(1, 6));
  sub->add_option("--r", o->r, "Star radius")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--sigma", o->sigma, "Distance likelihood stddev")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--n-train", o->n_train, "Training samples per model")
      ->check(CLI::Range(2, 100000000))
      ->capture_default_str();
  sub->add_option("--sampling", o->sampling, "Training layout")
      ->check(CLI::IsMember({"grid", "random"}))
      ->capture_default_str();
  add_chain_opts(sub, o->chains);
  sub->add_flag("--with-differences", o->with_diff,
                "Also sample both set differences and report reconstruction "
                "errors against the ground-truth intersection");
  sub->add_option("--out-dir", o->out_dir,
                  "Directory for model containers, sample CSVs, and the "
                  "posterior star plot");
  add_common(sub, o->common);
  add_gate(sub, o->gate);

  sub->callback([o] {
    auto t0 = Clock::now();
    apply_threads(o->common);

    const std::uint64_t seed = o->chains.seed;
    StarSpec spec = star_row_spec(o->row);
    spec.seed = seed;
    spec.r = o->r;
    spec.n_train = o->n_train;
    spec.sampling = o->sampling == "random" ? StarSampling::UniformRandom
                                            : StarSampling::UniformGrid;
    StarModels gt = generate_star_models(spec);

    const ChainConfig& chains = o->chains;
    LikelihoodConfig lik{o->sigma, LikelihoodMode::Intersection};
    QPolicy policy = FixedCount{gt.gt_intersection.q()};
    IntersectionResult inter =
        compute_intersection(gt.m1, gt.m2, lik, chains,
                             ProposalSpec::defaults(), policy,
                             std::numeric_limits<double>::quiet_NaN(),
                             stderr_progress());

    RunReport rep;
    rep.command = "eval-star";
    rep.config = {{"a", spec.a},
                  {"b", spec.b},
                  {"c", spec.c},
                  {"chains", chain_json(chains)},
                  {"likelihood", likelihood_json(lik)},
                  {"n_train", spec.n_train},
                  {"proposal", proposal_json(ProposalSpec::defaults())},
                  {"q_policy", policy_json(policy)},
                  {"r", spec.r},
                  {"row", o->row},
                  {"sampling", o->sampling},
                  {"with_differences", o->with_diff}};
    rep.acceptance_rates = inter.acceptance_rates;
    rep.epsilon_estimate = inter.epsilon_estimate;
    rep.metrics["dg_ihat_i"] = dg_min_k(inter.model, gt.gt_intersection);
    rep.metrics["dg_q1_q2"] = dg_min_k(gt.m1, gt.m2);
    rep.metrics["dg_q1_i"] = dg_min_k(gt.m1, gt.gt_intersection);
    rep.metrics["dg_q2_i"] = dg_min_k(gt.m2, gt.gt_intersection);

    DifferenceResult d12, d21;
    if (o->with_diff) {
      LikelihoodConfig dlik{o->sigma, LikelihoodMode::Difference};
      ChainConfig c12 = chains;
      c12.seed = derive_seed(seed, "diff12");
      d12 = compute_difference(gt.m1, gt.m2, dlik, c12,
                               ProposalSpec::defaults(),
                               DiffDirection::OneMinusTwo, stderr_progress());
      ChainConfig c21 = chains;
      c21.seed = derive_seed(seed, "diff21");
      d21 = compute_difference(gt.m1, gt.m2, dlik, c21,
                               ProposalSpec::defaults(),
                               DiffDirection::TwoMinusOne, stderr_progress());
      rep.metrics["dr_est_diff12"] =
          reconstruction_error(d12.samples, gt.gt_intersection).mean;
      rep.metrics["dr_est_diff21"] =
          reconstruction_error(d21.samples, gt.gt_intersection).mean;
      rep.metrics["dr_gt_diff12"] =
          reconstruction_error(gt.gt_diff12, gt.gt_intersection).mean;
      rep.metrics["dr_gt_diff21"] =
          reconstruction_error(gt.gt_diff21, gt.gt_intersection).mean;
      rep.metrics["dr_intersection"] =
          reconstruction_error(inter.samples, gt.gt_intersection).mean;
      rep.config["diff12_acceptance"] = d12.acceptance_rates;
      rep.config["diff21_acceptance"] = d21.acceptance_rates;
    }

    if (!o->out_dir.empty()) {
      fs::create_directories(o->out_dir);
      fs::path dir(o->out_dir);
      const std::string note = seed_note("eval-star", seed);
      save_model_at((dir / "m1.ssm1").string(), gt.m1, "m1", note);
      save_model_at((dir / "m2.ssm1").string(), gt.m2, "m2", note);
      save_model_at((dir / "intersection_gt.ssm1").string(),
                    gt.gt_intersection, "intersection-gt", note);
      save_model_at((dir / "intersection_est.ssm1").string(), inter.model,
                    "intersection-est", note);
      save_samples_csv((dir / "intersection_samples.csv").string(),
                       inter.samples);
      double base0 = spec.base_angles[0];
      export_star_plot(
          inter.samples,
          {AngularBound{0, base0 - spec.a, base0 + spec.a}},
          (dir / "posterior.svg").string());
      if (o->with_diff) {
        save_samples_csv((dir / "diff12_est.csv").string(), d12.samples);
        save_samples_csv((dir / "diff21_est.csv").string(), d21.samples);
        save_samples_csv((dir / "diff12_gt.csv").string(), gt.gt_diff12);
        save_samples_csv((dir / "diff21_gt.csv").string(), gt.gt_diff21);
      }
    }

    flag_acceptance(inter.acceptance_rates, inter.degenerate, o->gate, rep);
    flag_run_quality(inter.mean_gap_warning, inter.start_separation_forced,
                     o->gate, rep);
    finish(rep, o->common, t0);
  });
}

void setup_eval_split(CLI::App& app) {
  struct Opts {
    std::string dims = "3,3,1";
    SplitSpec spec;
    double sigma = 0.3;
    double eig_scale = 4e4;
    ChainConfig chains;
    std::string out_dir;
    CommonOpts common;
    GateOpts gate;
  };
  auto o = std::make_shared<Opts>();
  o->chains.n_chains = 25;
  o->chains.n_samples = 5000;
  o->chains.burn_in = 2000;
  o->chains.thin_to = 5000;
  auto* sub = app.add_subcommand(
      "eval-split",
      "Generate split-basis models, estimate their intersection, and report "
      "the distance to the known shared subspace");
  sub->add_option("--dims", o->dims,
                  "Unique/unique/shared basis counts as q1,q2,qI")
      ->capture_default_str();
  sub->add_option("--ambient", o->spec.ambient_dim, "Ambient dimension d*n")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--sigma", o->sigma, "Distance likelihood stddev")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--eigenvalue-scale", o->eig_scale,
                  "0 keeps unit eigenvalues; otherwise assign scale/j over "
                  "the shuffled pool")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--mean-norm", o->spec.mean_norm,
                  "Expected norm of the shared random mean")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_chain_opts(sub, o->chains);
  sub->add_option("--out-dir", o->out_dir,
                  "Directory for the generated and estimated containers");
  add_common(sub, o->common);
  add_gate(sub, o->gate);

  sub->callback([o] {
    auto t0 = Clock::now();
    apply_threads(o->common);

    std::vector<std::string> toks = split(o->dims, ',');
    if (toks.size() != 3)
      throw config_error("eval-split: --dims must be q1,q2,qI");
    o->spec.q1_unique = static_cast<int>(parse_number(toks[0], "--dims"));
    o->spec.q2_unique = static_cast<int>(parse_number(toks[1], "--dims"));
    o->spec.q_shared = static_cast<int>(parse_number(toks[2], "--dims"));
    require(o->spec.q_shared >= 1,
            "eval-split: qI must be >= 1, there is nothing to recover "
            "otherwise");
    int q = o->spec.q1_unique + o->spec.q2_unique + o->spec.q_shared;
    if (o->eig_scale > 0)
      o->spec.eigenvalue_pool = harmonic_eigenvalues(q, o->eig_scale);

    o->spec.seed = o->chains.seed;
    SplitModels gt = generate_split_models(o->spec);
    const ChainConfig& chains = o->chains;
    LikelihoodConfig lik{o->sigma, LikelihoodMode::Intersection};
    QPolicy policy = FixedCount{gt.gt_intersection.q()};
    IntersectionResult inter =
        compute_intersection(gt.m1, gt.m2, lik, chains,
                             ProposalSpec::defaults(), policy,
                             std::numeric_limits<double>::quiet_NaN(),
                             stderr_progress());

    RunReport rep;
    rep.command = "eval-split";
    rep.config = {{"ambient", o->spec.ambient_dim},
                  {"chains", chain_json(chains)},
                  {"eigenvalue_scale", o->eig_scale},
                  {"likelihood", likelihood_json(lik)},
                  {"mean_norm", o->spec.mean_norm},
                  {"proposal", proposal_json(ProposalSpec::defaults())},
                  {"q1", o->spec.q1_unique},
                  {"q2", o->spec.q2_unique},
                  {"q_policy", policy_json(policy)},
                  {"qshared", o->spec.q_shared},
                  {"seed", o->spec.seed}};
    rep.acceptance_rates = inter.acceptance_rates;
    rep.epsilon_estimate = inter.epsilon_estimate;
    rep.metrics["dg_ihat_i"] = dg_min_k(inter.model, gt.gt_intersection);

    if (!o->out_dir.empty()) {
      fs::create_directories(o->out_dir);
      fs::path dir(o->out_dir);
      const std::string note = seed_note("eval-split", o->spec.seed);
      save_model_at((dir / "m1.ssm1").string(), gt.m1, "m1", note);
      save_model_at((dir / "m2.ssm1").string(), gt.m2, "m2", note);
      save_model_at((dir / "intersection_gt.ssm1").string(),
                    gt.gt_intersection, "intersection-gt", note);
      save_model_at((dir / "intersection_est.ssm1").string(), inter.model,
                    "intersection-est", note);
    }

    flag_acceptance(inter.acceptance_rates, inter.degenerate, o->gate, rep);
    flag_run_quality(inter.mean_gap_warning, inter.start_separation_forced,
                     o->gate, rep);
    finish(rep, o->common, t0);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Approximate intersections and differences between linear shape "
      "models via ensemble MCMC"};
  app.require_subcommand(1);
  setup_star_gen(app);
  setup_split_gen(app);
  setup_build(app);
  setup_intersect(app);
  setup_difference(app);
  setup_grassmann(app);
  setup_recon_error(app);
  setup_union(app);
  setup_export(app);
  setup_eval_star(app);
  setup_eval_split(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return g_exit;
}
