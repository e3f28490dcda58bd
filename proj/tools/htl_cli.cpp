// Command-line front end: fit / bounds / audit / loo / negative-transfer.
//
// Exit codes: 0 ok, 2 I/O, 3 parse or config, 4 convergence,
// 5 invariant violation.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <thread>

#include "htl/audit.hpp"
#include "htl/bounds.hpp"
#include "htl/datagen.hpp"
#include "htl/dataset.hpp"
#include "htl/errors.hpp"
#include "htl/experiment.hpp"
#include "htl/rerm.hpp"
#include "htl/risk.hpp"

namespace {

using htl::config_error;
using htl::io_error;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitConfig = 3;
constexpr int kExitConvergence = 4;
constexpr int kExitInvariant = 5;

struct cli_options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  bool trace = false;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
}

htl::solver_config solver_from_config(const json& cfg, bool trace) {
  htl::solver_config solver;
  if (cfg.contains("solver")) {
    const json& s = cfg.at("solver");
    solver.max_iters = s.value("max_iters", solver.max_iters);
    solver.grad_tol = s.value("grad_tol", solver.grad_tol);
    solver.ls_shrink = s.value("ls_shrink", solver.ls_shrink);
    solver.ls_sufficient_decrease =
        s.value("ls_sufficient_decrease", solver.ls_sufficient_decrease);
  }
  if (trace) {
    solver.on_iteration = [](int iter, double obj, double resid) {
      std::fprintf(stderr, "iter=%d objective=%.9g residual=%.3g\n", iter, obj,
                   resid);
    };
  }
  return solver;
}

struct fit_inputs {
  htl::dataset train;
  std::optional<htl::dataset> test;
  htl::loss_spec loss;
  htl::kernel_spec kernel;
  double lambda = 1.0;
  htl::source_hypothesis source;
  htl::solver_config solver;
};

fit_inputs load_fit_inputs(const json& cfg, bool trace) {
  fit_inputs in;
  if (!cfg.contains("train"))
    throw config_error("config: missing \"train\" dataset path");
  in.train = htl::read_dataset_csv(cfg.at("train").get<std::string>());
  if (cfg.contains("test"))
    in.test = htl::read_dataset_csv(cfg.at("test").get<std::string>());
  in.loss = cfg.contains("loss") ? htl::loss_from_json(cfg.at("loss"))
                                 : htl::loss_spec::logistic();
  in.kernel = cfg.contains("kernel") ? htl::kernel_from_json(cfg.at("kernel"))
                                     : htl::kernel_spec::gaussian(1.0);
  in.lambda = cfg.value("lambda", 1.0);
  if (!cfg.contains("source"))
    throw config_error("config: missing \"source\"");
  in.source = htl::source_from_json(cfg.at("source"));
  if (cfg.contains("source_scale_to")) {
    const Eigen::MatrixXd sample = in.train.features;
    in.source = htl::scale_score(
        in.source, cfg.at("source_scale_to").get<double>(), &sample);
  }
  in.solver = solver_from_config(cfg, trace);
  return in;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write output file: " + path);
  out << body;
  if (!out) throw io_error("write failed: " + path);
}

json model_to_json(const htl::fitted_model& model) {
  json j;
  j["coeffs"] = std::vector<double>(
      model.coeffs.data(), model.coeffs.data() + model.coeffs.size());
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < model.train_features.rows(); ++i)
    rows.emplace_back(model.train_features.row(i).begin(),
                      model.train_features.row(i).end());
  j["train_features"] = rows;
  j["kernel"] = htl::kernel_to_json(model.kernel);
  j["lambda"] = model.lambda;
  j["loss"] = htl::loss_to_json(model.loss);
  j["source"] = htl::source_to_json(model.source);
  j["solver_stats"] = {{"iterations", model.stats.iterations},
                       {"residual_norm", model.stats.residual_norm},
                       {"objective", model.stats.objective}};
  return j;
}

int cmd_fit(const cli_options& opt, const json& cfg) {
  fit_inputs in = load_fit_inputs(cfg, opt.trace);
  const htl::fitted_model model =
      htl::fit(in.train, in.loss, in.kernel, in.lambda, in.source, in.solver);

  std::printf("objective %.10g\n", model.stats.objective);
  std::printf("iterations %d\n", model.stats.iterations);
  std::printf("residual %.3g\n", model.stats.residual_norm);
  std::printf("train_risk %.10g\n",
              htl::empirical_risk(model, in.train, in.loss));
  if (in.test)
    std::printf("test_risk %.10g\n",
                htl::empirical_risk(model, *in.test, in.loss));

  if (!opt.out_path.empty())
    write_text(opt.out_path, model_to_json(model).dump(2) + "\n");
  return kExitOk;
}

int cmd_bounds(const cli_options& opt, const json& cfg) {
  fit_inputs in = load_fit_inputs(cfg, opt.trace);
  if (!in.test)
    throw config_error("bounds: needs a \"test\" split to estimate the "
                       "source risk");

  const htl::bound_context ctx = htl::make_bound_context(
      in.loss, in.kernel, in.lambda, in.train, *in.test, in.source);
  const Eigen::VectorXd scores = in.source.scores(in.train.features);
  const Eigen::VectorXd losses =
      htl::per_sample_losses(scores, in.train.labels, in.loss);
  const htl::stability_bound_report report = htl::build_report(
      in.loss, ctx, std::vector<double>(losses.data(),
                                        losses.data() + losses.size()));

  json j;
  j["beta"] = report.beta;
  j["gamma"] = report.gamma;
  j["gen_gap"] = report.gen_gap;
  j["c_s"] = report.c_s;
  j["radius"] = report.radius;
  j["radius_loo"] = report.radius_loo.r;
  j["rho_loo"] = report.radius_loo.rho;
  j["tau_loo"] = report.radius_loo.tau;
  j["excess_lambda"] = report.excess_schedule.lambda;
  j["excess_rate_label"] = report.excess_schedule.rate_label;
  j["context"] = {{"kappa", ctx.kappa},
                  {"lambda", ctx.lambda},
                  {"alpha", ctx.alpha()},
                  {"n", ctx.n},
                  {"source_risk", ctx.source_risk},
                  {"source_risk_train", ctx.source_risk_train},
                  {"m_s", ctx.m_s}};

  const std::string body = j.dump(2) + "\n";
  if (!opt.out_path.empty())
    write_text(opt.out_path, body);
  else
    std::fputs(body.c_str(), stdout);
  return kExitOk;
}

json audit_to_json(const htl::audit_report& report) {
  json j;
  j["emp_hypothesis_stability"] = report.emp_hypothesis_stability;
  j["emp_pointwise_stability"] = report.emp_pointwise_stability;
  j["witnessed_max_delta"] = report.witnessed_max_delta;
  j["deviation_bound_violations"] = report.deviation_bound_violations;
  return j;
}

int cmd_audit(const cli_options& opt, const json& cfg) {
  fit_inputs in = load_fit_inputs(cfg, opt.trace);
  if (!in.test)
    throw config_error("audit: needs a \"test\" split as the fresh sample");

  const htl::audit_report report =
      htl::audit_stability(in.train, *in.test, in.loss, in.kernel, in.lambda,
                           in.source, in.solver, opt.threads);
  const htl::loo_audit loo =
      htl::audit_loo(in.train, *in.test, in.loss, in.kernel, in.lambda,
                     in.source, in.solver, opt.threads);

  json j = audit_to_json(report);
  j["loo_risk"] = loo.loo_risk;
  j["test_risk"] = loo.test_risk;
  j["loo_gap"] = loo.abs_gap;

  // theoretical certificates for the same inputs, next to the measurements
  {
    const htl::bound_context ctx = htl::make_bound_context(
        in.loss, in.kernel, in.lambda, in.train, *in.test, in.source);
    j["certificates"] = {
        {"beta", htl::beta_bound(in.loss, ctx)},
        {"gamma", htl::gamma_bound(in.loss, ctx)},
        {"gen_gap", htl::gen_gap_bound(in.loss, ctx)},
    };
  }

  // optional Monte Carlo generalization gap over fresh scenario draws
  if (cfg.contains("scenario")) {
    htl::scenario_config scenario =
        htl::scenario_from_json(cfg.at("scenario"));
    const int replicas = cfg.value("gen_gap_replicas", 20);
    const std::uint64_t seed = opt.seed.value_or(scenario.seed);
    const htl::gen_gap_estimate est = htl::audit_gen_gap(
        scenario, in.loss, in.kernel, in.lambda, in.source, replicas,
        scenario.n_test, seed, in.solver, opt.threads);
    j["emp_gen_gap"] = est.mean;
    j["emp_gen_gap_stderr"] = est.std_error;
    j["emp_gen_gap_replicas"] = est.replicas;
  }

  const std::string body = j.dump(2) + "\n";
  if (!opt.out_path.empty())
    write_text(opt.out_path, body);
  else
    std::fputs(body.c_str(), stdout);

  if (cfg.contains("per_index_csv")) {
    std::ofstream csv(cfg.at("per_index_csv").get<std::string>());
    if (!csv) throw io_error("cannot write per-index csv");
    csv << "i,delta_ell_mean,rkhs_dev,deviation_bound_rhs,violated\n";
    char buf[160];
    for (const auto& row : report.per_index) {
      std::snprintf(buf, sizeof(buf), "%ld,%.10g,%.10g,%.10g,%d",
                    static_cast<long>(row.index), row.delta_ell_mean,
                    row.rkhs_dev, row.deviation_bound_rhs,
                    row.violated ? 1 : 0);
      csv << buf << "\n";
    }
  }

  return report.deviation_bound_violations > 0 ? kExitInvariant : kExitOk;
}

int cmd_loo(const cli_options& opt, const json& cfg) {
  fit_inputs in = load_fit_inputs(cfg, opt.trace);
  const double loo = htl::loo_risk(in.train, in.loss, in.kernel, in.lambda,
                                   in.source, in.solver, opt.threads);
  std::printf("loo_risk %.10g\n", loo);
  if (in.test) {
    const htl::fitted_model model =
        htl::fit(in.train, in.loss, in.kernel, in.lambda, in.source, in.solver);
    const double test_risk = htl::empirical_risk(model, *in.test, in.loss);
    std::printf("test_risk %.10g\n", test_risk);
    std::printf("abs_gap %.10g\n", std::abs(loo - test_risk));
  }
  return kExitOk;
}

int cmd_generate(const cli_options& opt, const json& cfg) {
  if (!cfg.contains("scenario"))
    throw config_error("config: missing \"scenario\" section");
  htl::scenario_config scenario =
      htl::scenario_from_json(cfg.at("scenario"));
  if (opt.seed) scenario.seed = *opt.seed;

  const std::string prefix = opt.out_path.empty() ? "scenario" : opt.out_path;
  const std::string source_path = prefix + "_source.csv";
  const std::string train_path = prefix + "_train.csv";
  const std::string test_path = prefix + "_test.csv";
  htl::write_dataset_csv(htl::make_source(scenario), source_path);
  htl::write_dataset_csv(htl::make_target(scenario, htl::target_split::train),
                         train_path);
  htl::write_dataset_csv(htl::make_target(scenario, htl::target_split::test),
                         test_path);
  std::printf("wrote %s %s %s\n", source_path.c_str(), train_path.c_str(),
              test_path.c_str());
  return kExitOk;
}

int cmd_negative_transfer(const cli_options& opt, const json& cfg) {
  if (!cfg.contains("experiment"))
    throw config_error("config: missing \"experiment\" section");
  htl::experiment_config exp = htl::experiment_from_json(cfg.at("experiment"));

  const std::uint64_t seed = opt.seed.value_or(exp.scenario.seed);
  const htl::solver_config solver = solver_from_config(cfg, opt.trace);
  const std::vector<htl::curve_row> rows =
      htl::run_negative_transfer(exp, seed, opt.threads, solver);

  const std::string out =
      opt.out_path.empty() ? exp.output_path : opt.out_path;
  htl::write_curve_csv(rows, out);
  std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel transfer fits with stability certificates"};
  app.require_subcommand(1);

  cli_options opt;
  app.add_option("--config", opt.config_path, "JSON config file")
      ->required();
  app.add_option("--seed", opt.seed, "override the config seed");
  app.add_option("--out", opt.out_path, "primary output path");
  app.add_option("--threads", opt.threads, "worker threads");
  app.add_flag("--trace", opt.trace, "log solver iterations to stderr");

  auto* fit = app.add_subcommand("fit", "fit the transfer model");
  auto* bounds = app.add_subcommand("bounds", "emit stability certificates");
  auto* audit = app.add_subcommand("audit", "measure empirical stability");
  auto* loo = app.add_subcommand("loo", "leave-one-out risk estimate");
  auto* negative =
      app.add_subcommand("negative-transfer", "run the shift sweep");
  auto* generate =
      app.add_subcommand("generate", "write scenario datasets to csv");

  CLI11_PARSE(app, argc, argv);

  try {
    const json cfg = load_config(opt.config_path);
    if (opt.threads < 1) opt.threads = 1;
    if (fit->parsed()) return cmd_fit(opt, cfg);
    if (bounds->parsed()) return cmd_bounds(opt, cfg);
    if (audit->parsed()) return cmd_audit(opt, cfg);
    if (loo->parsed()) return cmd_loo(opt, cfg);
    if (negative->parsed()) return cmd_negative_transfer(opt, cfg);
    if (generate->parsed()) return cmd_generate(opt, cfg);
    std::fprintf(stderr, "no subcommand\n");
    return kExitConfig;
  } catch (const io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const htl::convergence_error& e) {
    std::fprintf(stderr, "convergence error: %s (residual %.3g)\n", e.what(),
                 e.residual());
    return kExitConvergence;
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvariant;
  }
}
