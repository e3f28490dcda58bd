#include "htl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "htl/errors.hpp"
#include "htl/parallel.hpp"
#include "htl/risk.hpp"

namespace htl {

namespace {

using nlohmann::json;

double quantile(std::vector<double> sorted, double p) {
  const std::size_t m = sorted.size();
  const double pos = p * static_cast<double>(m - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, m - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

void experiment_config::validate() const {
  scenario.validate();
  if (losses.empty()) throw config_error("experiment: needs at least one loss");
  if (theta_grid.empty()) throw config_error("experiment: empty theta grid");
  for (double t : theta_grid)
    if (!(t >= 0.0 && t <= 3.14159265358979323846 + 1e-12))
      throw config_error("experiment: theta outside [0, pi]");
  if (n_sims < 1) throw config_error("experiment: n_sims must be >= 1");
  if (!(lambda > 0.0)) throw config_error("experiment: lambda must be > 0");
}

std::vector<double> experiment_config::default_theta_grid() {
  std::vector<double> grid;
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < 17; ++i) grid.push_back(pi * i / 16.0);
  return grid;
}

Eigen::VectorXd train_linear_source(const dataset& data, const loss_spec& loss,
                                    double lambda, const solver_config& cfg) {
  data.validate();
  if (!(lambda > 0.0))
    throw config_error("train_linear_source: lambda must be positive");

  const Eigen::MatrixXd& x = data.features;
  const Eigen::VectorXd& y = data.labels;
  const double inv_n = 1.0 / static_cast<double>(data.n());

  Eigen::VectorXd w = Eigen::VectorXd::Zero(data.d());
  const auto obj = [&](const Eigen::VectorXd& u) {
    double acc = 0.0;
    const Eigen::VectorXd m = (x * u).cwiseProduct(y);
    for (Eigen::Index i = 0; i < m.size(); ++i)
      acc += loss_value(loss, m[i]);
    return acc * inv_n + lambda * u.squaredNorm();
  };

  const auto grad_at = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd m = (x * u).cwiseProduct(y);
    Eigen::VectorXd slopes(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i)
      slopes[i] = loss_derivative(loss, m[i]);
    return Eigen::VectorXd(inv_n * (x.transpose() * slopes.cwiseProduct(y)) +
                           2.0 * lambda * u);
  };

  double f = obj(w);
  double step = 0.5 / lambda;
  const double cap = step;
  for (int iter = 0; iter <= cfg.max_iters; ++iter) {
    const Eigen::VectorXd grad = grad_at(w);
    const double gn = grad.norm();
    if (gn <= cfg.grad_tol) return w;
    if (iter == cfg.max_iters)
      throw convergence_error("train_linear_source: budget exhausted", gn);

    const double f_noise = 1e-12 * (1.0 + std::abs(f));
    double eta = std::min(2.0 * step, cap);
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      const Eigen::VectorXd w_t = w - eta * grad;
      const double f_t = obj(w_t);
      const bool ok =
          eta * gn * gn > f_noise
              ? f_t <= f - cfg.ls_sufficient_decrease * eta * gn * gn
              : grad_at(w_t).norm() <= gn;  // objective differences are noise
      if (ok) {
        w = w_t;
        f = f_t;
        step = eta;
        accepted = true;
        break;
      }
      eta *= cfg.ls_shrink;
    }
    if (!accepted)
      throw convergence_error("train_linear_source: line search stalled", gn);
  }
  return w;
}

std::vector<curve_row> run_negative_transfer(const experiment_config& cfg,
                                             std::uint64_t base_seed,
                                             int threads,
                                             const solver_config& solver) {
  cfg.validate();
  const std::size_t n_theta = cfg.theta_grid.size();
  const std::size_t n_loss = cfg.losses.size();
  const std::size_t cells = n_theta * n_loss;

  // risks[replica][theta * n_loss + loss]; NaN marks a failed fit.
  std::vector<std::vector<double>> risks(
      static_cast<std::size_t>(cfg.n_sims),
      std::vector<double>(cells, std::numeric_limits<double>::quiet_NaN()));

  // The source problem is low-dimensional but stiff under its tiny lambda;
  // it gets its own iteration budget and tolerance.
  solver_config source_solver = solver;
  source_solver.grad_tol = std::max(solver.grad_tol, 1e-6);
  source_solver.max_iters = std::max(solver.max_iters, 200000);

  parallel_for(cfg.n_sims, threads, [&](int rep) {
    const std::uint64_t rep_seed = base_seed + static_cast<std::uint64_t>(rep);

    scenario_config src_cfg = cfg.scenario;
    src_cfg.seed = derive_seed(rep_seed, 0);
    const dataset source_data = make_source(src_cfg);
    source_hypothesis h_s;
    try {
      h_s = source_hypothesis::linear(train_linear_source(
          source_data, cfg.source_trainer.loss, cfg.source_trainer.lambda,
          source_solver));
    } catch (const convergence_error&) {
      return;  // whole replica marked failed
    }

    for (std::size_t t = 0; t < n_theta; ++t) {
      scenario_config tgt_cfg = cfg.scenario;
      tgt_cfg.theta = cfg.theta_grid[t];
      tgt_cfg.seed = derive_seed(rep_seed, 1 + static_cast<std::uint64_t>(t));
      const dataset train = make_target(tgt_cfg, target_split::train);
      const dataset test = make_target(tgt_cfg, target_split::test);

      // Kernel blocks shared by every loss at this theta.
      const Eigen::MatrixXd k_test =
          cross_gram(cfg.kernel, test.features, train.features);
      const Eigen::VectorXd s_test = h_s.scores(test.features);

      for (std::size_t l = 0; l < n_loss; ++l) {
        try {
          const fitted_model model =
              fit(train, cfg.losses[l], cfg.kernel, cfg.lambda, h_s, solver);
          const Eigen::VectorXd scores = k_test * model.coeffs + s_test;
          risks[static_cast<std::size_t>(rep)][t * n_loss + l] =
              empirical_risk(scores, test.labels, cfg.losses[l]);
        } catch (const convergence_error&) {
          // left as NaN; the row-level quorum decides
        }
      }
    }
  });

  std::vector<curve_row> rows;
  rows.reserve(cells);
  for (std::size_t t = 0; t < n_theta; ++t) {
    for (std::size_t l = 0; l < n_loss; ++l) {
      std::vector<double> vals;
      vals.reserve(static_cast<std::size_t>(cfg.n_sims));
      for (int rep = 0; rep < cfg.n_sims; ++rep) {
        const double v = risks[static_cast<std::size_t>(rep)][t * n_loss + l];
        if (!std::isnan(v)) vals.push_back(v);
      }
      if (vals.size() * 10 < static_cast<std::size_t>(cfg.n_sims) * 9)
        throw convergence_error(
            "negative-transfer: more than 10% of replicas failed for theta=" +
                std::to_string(cfg.theta_grid[t]) + " loss=" +
                loss_name(cfg.losses[l].kind),
            0.0);
      std::sort(vals.begin(), vals.end());
      curve_row row;
      row.theta = cfg.theta_grid[t];
      row.loss = loss_name(cfg.losses[l].kind);
      row.median_risk = quantile(vals, 0.5);
      row.q25 = quantile(vals, 0.25);
      row.q75 = quantile(vals, 0.75);
      row.n_sims = static_cast<int>(vals.size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_curve_csv(const std::vector<curve_row>& rows,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write curve file: " + path);
  out << "theta,loss,median_risk,q25,q75,n_sims\n";
  char buf[160];
  for (const curve_row& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.10g,%s,%.10g,%.10g,%.10g,%d", r.theta,
                  r.loss.c_str(), r.median_risk, r.q25, r.q75, r.n_sims);
    out << buf << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

json loss_to_json(const loss_spec& loss) {
  json j;
  j["kind"] = loss_name(loss.kind);
  if (loss.kind == loss_kind::softplus) j["s"] = loss.s;
  return j;
}

loss_spec loss_from_json(const json& j) {
  if (j.is_string()) {
    const loss_kind kind = loss_kind_from_name(j.get<std::string>());
    return kind == loss_kind::softplus ? loss_spec::softplus()
                                       : loss_spec{kind, 0.0};
  }
  const loss_kind kind = loss_kind_from_name(j.at("kind").get<std::string>());
  if (kind == loss_kind::softplus)
    return loss_spec::softplus(j.value("s", 0.1));
  return {kind, 0.0};
}

json kernel_to_json(const kernel_spec& kernel) {
  json j;
  j["kind"] = kernel_name(kernel.kind);
  switch (kernel.kind) {
    case kernel_kind::gaussian:
      j["gamma"] = kernel.gamma;
      break;
    case kernel_kind::polynomial:
      j["degree"] = kernel.degree;
      j["offset"] = kernel.offset;
      break;
    case kernel_kind::sigmoid:
      j["scale"] = kernel.scale;
      j["offset"] = kernel.offset;
      break;
    case kernel_kind::linear:
      break;
  }
  if (kernel.kappa) j["kappa"] = *kernel.kappa;
  return j;
}

kernel_spec kernel_from_json(const json& j) {
  kernel_spec k;
  k.kind = kernel_kind_from_name(j.at("kind").get<std::string>());
  switch (k.kind) {
    case kernel_kind::gaussian:
      k.gamma = j.value("gamma", 1.0);
      if (!(k.gamma > 0.0)) throw config_error("kernel: gamma must be > 0");
      break;
    case kernel_kind::polynomial:
      k.degree = j.value("degree", 2);
      k.offset = j.value("offset", 0.0);
      if (k.degree < 1) throw config_error("kernel: degree must be >= 1");
      break;
    case kernel_kind::sigmoid:
      k.scale = j.value("scale", 1.0);
      k.offset = j.value("offset", 0.0);
      break;
    case kernel_kind::linear:
      break;
  }
  if (j.contains("kappa")) k.kappa = j.at("kappa").get<double>();
  return k;
}

json source_to_json(const source_hypothesis& source) {
  json j;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, source_hypothesis::linear_form>) {
          j["form"] = "linear";
          j["weights"] = std::vector<double>(
              f.weights.data(), f.weights.data() + f.weights.size());
        } else if constexpr (std::is_same_v<T,
                                            source_hypothesis::kernel_form>) {
          j["form"] = "kernel_expansion";
          std::vector<std::vector<double>> support;
          for (Eigen::Index i = 0; i < f.support.rows(); ++i)
            support.emplace_back(f.support.row(i).begin(),
                                 f.support.row(i).end());
          j["support"] = support;
          j["coeffs"] = std::vector<double>(
              f.coeffs.data(), f.coeffs.data() + f.coeffs.size());
          j["kernel"] = kernel_to_json(f.kernel);
        } else {
          j["form"] = "constant";
          j["value"] = f.value;
        }
      },
      source.form());
  if (source.sup_norm_hint()) j["sup_norm_hint"] = *source.sup_norm_hint();
  if (!source.squashes().empty()) {
    json sq = json::array();
    for (const auto& s : source.squashes())
      sq.push_back({{"inner", s.inner}, {"bound", s.bound}});
    j["squashes"] = sq;
  }
  return j;
}

source_hypothesis source_from_json(const json& j) {
  const std::string form = j.at("form").get<std::string>();
  std::optional<double> hint;
  if (j.contains("sup_norm_hint")) hint = j.at("sup_norm_hint").get<double>();

  source_hypothesis out;
  if (form == "linear") {
    const auto w = j.at("weights").get<std::vector<double>>();
    out = source_hypothesis::linear(
        Eigen::Map<const Eigen::VectorXd>(w.data(),
                                          static_cast<Eigen::Index>(w.size())),
        hint);
  } else if (form == "kernel_expansion") {
    const auto rows = j.at("support").get<std::vector<std::vector<double>>>();
    const auto coeffs = j.at("coeffs").get<std::vector<double>>();
    if (rows.empty() || rows.size() != coeffs.size())
      throw config_error("source: support/coeffs size mismatch");
    Eigen::MatrixXd support(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows[0].size())
        throw config_error("source: ragged support matrix");
      for (std::size_t c = 0; c < rows[i].size(); ++c)
        support(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            rows[i][c];
    }
    out = source_hypothesis::expansion(
        std::move(support),
        Eigen::Map<const Eigen::VectorXd>(
            coeffs.data(), static_cast<Eigen::Index>(coeffs.size())),
        kernel_from_json(j.at("kernel")), hint);
  } else if (form == "constant") {
    out = source_hypothesis::constant(j.at("value").get<double>());
    if (hint) out.set_sup_norm_hint(*hint);
  } else {
    throw config_error("source: unknown form " + form);
  }

  if (j.contains("squashes")) {
    for (const auto& s : j.at("squashes")) {
      out.push_squash({s.at("inner").get<double>(),
                       s.at("bound").get<double>()});
    }
    if (hint) out.set_sup_norm_hint(*hint);
  }
  return out;
}

json scenario_to_json(const scenario_config& cfg) {
  return json{{"r", cfg.r},
              {"d_offset", cfg.d_offset},
              {"theta", cfg.theta},
              {"n_source", cfg.n_source},
              {"n_target", cfg.n_target},
              {"n_test", cfg.n_test},
              {"seed", cfg.seed}};
}

scenario_config scenario_from_json(const json& j) {
  scenario_config cfg;
  cfg.r = j.value("r", 5.0);
  cfg.d_offset = j.value("d_offset", 5.0);
  cfg.theta = j.value("theta", 0.0);
  cfg.n_source = j.value("n_source", Eigen::Index{10000});
  cfg.n_target = j.value("n_target", Eigen::Index{100});
  cfg.n_test = j.value("n_test", Eigen::Index{10000});
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.validate();
  return cfg;
}

json experiment_to_json(const experiment_config& cfg) {
  json losses = json::array();
  for (const auto& l : cfg.losses) losses.push_back(loss_to_json(l));
  return json{{"scenario", scenario_to_json(cfg.scenario)},
              {"losses", losses},
              {"kernel", kernel_to_json(cfg.kernel)},
              {"lambda", cfg.lambda},
              {"theta_grid", cfg.theta_grid},
              {"n_sims", cfg.n_sims},
              {"source_trainer",
               json{{"loss", loss_to_json(cfg.source_trainer.loss)},
                    {"lambda", cfg.source_trainer.lambda}}},
              {"output_path", cfg.output_path}};
}

experiment_config experiment_from_json(const json& j) {
  experiment_config cfg;
  cfg.scenario = scenario_from_json(j.at("scenario"));
  if (j.contains("losses")) {
    for (const auto& l : j.at("losses")) cfg.losses.push_back(loss_from_json(l));
  } else {
    cfg.losses = {loss_spec::exponential(), loss_spec::logistic(),
                  loss_spec::mse(), loss_spec::squared_hinge(),
                  loss_spec::softplus()};
  }
  cfg.kernel = j.contains("kernel") ? kernel_from_json(j.at("kernel"))
                                    : kernel_spec::gaussian(1.0);
  cfg.lambda = j.value("lambda", 1.0);
  if (j.contains("theta_grid"))
    cfg.theta_grid = j.at("theta_grid").get<std::vector<double>>();
  else
    cfg.theta_grid = experiment_config::default_theta_grid();
  cfg.n_sims = j.value("n_sims", 1000);
  if (j.contains("source_trainer")) {
    const json& st = j.at("source_trainer");
    if (st.contains("loss"))
      cfg.source_trainer.loss = loss_from_json(st.at("loss"));
    cfg.source_trainer.lambda = st.value("lambda", 1e-3);
  }
  cfg.output_path = j.value("output_path", std::string("negative_transfer.csv"));
  cfg.validate();
  return cfg;
}

}  // namespace htl
