#pragma once

#include "relu_lift/io.hpp"

#include <map>

namespace relu_lift::reproduce {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline Check check_near(const std::string& name, double got, double want, double tol) {
  std::ostringstream os;
  os << std::setprecision(12) << "got " << got << ", expected " << want << ", diff " << std::abs(got - want) << " (tol " << tol << ")";
  return {name, std::abs(got - want) <= tol, os.str()};
}

struct Report {
  std::vector<Check> checks;
  nlohmann::json data;
  std::map<std::string, std::string> files;  // name -> contents

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  nlohmann::json to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks) cs.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return {{"schema", io::kSchema}, {"pass", pass()}, {"checks", cs}, {"data", data}};
  }
};

/// One sample x = 1 with label 1, loss (1 - yhat)^2, beta = 1.
inline ProblemInstance fig1_instance(double beta = 1.0) {
  ProblemInstance inst;
  inst.X = MatrixXd::Ones(1, 1);
  inst.y = VectorXd::Ones(1);
  inst.beta = beta;
  inst.squared_weight = 1.0;
  return inst;
}

inline ProblemInstance example1_instance() {
  ProblemInstance inst;
  inst.X.resize(3, 2);
  inst.X << 1, 0, 0, 1, 1, 1;
  inst.y.resize(3);
  inst.y << 1, 0, 0;
  inst.beta = 0.1;
  return inst;
}

/// Both landscapes of the one-sample toy: the network (u, alpha) with a
/// single neuron, and the convex program over (v, w) = (w_+, w_-) on the
/// pattern [1].
inline Report fig1(int resolution = 81, double beta = 1.0) {
  if (resolution < 2) throw Error(ErrorCode::invalid_instance, "resolution must be >= 2");
  const ProblemInstance inst = fig1_instance(beta);
  Report rep;

  NeuralNet start;
  start.neurons.push_back(Neuron{VectorXd::Constant(1, 0.5), 0.5});
  TrainConfig cfg;
  cfg.m = 1;
  cfg.stationarity_tol = 1e-12;
  const auto gd = train_gd_from(inst, start, cfg);
  const double u = gd.net.neurons[0].u[0], alpha = gd.net.neurons[0].alpha;
  const double f_nc = objective_nc(inst, gd.net);

  const Arrangement arr(inst);
  const auto sol = solve_dichotomy_program(inst, arr.dichotomies());
  double v = 0.0, w = 0.0;
  for (std::size_t i = 0; i < arr.dichotomies().size(); ++i) {
    const auto& d = arr.dichotomies()[i];
    if (d.pattern[0] != 1) continue;
    (d.positive ? v : w) += sol.point.blocks[i][0];
  }
  const double f_c = sol.objective;

  rep.data = {{"nonconvex", {{"optimum", f_nc}, {"u", u}, {"alpha", alpha}, {"steps", gd.steps}}},
              {"convex", {{"optimum", f_c}, {"v", v}, {"w", w}, {"iterations", sol.iterations}}},
              {"beta", beta},
              {"resolution", resolution}};
  if (beta == 1.0) {
    rep.checks.push_back(check_near("nonconvex optimum", f_nc, 0.75, 1e-6));
    rep.checks.push_back(check_near("convex optimum", f_c, 0.75, 1e-6));
    rep.checks.push_back(check_near("nonconvex minimizer u", u, 1.0 / std::sqrt(2.0), 1e-4));
    rep.checks.push_back(check_near("nonconvex minimizer alpha", alpha, 1.0 / std::sqrt(2.0), 1e-4));
    rep.checks.push_back(check_near("convex minimizer v", v, 0.5, 1e-4));
    rep.checks.push_back(check_near("convex minimizer w", w, 0.0, 1e-4));
  }
  rep.checks.push_back(check_near("optima agree", f_nc, f_c, 1e-6));
  rep.checks.push_back(check_near("u |alpha| = v", u * std::abs(alpha), v - w, 1e-4));

  std::vector<std::vector<double>> nc_rows, c_rows;
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) {
      const double a = -2.0 + 4.0 * i / (resolution - 1), b = -2.0 + 4.0 * j / (resolution - 1);
      NeuralNet net;
      net.neurons.push_back(Neuron{VectorXd::Constant(1, a), b});
      nc_rows.push_back({a, b, objective_nc(inst, net)});
      const double vv = 2.0 * i / (resolution - 1), ww = 2.0 * j / (resolution - 1);
      c_rows.push_back({vv, ww, loss_value(inst, VectorXd::Constant(1, vv - ww)) + beta * (vv + ww)});
    }
  rep.files["fig1_nonconvex_grid.csv"] = io::csv({"u", "alpha", "objective"}, nc_rows);
  rep.files["fig1_convex_grid.csv"] = io::csv({"v", "w", "objective"}, c_rows);
  return rep;
}

/// Distance of a network from the split family around w: every alpha_i u_i
/// equals gamma_i w with gamma_i >= 0 and sum gamma_i = 1.
inline double split_family_residual(const NeuralNet& net, const VectorXd& w) {
  double res = 0.0, total = 0.0;
  for (const auto& nr : net.neurons) {
    const VectorXd p = nr.alpha * nr.u;
    const double g = p.dot(w) / w.squaredNorm();
    res = std::max({res, (p - g * w).norm() / w.norm(), -g});
    total += g;
  }
  return std::max(res, std::abs(total - 1.0));
}

inline Report example1(const std::vector<std::uint64_t>& seeds = {1, 10}) {
  const ProblemInstance inst = example1_instance();
  Report rep;
  const Arrangement arr(inst);

  const std::vector<std::vector<std::int8_t>> listed = {{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {1, 0, 0}, {1, 0, 1}, {1, 1, 1}};
  std::vector<std::vector<std::int8_t>> found;
  for (int i = 1; i <= arr.p(); ++i) found.push_back(arr.dichotomy(i).pattern);
  rep.checks.push_back({"p = 6 with the listed patterns", found == listed, "p = " + std::to_string(arr.p())});

  const auto sol = solve_dichotomy_program(inst, arr.dichotomies());
  const bool single = sol.point.nonzero_count() == 1 && sol.point.block_nonzero(4);
  rep.checks.push_back({"single nonzero block w5", single, std::to_string(sol.point.nonzero_count()) + " nonzero blocks"});
  const VectorXd w5 = sol.point.blocks[4];
  rep.checks.push_back(check_near("w5[0]", w5[0], 0.86, 0.01));
  rep.checks.push_back(check_near("w5[1]", w5[1], -0.79, 0.01));
  const auto kkt = kkt_check(inst, arr.dichotomies(), sol.point);
  rep.checks.push_back({"convex optimum certified", kkt.global(), "gap " + io::fmt(kkt.stationarity_gap)});

  const auto uniq = verify_unique_optimum(inst, arr.dichotomies(), sol.objective, 1e-4, {}, sol.point);
  rep.checks.push_back({"uniqueness radius <= 1e-4", uniq.unique && uniq.radius_inf <= 1e-4, "radius " + io::fmt(uniq.radius_inf)});

  std::vector<std::vector<double>> scatter;
  scatter.push_back({0.0, w5[0], w5[1]});
  nlohmann::json runs = nlohmann::json::array();
  for (const auto seed : seeds) {
    TrainConfig cfg;
    cfg.m = 5;
    cfg.seed = seed;
    const auto gd = train_gd(inst, cfg);
    const double resid = split_family_residual(gd.net, w5);
    const auto cert = check_global_optimality(inst, arr, gd.net);
    const std::string tag = "seed " + std::to_string(seed);
    rep.checks.push_back({tag + " split-family structure", resid <= 1e-2, "residual " + io::fmt(resid)});
    rep.checks.push_back({tag + " certified global", cert.global(), "objective " + io::fmt(cert.objective)});
    for (const auto& nr : gd.net.neurons) {
      const VectorXd p = nr.alpha * nr.u;
      scatter.push_back({static_cast<double>(seed), p[0], p[1]});
    }
    runs.push_back({{"seed", seed},
                    {"objective", objective_nc(inst, gd.net)},
                    {"steps", gd.steps},
                    {"converged", gd.converged},
                    {"eq14_residual", resid},
                    {"verdict", to_string(cert.verdict)},
                    {"network", io::to_json(gd.net)}});
  }
  rep.data = {{"p", arr.p()},
              {"patterns", found},
              {"optimum", sol.objective},
              {"w5", io::to_json(w5)},
              {"uniqueness_radius", uniq.radius_inf},
              {"gd", runs}};
  rep.files["example1_scatter.csv"] = io::csv({"seed", "x1", "x2"}, scatter);  // seed 0 marks w5
  std::vector<io::Series> series;
  io::Series pts{{}, {}, false, "#d62728"};
  for (std::size_t k = 1; k < scatter.size(); ++k) pts.x.push_back(scatter[k][1]), pts.y.push_back(scatter[k][2]);
  series.push_back(io::Series{{0.0, w5[0]}, {0.0, w5[1]}, true, "#1f77b4"});
  series.push_back(pts);
  rep.files["example1_scatter.svg"] = io::svg_plot(series, "x1", "x2");
  return rep;
}

}  // namespace relu_lift::reproduce
