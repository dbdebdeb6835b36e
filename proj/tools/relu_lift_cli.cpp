// relu-lift: command-line front end for the convex lifting pipeline.
//
// Exit status: 0 success, 2 a certification / assertion / solver failure,
// 1 a usage or input error.

#include "relu_lift.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace relu_lift;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kUsage = 1, kFailed = 2;

struct DataArgs {
  std::string input, labels, loss = "squared";
  double beta = 0.0;
  double squared_weight = 0.5;

  void add(CLI::App* sub) {
    sub->add_option("--input", input, "samples CSV (labels in the last column unless --labels)")->required()->check(CLI::ExistingFile);
    sub->add_option("--labels", labels, "labels CSV, one value per row")->check(CLI::ExistingFile);
    sub->add_option("--beta", beta, "weight-decay strength")->required()->check(CLI::PositiveNumber);
    sub->add_option("--loss", loss, "squared | logistic")->check(CLI::IsMember({"squared", "logistic"}));
    sub->add_option("--squared-weight", squared_weight, "c in c * ||yhat - y||^2")->check(CLI::PositiveNumber);
  }

  ProblemInstance load() const {
    ProblemInstance inst = io::load_instance(input, labels);
    inst.beta = beta;
    inst.loss = parse_loss(loss);
    inst.squared_weight = squared_weight;
    inst.validate();
    return inst;
  }
};

struct SolverArgs {
  double tol = 0.0;
  int max_iter = 200000;

  void add(CLI::App* sub) {
    sub->add_option("--tol", tol, "solver residual tolerance (0 = default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--max-iter", max_iter, "solver iteration cap")->check(CLI::PositiveNumber);
  }
  SolverOptions options() const {
    SolverOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    return o;
  }
};

void emit(const io::json& j, const std::string& out_dir, const std::string& name) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out_dir.empty()) io::write_text(fs::path(out_dir) / name, text);
}

void write_files(const std::string& out_dir, const std::map<std::string, std::string>& files) {
  if (out_dir.empty()) return;
  for (const auto& [name, text] : files) io::write_text(fs::path(out_dir) / name, text);
}

bool usage_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_instance:
    case ErrorCode::dim_mismatch:
    case ErrorCode::parse_error:
    case ErrorCode::too_few_neurons:
    case ErrorCode::cap_exceeded:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex lifting of two-layer ReLU training: enumerate, solve, train, certify, paths."};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir;
  app.add_option("--out", out_dir, "directory for JSON/CSV/SVG outputs");

  // enumerate
  auto* enumerate = app.add_subcommand("enumerate", "list dichotomies (and trichotomies) of the data");
  DataArgs en_data;
  en_data.add(enumerate);
  bool with_tri = false;
  std::size_t cap = 1'000'000;
  enumerate->add_flag("--trichotomies", with_tri, "also list trichotomies");
  enumerate->add_option("--cap", cap, "maximum number of patterns");

  // solve
  auto* solve = app.add_subcommand("solve", "solve the convex program");
  DataArgs so_data;
  SolverArgs so_solver;
  so_data.add(solve);
  so_solver.add(solve);
  bool so_tri = false;
  solve->add_flag("--trichotomy", so_tri, "solve the trichotomy program instead");

  // train
  auto* train = app.add_subcommand("train", "gradient descent on the network objective");
  DataArgs tr_data;
  tr_data.add(train);
  TrainConfig tr_cfg;
  train->add_option("--m", tr_cfg.m, "number of neurons")->check(CLI::PositiveNumber);
  train->add_option("--seed", tr_cfg.seed, "initialisation seed");
  train->add_option("--steps", tr_cfg.max_steps, "maximum GD steps")->check(CLI::PositiveNumber);
  train->add_option("--lr", tr_cfg.lr, "largest step of the line search")->check(CLI::PositiveNumber);
  train->add_option("--tol", tr_cfg.stationarity_tol, "stop once the gradient norm falls below this");

  // certify
  auto* certify = app.add_subcommand("certify", "certify a network as a global optimum");
  DataArgs ce_data;
  ce_data.add(certify);
  std::string ce_net;
  bool ce_stationary = false;
  certify->add_option("--network", ce_net, "network JSON")->required()->check(CLI::ExistingFile);
  certify->add_flag("--stationary", ce_stationary, "also compare with the subsampled trichotomy program");

  // path
  auto* path = app.add_subcommand("path", "build a non-increasing path from a network");
  DataArgs pa_data;
  pa_data.add(path);
  std::string pa_net, pa_kind = "nearly-minimal";
  int pa_points = 101;
  path->add_option("--network", pa_net, "network JSON")->required()->check(CLI::ExistingFile);
  path->add_option("--to", pa_kind, "nearly-minimal | merge | minimal | global")
      ->check(CLI::IsMember({"nearly-minimal", "merge", "minimal", "global"}));
  path->add_option("--points", pa_points, "grid size of the objective profile")->check(CLI::Range(2, 1000000));

  // interpolate
  auto* interp = app.add_subcommand("interpolate", "network realising a convex combination of two predictions");
  DataArgs in_data;
  in_data.add(interp);
  std::string in_net0, in_net1;
  double in_lambda = 0.5;
  std::size_t in_m = 0;
  interp->add_option("--network0", in_net0, "first network JSON")->required()->check(CLI::ExistingFile);
  interp->add_option("--network1", in_net1, "second network JSON")->required()->check(CLI::ExistingFile);
  interp->add_option("--lambda", in_lambda, "weight of the first network")->check(CLI::Range(0.0, 1.0));
  interp->add_option("--m", in_m, "width of the result (default 2(n+1))");

  // verify-unique
  auto* unique = app.add_subcommand("verify-unique", "bound the optimal set of the convex program");
  DataArgs un_data;
  SolverArgs un_solver;
  un_data.add(unique);
  un_solver.add(unique);
  double un_eps = 1e-4;
  unique->add_option("--eps", un_eps, "uniqueness radius")->check(CLI::PositiveNumber);

  // reproduce
  auto* repro = app.add_subcommand("reproduce", "reproduce the toy figure or the worked example");
  std::string which;
  int resolution = 81;
  std::vector<std::uint64_t> seeds = {1, 10};
  repro->add_option("which", which, "fig1 | example1")->required()->check(CLI::IsMember({"fig1", "example1"}));
  repro->add_option("--resolution", resolution, "landscape grid size per axis")->check(CLI::Range(2, 4096));
  repro->add_option("--seed", seeds, "GD seeds (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (enumerate->parsed()) {
      const auto inst = en_data.load();
      EnumerationOptions opts;
      opts.cap = cap;
      const Arrangement arr(inst, opts);
      emit(io::enumeration_json(arr, with_tri), out_dir, "enumeration.json");
      return kOk;
    }

    if (solve->parsed()) {
      const auto inst = so_data.load();
      const Arrangement arr(inst);
      if (so_tri) {
        const auto rep = solve_trichotomy_program(inst, arr.trichotomies(), std::nullopt, so_solver.options());
        emit(io::to_json(rep), out_dir, "solve.json");
        return rep.converged ? kOk : kFailed;
      }
      const auto rep = solve_dichotomy_program(inst, arr.dichotomies(), so_solver.options());
      emit(io::to_json(rep), out_dir, "solve.json");
      return rep.converged ? kOk : kFailed;
    }

    if (train->parsed()) {
      const auto inst = tr_data.load();
      const auto res = train_gd(inst, tr_cfg);
      const auto clarke = clarke_residual(inst, res.net);
      io::json j = {{"schema", io::kSchema},
                    {"objective", res.objective.back()},
                    {"steps", res.steps},
                    {"converged", res.converged},
                    {"gradient_norm", res.grad_norm.back()},
                    {"clarke_residual", clarke.residual_norm},
                    {"network", io::to_json(res.net)}};
      if (!out_dir.empty()) {
        io::write_text(fs::path(out_dir) / "trajectory.csv", io::trajectory_csv(res));
        io::write_text(fs::path(out_dir) / "network.json", io::to_json(res.net).dump(2) + "\n");
      }
      emit(j, out_dir, "train.json");
      return kOk;
    }

    if (certify->parsed()) {
      const auto inst = ce_data.load();
      const NeuralNet net = io::read_network(ce_net);
      check_dims(inst, net);
      const Arrangement arr(inst);
      const auto cert = check_global_optimality(inst, arr, net);
      io::json j = io::to_json(cert);
      if (ce_stationary) j["subsampled"] = io::to_json(subsampled_gap(inst, arr, net));
      emit(j, out_dir, "certificate.json");
      return cert.global() ? kOk : kFailed;
    }

    if (path->parsed()) {
      const auto inst = pa_data.load();
      const NeuralNet net = io::read_network(pa_net);
      check_dims(inst, net);
      const Arrangement arr(inst);
      Path p;
      if (pa_kind == "nearly-minimal") {
        p = path_to_nearly_minimal(inst, arr, net);
      } else if (pa_kind == "merge") {
        p = path_merge(inst, arr, net);
      } else if (pa_kind == "minimal") {
        const Path a = path_to_nearly_minimal(inst, arr, net);
        p = Path::concat({a, path_merge(inst, arr, a.end())});
      } else {
        const auto sol = solve_dichotomy_program(inst, arr.dichotomies());
        if (!kkt_check(inst, arr.dichotomies(), sol.point).global())
          throw Error(ErrorCode::solve_failed, "convex optimum could not be certified");
        p = path_to_global(inst, arr, net, psi(arr, sol.point));
      }
      const auto chk = check_path(inst, p, pa_points);
      if (!out_dir.empty()) {
        io::write_text(fs::path(out_dir) / "path.csv", io::path_csv(chk));
        io::write_text(fs::path(out_dir) / "path.svg", io::path_svg(chk));
        io::write_text(fs::path(out_dir) / "endpoint.json", io::to_json(p.end()).dump(2) + "\n");
      }
      emit(io::to_json(chk, p), out_dir, "path.json");
      return chk.pass ? kOk : kFailed;
    }

    if (interp->parsed()) {
      const auto inst = in_data.load();
      const NeuralNet a = io::read_network(in_net0), b = io::read_network(in_net1);
      check_dims(inst, a);
      check_dims(inst, b);
      const std::size_t m = in_m ? in_m : static_cast<std::size_t>(2 * (inst.n() + 1));
      const NeuralNet net = interpolate_realization(inst, a, b, in_lambda, m);
      io::json j = io::to_json(net);
      j["lambda"] = in_lambda;
      j["objective"] = objective_nc(inst, net);
      emit(j, out_dir, "interpolated.json");
      return kOk;
    }

    if (unique->parsed()) {
      const auto inst = un_data.load();
      const Arrangement arr(inst);
      const auto sol = solve_dichotomy_program(inst, arr.dichotomies(), un_solver.options());
      if (!kkt_check(inst, arr.dichotomies(), sol.point).global())
        throw Error(ErrorCode::solve_failed, "convex optimum could not be certified");
      UniquenessOptions uo;
      uo.solver = un_solver.options();
      const auto rep = verify_unique_optimum(inst, arr.dichotomies(), sol.objective, un_eps, uo, sol.point);
      io::json j = io::to_json(rep);
      j["optimum"] = sol.objective;
      emit(j, out_dir, "uniqueness.json");
      return rep.unique ? kOk : kFailed;
    }

    if (repro->parsed()) {
      const auto rep = which == "fig1" ? reproduce::fig1(resolution) : reproduce::example1(seeds);
      write_files(out_dir, rep.files);
      emit(rep.to_json(), out_dir, which + ".json");
      for (const auto& c : rep.checks)
        if (!c.pass) std::cerr << "assertion failed: " << c.name << ": " << c.detail << "\n";
      return rep.pass() ? kOk : kFailed;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage_error(e.code()) ? kUsage : kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}
