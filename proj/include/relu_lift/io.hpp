#pragma once

#include "relu_lift/certificates.hpp"
#include "relu_lift/paths.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace relu_lift::io {

using nlohmann::json;

inline constexpr int kSchema = 1;

// ---- CSV in ----

/// Numeric CSV, one row per line. A first line that does not parse is taken
/// as a header and skipped; blank lines are ignored.
inline MatrixXd read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool ok = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) ok = false;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw Error(ErrorCode::parse_error, path + ":" + std::to_string(lineno) + ": non-numeric cell");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::parse_error, path + ":" + std::to_string(lineno) + ": expected " +
                                              std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::parse_error, "'" + path + "' holds no data");
  MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

/// Samples from `input`; labels from `labels` if given, otherwise the last
/// column of `input`.
inline ProblemInstance load_instance(const std::string& input, const std::string& labels = "") {
  const MatrixXd A = read_csv(input);
  ProblemInstance inst;
  if (labels.empty()) {
    if (A.cols() < 2) throw Error(ErrorCode::parse_error, "'" + input + "' needs a label column");
    inst.X = A.leftCols(A.cols() - 1);
    inst.y = A.col(A.cols() - 1);
  } else {
    inst.X = A;
    const MatrixXd b = read_csv(labels);
    if (b.cols() != 1 && b.rows() != 1) throw Error(ErrorCode::parse_error, "labels must be a single column");
    inst.y = b.cols() == 1 ? VectorXd(b.col(0)) : VectorXd(b.row(0).transpose());
  }
  return inst;
}

// ---- JSON ----

inline json to_json(const VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::parse_error, "expected a numeric array");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::parse_error, "expected a numeric array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline json to_json(const NeuralNet& net) {
  json neurons = json::array();
  for (const auto& nr : net.neurons) neurons.push_back({{"u", to_json(nr.u)}, {"alpha", nr.alpha}});
  return {{"schema", kSchema}, {"neurons", neurons}};
}

inline NeuralNet network_from_json(const json& j) {
  if (!j.is_object() || !j.contains("neurons") || !j["neurons"].is_array())
    throw Error(ErrorCode::parse_error, "network JSON needs a 'neurons' array");
  NeuralNet net;
  for (const auto& e : j["neurons"]) {
    if (!e.contains("u") || !e.contains("alpha") || !e["alpha"].is_number())
      throw Error(ErrorCode::parse_error, "neuron entries need 'u' and 'alpha'");
    net.neurons.push_back(Neuron{vector_from_json(e["u"]), e["alpha"].get<double>()});
  }
  if (!net.neurons.empty())
    for (const auto& nr : net.neurons)
      if (nr.u.size() != net.neurons.front().u.size()) throw Error(ErrorCode::parse_error, "neurons differ in dimension");
  return net;
}

inline json to_json(const std::vector<Dichotomy>& ds) {
  json arr = json::array();
  for (const auto& d : ds)
    arr.push_back({{"index", d.index}, {"pattern", d.pattern}, {"positive", d.positive}, {"witness", to_json(d.witness)}});
  return arr;
}

inline json to_json(const std::vector<Trichotomy>& ts) {
  json arr = json::array();
  for (const auto& t : ts) arr.push_back({{"index", t.index}, {"signs", t.signs}, {"witness", to_json(t.witness)}});
  return arr;
}

inline json enumeration_json(const Arrangement& arr, bool with_trichotomies) {
  json j = {{"schema", kSchema},
            {"n", arr.X().rows()},
            {"d", arr.X().cols()},
            {"rank", numeric_rank(arr.X())},
            {"p", arr.p()},
            {"cover_bound", cover_bound(static_cast<int>(arr.X().rows()), numeric_rank(arr.X()))},
            {"dichotomies", to_json(arr.dichotomies())}};
  if (with_trichotomies) {
    j["q"] = arr.q();
    j["trichotomies"] = to_json(arr.trichotomies());
  }
  return j;
}

inline json stats_json(const SolveStats& s) {
  return {{"objective", s.objective},         {"primal_residual", s.primal_residual},
          {"dual_residual", s.dual_residual}, {"residuals", {s.primal_residual, s.dual_residual}},
          {"iterations", s.iterations},       {"converged", s.converged},
          {"polished", s.polished},           {"tol", s.tol}};
}

inline json to_json(const ConvexPoint& W, bool nonzero_only = false) {
  json blocks = json::array();
  for (std::size_t i = 0; i < W.blocks.size(); ++i)
    if (!nonzero_only || W.block_nonzero(i)) blocks.push_back({{"index", i + 1}, {"w", to_json(W.blocks[i])}});
  return blocks;
}

inline ConvexPoint point_from_json(const json& j, std::size_t count, Eigen::Index d) {
  ConvexPoint W = ConvexPoint::zeros(count, d);
  const json& blocks = j.is_object() ? j.at("blocks") : j;
  for (const auto& b : blocks) {
    const auto idx = b.at("index").get<std::size_t>();
    if (idx < 1 || idx > count) throw Error(ErrorCode::parse_error, "block index " + std::to_string(idx) + " out of range");
    W.blocks[idx - 1] = vector_from_json(b.at("w"));
    if (W.blocks[idx - 1].size() != d) throw Error(ErrorCode::dim_mismatch, "block has the wrong dimension");
  }
  return W;
}

inline json to_json(const SolveReport& rep) {
  json j = stats_json(rep);
  j["schema"] = kSchema;
  j["nonzero_blocks"] = rep.point.nonzero_count();
  j["blocks"] = to_json(rep.point);
  return j;
}

inline json to_json(const TriSolveReport& rep) {
  json j = stats_json(rep);
  j["schema"] = kSchema;
  j["subset"] = rep.point.subset;
  json blocks = json::array();
  for (std::size_t i = 0; i < rep.point.blocks.size(); ++i) blocks.push_back({{"index", i + 1}, {"w", to_json(rep.point.blocks[i])}});
  j["blocks"] = blocks;
  return j;
}

inline json to_json(const Certificate& c) {
  json blocks = json::array();
  for (const auto& b : c.per_block)
    blocks.push_back({{"index", b.index},
                      {"nonzero", b.nonzero},
                      {"residual", b.residual},
                      {"dual_norms", b.dual_norm},
                      {"complementarity", b.complementarity},
                      {"pass", b.pass}});
  json j = {{"schema", kSchema},
            {"verdict", to_string(c.verdict)},
            {"gap", c.stationarity_gap},
            {"tolerance", c.tolerance},
            {"per_block", blocks}};
  if (!std::isnan(c.objective)) {
    j["objective"] = c.objective;
    j["reduced_objective"] = c.reduced_objective;
    j["convex_objective"] = c.convex_objective;
  }
  return j;
}

inline json to_json(const UniquenessReport& u) {
  json coords = json::array();
  for (std::size_t k = 0; k < u.lower.size(); ++k)
    coords.push_back({{"index", k}, {"lower", u.lower[k]}, {"upper", u.upper[k]}, {"known", u.known[k] != 0}});
  return {{"schema", kSchema}, {"unique", u.unique}, {"radius_inf", u.radius_inf}, {"epsilon", u.epsilon}, {"coordinates", coords}};
}

inline json to_json(const SubsampledGap& g) {
  return {{"schema", kSchema},
          {"gap", g.gap},
          {"active_set", g.active_set},
          {"subsampled_optimum", g.subsampled_optimum},
          {"full_optimum", g.full_optimum},
          {"network_objective", g.network_objective},
          {"correspondence", g.correspondence},
          {"clarke", g.clarke}};
}

inline json to_json(const PathCheck& c, const Path& p) {
  json segs = json::array();
  for (const auto& s : p.segments())
    segs.push_back({{"t0", s.t0}, {"t1", s.t1}, {"formula", s.formula}, {"claim", to_string(s.claim)}});
  return {{"schema", kSchema},
          {"claim", to_string(p.claim())},
          {"pass", c.pass},
          {"max_increase", c.max_increase},
          {"spread", c.spread},
          {"start_objective", c.objective.front()},
          {"end_objective", c.objective.back()},
          {"segments", segs},
          {"message", c.message}};
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
}

inline NeuralNet read_network(const std::string& path) { return network_from_json(read_json(path)); }

// ---- CSV / SVG out ----

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::parse_error, "cannot write '" + path.string() + "'");
  out << text;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << fmt(r[j]);
    os << '\n';
  }
  return os.str();
}

inline std::string trajectory_csv(const TrainResult& res) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < res.objective.size(); ++k)
    rows.push_back({static_cast<double>(k), res.objective[k], res.grad_norm[k]});
  return csv({"step", "objective", "residual"}, rows);
}

inline std::string path_csv(const PathCheck& c) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < c.t.size(); ++k) rows.push_back({c.t[k], c.objective[k]});
  return csv({"t", "objective"}, rows);
}

struct Series {
  std::vector<double> x, y;
  bool line = true;
  std::string colour = "#1f77b4";
};

/// Plain SVG chart: polylines or point markers on shared axes.
inline std::string svg_plot(const std::vector<Series>& series, const std::string& xlabel, const std::string& ylabel) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      x0 = std::min(x0, s.x[k]), x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]), y1 = std::max(y1, s.y[k]);
    }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  const double W = 480, H = 320, L = 70, B = 40, T = 15, R = 15;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - B - T); };
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << L << "\" y=\"" << H - B + 15 << "\" font-size=\"10\">" << x0 << "</text>\n";
  os << "<text x=\"" << W - R << "\" y=\"" << H - B + 15 << "\" font-size=\"10\" text-anchor=\"end\">" << x1 << "</text>\n";
  os << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" font-size=\"10\" text-anchor=\"end\">" << y0 << "</text>\n";
  os << "<text x=\"" << L - 4 << "\" y=\"" << T + 8 << "\" font-size=\"10\" text-anchor=\"end\">" << y1 << "</text>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 8 << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text x=\"14\" y=\"" << (T + H - B) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (const auto& s : series) {
    if (s.line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k) os << px(s.x[k]) << ',' << py(s.y[k]) << ' ';
      os << "\"/>\n";
    } else {
      for (std::size_t k = 0; k < s.x.size(); ++k)
        os << "<circle cx=\"" << px(s.x[k]) << "\" cy=\"" << py(s.y[k]) << "\" r=\"3\" fill=\"" << s.colour << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string path_svg(const PathCheck& c) { return svg_plot({Series{c.t, c.objective}}, "t", "objective"); }

}  // namespace relu_lift::io
