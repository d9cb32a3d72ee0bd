#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "perfora/acceptance.hpp"
#include "perfora/analysis.hpp"
#include "perfora/capacity.hpp"
#include "perfora/grid.hpp"
#include "perfora/json_io.hpp"
#include "perfora/solver.hpp"

namespace {

using perfora::ExperimentReport;

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads <= 0) {
    if (const char* env = std::getenv("PERFORA_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

double parse_q(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  return std::stod(s);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

// "1,1;2,2" -> {{1,1},{2,2}}
std::vector<std::vector<double>> parse_vec_list(const std::string& s) {
  std::vector<std::vector<double>> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ';')) {
    if (!tok.empty()) out.push_back(parse_list(tok));
  }
  return out;
}

void emit_csv(const ExperimentReport& rep, const std::string& path) {
  std::ofstream out(path);
  out << "table,x,y\n";
  out.precision(17);
  for (const auto& [name, rows] : rep.tables) {
    for (const auto& [x, y] : rows) out << name << "," << x << "," << y << "\n";
  }
}

void print_experiment(const ExperimentReport& rep, const std::string& csv_path) {
  std::cout << perfora::report_to_json(rep).dump(2) << "\n";
  if (!csv_path.empty()) emit_csv(rep, csv_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poincare-Sobolev constants, capacities, and diagnostics on "
               "truncated periodically perforated domains"};
  app.require_subcommand(1);
  // The grid-spacing option is spelled --h, so keep only the long help flag.
  app.set_help_flag("--help", "print help");
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (or env PERFORA_THREADS)");

  // lambda
  auto* lam = app.add_subcommand("lambda", "compute lambda_{p,q} on a window");
  lam->set_help_flag("--help", "print help");
  std::string domain_path, q_str = "2", emit_field, csv_path;
  double p = 2, h = 1.0 / 16, tol = 1e-8;
  int window = 1, starts = 0, penalty_n = -1;
  std::uint64_t seed = 1;
  lam->add_option("--domain", domain_path, "domain JSON file")->required();
  lam->add_option("--p", p);
  lam->add_option("--q", q_str, "exponent q (number or 'inf')");
  lam->add_option("--window", window, "window radius in cells");
  lam->add_option("--h", h, "grid spacing");
  lam->add_option("--tol", tol);
  lam->add_option("--starts", starts);
  lam->add_option("--seed", seed);
  lam->add_option("--penalty-n", penalty_n, "confinement index n (V_n penalty)");
  lam->add_option("--emit-field", emit_field, "write the extremal field dump here");

  // capacity
  auto* cap = app.add_subcommand("capacity", "relative p-capacity of a hole in a box");
  cap->set_help_flag("--help", "print help");
  std::string obstacle_path, box_spec;
  double cap_p = 2, cap_h = 1.0 / 64, cap_tol = 1e-10;
  cap->add_option("--obstacle", obstacle_path, "hole JSON file")->required();
  cap->add_option("--box", box_spec, "'ball:cx,cy,...,r' or 'box:lo...;hi...'")->required();
  cap->add_option("--p", cap_p);
  cap->add_option("--h", cap_h);
  cap->add_option("--tol", cap_tol);

  // infinity
  auto* infc = app.add_subcommand("infinity", "energy at infinity sup_R lambda(window \\ B_R)");
  infc->set_help_flag("--help", "print help");
  std::string R_str = "0,0.6,1.5";
  infc->add_option("--domain", domain_path, "domain JSON file")->required();
  infc->add_option("--p", p);
  infc->add_option("--q", q_str);
  infc->add_option("--R", R_str, "comma-separated ball radii");
  infc->add_option("--window", window);
  infc->add_option("--h", h);
  infc->add_option("--tol", tol);
  infc->add_option("--csv", csv_path);

  // existence
  auto* exi = app.add_subcommand("existence", "p=2 existence criterion lambda < E");
  exi->set_help_flag("--help", "print help");
  exi->add_option("--domain", domain_path, "domain JSON file")->required();
  exi->add_option("--q", q_str);
  exi->add_option("--R", R_str);
  exi->add_option("--window", window);
  exi->add_option("--h", h);
  exi->add_option("--tol", tol);
  exi->add_option("--csv", csv_path);

  // lieb-ball
  auto* lieb = app.add_subcommand("lieb-ball", "largest ball with volume fraction >= beta");
  lieb->set_help_flag("--help", "print help");
  double beta = 0.5;
  std::string radii_str = "1.0,0.75,0.5,0.45,0.35";
  lieb->add_option("--domain", domain_path, "domain JSON file")->required();
  lieb->add_option("--window", window);
  lieb->add_option("--h", h);
  lieb->add_option("--beta", beta);
  lieb->add_option("--radii", radii_str);

  // mazya-sweep
  auto* mz = app.add_subcommand("mazya-sweep", "empirical constant in the capacity lower bound");
  mz->set_help_flag("--help", "print help");
  std::string hole_path, t_str = "1,1;2,2";
  mz->add_option("--hole", hole_path, "hole JSON file")->required();
  mz->add_option("--p", p);
  mz->add_option("--t", t_str, "semicolon-separated dilation vectors");
  mz->add_option("--window", window);
  mz->add_option("--h", h);
  mz->add_option("--csv", csv_path);

  // modify-hole
  auto* mh = app.add_subcommand("modify-hole", "single-cell hole modification experiments");
  mh->set_help_flag("--help", "print help");
  std::string variant = "enlarged", windows_str = "2,3,4";
  double modified_radius = 0.4, base_r = 0.25;
  mh->add_option("--variant", variant)->check(CLI::IsMember({"enlarged", "shrunk"}));
  mh->add_option("--modified-radius", modified_radius);
  mh->add_option("--base-r", base_r);
  mh->add_option("--q", q_str);
  mh->add_option("--windows", windows_str);
  mh->add_option("--h", h);
  mh->add_option("--tol", tol);
  mh->add_option("--csv", csv_path);

  // verify
  auto* ver = app.add_subcommand("verify", "run the full verification suite");
  ver->set_help_flag("--help", "print help");
  std::string out_path;
  ver->add_option("--seed", seed);
  ver->add_option("--out", out_path, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);
  apply_threads(threads);

  try {
    if (lam->parsed()) {
      perfora::PerforatedDomain dom = perfora::domain_from_file(domain_path);
      perfora::Grid g = perfora::discretize(dom, window, h);
      perfora::SolveConfig cfg;
      cfg.p = p;
      cfg.q = parse_q(q_str);
      cfg.tol = tol;
      cfg.starts = starts;
      cfg.seed = seed;
      if (penalty_n >= 0) cfg.penalty_n = penalty_n;
      perfora::SolveReport rep = penalty_n >= 0 ? perfora::lambda_pq_penalized(g, cfg)
                                                : perfora::lambda_pq(g, cfg);
      nlohmann::json j = perfora::report_to_json(rep, cfg);
      j["domain"] = perfora::domain_to_json(dom);
      j["grid"] = {{"window", window}, {"h", h}, {"interior_nodes", g.num_interior()}};
      std::cout << j.dump(2) << "\n";
      if (!emit_field.empty()) perfora::dump_field(g, rep.extremal, emit_field);
      return rep.converged || !std::isfinite(rep.lambda) ? 0 : 2;
    }
    if (cap->parsed()) {
      std::ifstream in(obstacle_path);
      if (!in) throw std::invalid_argument("obstacle file not readable: " + obstacle_path);
      nlohmann::json hj;
      in >> hj;
      perfora::HoleShape hole = perfora::hole_from_json(hj);
      perfora::Region box;
      if (box_spec.rfind("ball:", 0) == 0) {
        std::vector<double> v = parse_list(box_spec.substr(5));
        if (v.size() < 2) throw std::invalid_argument("--box ball: needs center...,radius");
        double radius = v.back();
        v.pop_back();
        box = perfora::ball_region(v, radius);
      } else if (box_spec.rfind("box:", 0) == 0) {
        std::vector<std::vector<double>> lh = parse_vec_list(box_spec.substr(4));
        if (lh.size() != 2) throw std::invalid_argument("--box box: needs 'lo...;hi...'");
        box = perfora::box_region(lh[0], lh[1]);
      } else {
        throw std::invalid_argument("--box: expected 'ball:...' or 'box:...'");
      }
      perfora::CapacityResult res = perfora::relative_capacity(
          [&hole](std::span<const double> x) { return hole.contains(x); }, box, cap_p,
          cap_h, cap_tol);
      std::cout << perfora::report_to_json(res).dump(2) << "\n";
      return 0;
    }
    if (infc->parsed()) {
      perfora::PerforatedDomain dom = perfora::domain_from_file(domain_path);
      perfora::SolveConfig cfg;
      cfg.p = p;
      cfg.q = parse_q(q_str);
      cfg.tol = tol;
      perfora::InfinityResult res =
          perfora::energy_at_infinity(dom, cfg, parse_list(R_str), window, h);
      ExperimentReport rep;
      rep.experiment = "infinity";
      rep.solver_tol = tol;
      rep.work = res.work;
      rep.scalars.emplace_back("energy_at_infinity", res.estimate);
      rep.tables.emplace_back("energy_at_infinity", res.table);
      print_experiment(rep, csv_path);
      return 0;
    }
    if (exi->parsed()) {
      perfora::PerforatedDomain dom = perfora::domain_from_file(domain_path);
      perfora::SolveConfig cfg;
      cfg.p = 2;
      cfg.tol = tol;
      ExperimentReport rep = perfora::existence_test(dom, parse_q(q_str), cfg,
                                                     parse_list(R_str), window, h);
      print_experiment(rep, csv_path);
      return 0;
    }
    if (lieb->parsed()) {
      perfora::PerforatedDomain dom = perfora::domain_from_file(domain_path);
      perfora::LiebBall b =
          perfora::lieb_ball_search(dom, window, h, beta, parse_list(radii_str));
      nlohmann::json j;
      j["version"] = perfora::kArtifactVersion;
      j["center"] = b.center;
      j["radius"] = b.radius;
      j["fraction"] = b.fraction;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (mz->parsed()) {
      std::ifstream in(hole_path);
      if (!in) throw std::invalid_argument("hole file not readable: " + hole_path);
      nlohmann::json hj;
      in >> hj;
      ExperimentReport rep = perfora::mazya_bound_sweep(
          perfora::hole_from_json(hj), p, parse_vec_list(t_str), window, h);
      print_experiment(rep, csv_path);
      return 0;
    }
    if (mh->parsed()) {
      std::vector<int> windows;
      for (double w : parse_list(windows_str)) windows.push_back(static_cast<int>(w));
      ExperimentReport rep = perfora::hole_modification_experiment(
          variant == "enlarged" ? perfora::HoleModVariant::enlarged
                                : perfora::HoleModVariant::shrunk,
          modified_radius, base_r, parse_q(q_str), windows, h, tol);
      print_experiment(rep, csv_path);
      return 0;
    }
    if (ver->parsed()) {
      std::vector<perfora::CriterionResult> results = perfora::run_acceptance(seed);
      bool all = true;
      for (const auto& r : results) {
        all = all && r.pass;
        std::cout << (r.pass ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.name
                  << " — " << r.detail << "\n";
      }
      nlohmann::json j = perfora::acceptance_to_json(results, seed);
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << j.dump(2) << "\n";
      }
      std::cout << (all ? "ALL PASS" : "FAILURES PRESENT") << "\n";
      return all ? 0 : 2;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
