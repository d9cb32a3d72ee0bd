#include "perfora/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace perfora {

const char* const kArtifactVersion = "1.0.0";

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

void check_keys(const json& j, const char* where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(std::string(where) + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) bad(std::string(where) + ": unknown key \"" + it.key() + "\"");
  }
}

const json& require(const json& j, const char* where, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) bad(std::string(where) + ": missing key \"" + key + "\"");
  return *it;
}

Point point_from(const json& j, const char* where) {
  if (!j.is_array()) bad(std::string(where) + ": expected an array of numbers");
  Point p;
  for (const auto& v : j) {
    if (!v.is_number()) bad(std::string(where) + ": expected an array of numbers");
    p.push_back(v.get<double>());
  }
  return p;
}

}  // namespace

HoleShape hole_from_json(const nlohmann::json& j) {
  const std::string kind = require(j, "hole", "kind").get<std::string>();
  if (kind == "ball") {
    check_keys(j, "hole(ball)", {"kind", "center", "radius"});
    return HoleShape::ball(point_from(require(j, "hole", "center"), "hole.center"),
                           require(j, "hole", "radius").get<double>());
  }
  if (kind == "box") {
    check_keys(j, "hole(box)", {"kind", "center", "half_widths"});
    return HoleShape::box(point_from(require(j, "hole", "center"), "hole.center"),
                          point_from(require(j, "hole", "half_widths"), "hole.half_widths"));
  }
  if (kind == "union") {
    check_keys(j, "hole(union)", {"kind", "parts"});
    const json& parts = require(j, "hole", "parts");
    if (!parts.is_array()) bad("hole.parts: expected an array");
    std::vector<HoleShape> ps;
    for (const auto& p : parts) ps.push_back(hole_from_json(p));
    return HoleShape::union_of(std::move(ps));
  }
  if (kind == "mask") {
    check_keys(j, "hole(mask)", {"kind", "dim", "resolution", "bits"});
    const json& bits = require(j, "hole", "bits");
    if (!bits.is_array()) bad("hole.bits: expected an array of 0/1");
    std::vector<std::uint8_t> b;
    b.reserve(bits.size());
    for (const auto& v : bits) {
      int x = v.get<int>();
      if (x != 0 && x != 1) bad("hole.bits: entries must be 0 or 1");
      b.push_back(static_cast<std::uint8_t>(x));
    }
    return HoleShape::mask(require(j, "hole", "dim").get<int>(),
                           require(j, "hole", "resolution").get<int>(), std::move(b));
  }
  if (kind == "empty") {
    check_keys(j, "hole(empty)", {"kind", "dim"});
    return HoleShape::empty(require(j, "hole", "dim").get<int>());
  }
  bad("hole.kind: unknown kind \"" + kind + "\"");
}

nlohmann::json hole_to_json(const HoleShape& hole) {
  json j;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BallHole>) {
          j["kind"] = "ball";
          j["center"] = v.center;
          j["radius"] = v.radius;
        } else if constexpr (std::is_same_v<T, BoxHole>) {
          j["kind"] = "box";
          j["center"] = v.center;
          j["half_widths"] = v.half_widths;
        } else if constexpr (std::is_same_v<T, UnionHole>) {
          if (v.parts.empty()) {
            j["kind"] = "empty";
            j["dim"] = hole.dim();
          } else {
            j["kind"] = "union";
            json parts = json::array();
            for (const auto& p : v.parts) parts.push_back(hole_to_json(p));
            j["parts"] = std::move(parts);
          }
        } else {
          j["kind"] = "mask";
          j["dim"] = v.dim;
          j["resolution"] = v.resolution;
          json bits = json::array();
          for (std::uint8_t b : v.bits) bits.push_back(static_cast<int>(b));
          j["bits"] = std::move(bits);
        }
      },
      hole.data());
  return j;
}

PerforatedDomain domain_from_json(const nlohmann::json& j) {
  check_keys(j, "domain",
             {"schema", "dim", "mode", "t", "hole", "modifications", "cylinder"});
  const int schema = require(j, "domain", "schema").get<int>();
  if (schema != 1) bad("domain.schema: unsupported schema version");
  const int dim = require(j, "domain", "dim").get<int>();
  std::string mode = "periodic";
  if (j.contains("mode")) mode = j["mode"].get<std::string>();
  std::vector<double> t = point_from(require(j, "domain", "t"), "domain.t");
  HoleShape hole = hole_from_json(require(j, "domain", "hole"));

  if (mode == "cylinder") {
    if (j.contains("modifications")) {
      bad("domain.modifications: not supported in cylinder mode");
    }
    const json& cj = require(j, "domain", "cylinder");
    check_keys(cj, "domain.cylinder", {"periodic_axes", "slab_width"});
    CylinderSpec spec;
    spec.periodic_axes = require(cj, "domain.cylinder", "periodic_axes").get<int>();
    spec.slab_width = require(cj, "domain.cylinder", "slab_width").get<double>();
    return PerforatedDomain::cylinder(dim, std::move(t), std::move(hole), spec);
  }
  if (mode != "periodic") bad("domain.mode: must be \"periodic\" or \"cylinder\"");
  if (j.contains("cylinder")) bad("domain.cylinder: only valid in cylinder mode");

  std::vector<CellModification> mods;
  if (j.contains("modifications")) {
    const json& mj = j["modifications"];
    if (!mj.is_array()) bad("domain.modifications: expected an array");
    for (const auto& m : mj) {
      check_keys(m, "modification", {"cell", "hole"});
      const json& cell = require(m, "modification", "cell");
      if (!cell.is_array()) bad("modification.cell: expected an integer array");
      std::vector<long long> idx;
      for (const auto& c : cell) idx.push_back(c.get<long long>());
      mods.push_back(
          CellModification{std::move(idx), hole_from_json(require(m, "modification", "hole"))});
    }
  }
  return PerforatedDomain::periodic(dim, std::move(t), std::move(hole), std::move(mods));
}

PerforatedDomain domain_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("domain file not readable: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    bad("domain file " + path + ": " + e.what());
  }
  return domain_from_json(j);
}

nlohmann::json domain_to_json(const PerforatedDomain& domain) {
  json j;
  j["schema"] = 1;
  j["dim"] = domain.dim();
  j["mode"] = domain.mode() == DomainMode::periodic ? "periodic" : "cylinder";
  j["t"] = domain.periods();
  j["hole"] = hole_to_json(domain.hole());
  if (domain.mode() == DomainMode::cylinder) {
    j["cylinder"] = {{"periodic_axes", domain.cylinder_spec().periodic_axes},
                     {"slab_width", domain.cylinder_spec().slab_width}};
  } else if (!domain.modifications().empty()) {
    json mods = json::array();
    for (const auto& m : domain.modifications()) {
      mods.push_back({{"cell", m.cell}, {"hole", hole_to_json(m.hole)}});
    }
    j["modifications"] = std::move(mods);
  }
  return j;
}

nlohmann::json report_to_json(const SolveReport& rep, const SolveConfig& cfg) {
  json j;
  j["version"] = kArtifactVersion;
  j["config"] = {{"p", cfg.p},
                 {"q", cfg.q},
                 {"tol", cfg.tol},
                 {"max_iters", cfg.max_iters},
                 {"eps_reg", rep.eps_reg_used},
                 {"seed", cfg.seed},
                 {"starts", cfg.starts}};
  if (cfg.penalty_n) j["config"]["penalty_n"] = *cfg.penalty_n;
  j["lambda"] = rep.lambda;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["sup_norm"] = rep.sup_norm;
  j["best_start"] = rep.best_start;
  json lvl = json::array();
  for (const auto& [eps, meas] : rep.level_set_table) lvl.push_back({eps, meas});
  j["level_set_table"] = std::move(lvl);
  json comps = json::array();
  for (const auto& c : rep.component_masses) {
    comps.push_back({{"first_node", c.first_node},
                     {"node_count", c.node_count},
                     {"share", c.share}});
  }
  j["component_masses"] = std::move(comps);
  if (cfg.penalty_n) {
    j["moment1"] = rep.moment1;
    j["moment2"] = rep.moment2;
  }
  return j;
}

nlohmann::json report_to_json(const ExperimentReport& rep) {
  json j;
  j["version"] = kArtifactVersion;
  j["experiment"] = rep.experiment;
  j["solver_tol"] = rep.solver_tol;
  j["discretization_allowance"] = rep.discretization_allowance;
  j["work"] = rep.work;
  json scalars = json::object();
  for (const auto& [k, v] : rep.scalars) scalars[k] = v;
  j["scalars"] = std::move(scalars);
  json verdicts = json::array();
  for (const auto& v : rep.verdicts) {
    verdicts.push_back({{"name", v.name}, {"value", v.value}, {"margin", v.margin}});
  }
  j["verdicts"] = std::move(verdicts);
  json tables = json::object();
  for (const auto& [name, rows] : rep.tables) {
    json t = json::array();
    for (const auto& [x, y] : rows) t.push_back({x, y});
    tables[name] = std::move(t);
  }
  j["tables"] = std::move(tables);
  return j;
}

nlohmann::json report_to_json(const CapacityResult& rep) {
  json j;
  j["version"] = kArtifactVersion;
  j["value"] = rep.value;
  j["iterations"] = rep.iterations;
  j["residual"] = rep.residual;
  j["h"] = rep.h;
  j["box_lo"] = rep.box_lo;
  j["box_hi"] = rep.box_hi;
  return j;
}

}  // namespace perfora
