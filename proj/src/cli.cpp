#include "capfield/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "capfield/errors.hpp"
#include "capfield/oracle.hpp"
#include "capfield/potential.hpp"
#include "capfield/support.hpp"

namespace capfield::cli {

namespace {

using json = nlohmann::ordered_json;

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Radians only: anything but a plain number is refused.
double parse_angle(const std::string& text, const std::string& name) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ValidationError(name + ": not a number: " + text);
  }
  if (used != text.size()) {
    throw ValidationError(name + ": angles are taken in radians only, got '" +
                          text + "'");
  }
  if (!std::isfinite(value)) throw ValidationError(name + ": not finite");
  return value;
}

struct Options {
  std::string field = "zero";
  double q = 1.0;
  double h = 2.0;
  double a = 1.0;
  double b = 2.5;
  double c = 2.0;
  std::string csv;
  std::string alpha;
  int nodes = 64;
  double tol = 1e-4;
  std::string method = "nystrom";
  int iterations = 20000;
  bool pipeline = false;
  std::string out;
  std::string table;
  std::string pin;
  std::string check;
  bool timings = false;
};

// Failing operation, named in error messages.
struct Stage {
  std::string name;
};

ExternalField make_field(const Options& o) {
  if (o.field == "zero") return ExternalField::zero();
  if (o.field == "point-charge") return ExternalField::point_charge(o.q, o.h);
  if (o.field == "north-pole") return ExternalField::point_charge(o.q, 1.0);
  if (o.field == "quadratic") return ExternalField::quadratic(o.a, o.b, o.c);
  if (o.field == "tabulated") {
    if (o.csv.empty()) throw ValidationError("tabulated field needs --csv");
    return ExternalField::from_csv(o.csv);
  }
  throw ValidationError("unknown field kind: " + o.field);
}

json field_json(const ExternalField& field) {
  json j;
  j["description"] = field.describe();
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ZeroField>) {
          j["kind"] = "zero";
        } else if constexpr (std::is_same_v<T, PointChargeField>) {
          j["kind"] = "point-charge";
          j["q"] = d.q;
          j["h"] = d.h;
        } else if constexpr (std::is_same_v<T, QuadraticField>) {
          j["kind"] = "quadratic";
          j["a"] = d.a;
          j["b"] = d.b;
          j["c"] = d.c;
        } else {
          j["kind"] = "tabulated";
          j["samples"] = d.x3.size();
        }
      },
      field.definition());
  return j;
}

// Writes a number only when finite; JSON has no infinities.
void put(json& j, const std::string& key, double v) {
  if (std::isfinite(v)) j[key] = v;
}

double tolerance_for(const std::string& command) {
  static const std::map<std::string, double> tol{
      {"capacity", 1e-12}, {"gonchar", 1e-10}, {"support", 1e-10},
      {"ffunctional", 1e-10}, {"density", 1e-8}, {"verify", 1e-6},
      {"oracle", 1e-6}};
  return tol.at(command);
}

class Runner {
 public:
  Runner(const Options& o, Stage& stage) : o_(o), stage_(stage) {}

  json capacity() {
    const double alpha = angle();
    stage_.name = "equilibrium.capacity_south_cap";
    json j;
    j["alpha"] = alpha;
    j["capacity"] = capacity_south_cap(PolarAngle(alpha));
    return j;
  }

  json gonchar() {
    stage_.name = "support_finder.gonchar_heights";
    const GoncharHeights g = gonchar_heights(o_.q);
    json j;
    j["q"] = o_.q;
    j["h_minus"] = g.h_minus;
    j["h_plus"] = g.h_plus;
    j["residuals"] = {{"minus", g.residual_minus}, {"plus", g.residual_plus}};
    return j;
  }

  json support() {
    const ExternalField field = load_field();
    stage_.name = "support_finder.solve_support";
    const SupportSolution s = timed("support", [&] { return solve_support(field); });
    json j;
    j["field"] = field_json(field);
    support_fields(j, s);
    return j;
  }

  json ffunctional() {
    const ExternalField field = load_field();
    const double alpha = angle();
    stage_.name = "support_finder.ffunctional_numeric";
    json j;
    j["field"] = field_json(field);
    j["alpha"] = alpha;
    j["F"] = ffunctional_numeric(field, PolarAngle(alpha));
    if (const auto* pc = std::get_if<PointChargeField>(&field.definition());
        pc && field.offset() == 0.0 && !field.mirrored()) {
      stage_.name = "support_finder.ffunctional_pointcharge";
      j["F_closed_form"] = ffunctional_pointcharge(pc->q, pc->h, PolarAngle(alpha));
    }
    if (const auto* qd = std::get_if<QuadraticField>(&field.definition());
        qd && field.offset() == 0.0 && !field.mirrored()) {
      stage_.name = "support_finder.ffunctional_quadratic";
      j["F_closed_form"] =
          ffunctional_quadratic(qd->a, qd->b, qd->c, PolarAngle(alpha));
    }
    return j;
  }

  json density() {
    const ExternalField field = load_field();
    json j;
    j["field"] = field_json(field);
    const auto [alpha, method] = support_angle(field, j);
    const DensityProfile profile = make_profile(field, alpha, j);
    j["alpha0"] = alpha;
    j["method"] = method;
    put(j, "FQ", profile.robin_constant());
    put(j, "mass", profile.mass());
    j["nodes"] = profile.grid().size();
    j["negative_nodes"] = profile.negative_nodes().size();
    table(profile, field, j);
    return j;
  }

  json verify() {
    const ExternalField field = load_field();
    json j;
    j["field"] = field_json(field);
    const auto [alpha, method] = support_angle(field, j);
    const DensityProfile profile = make_profile(field, alpha, j);
    stage_.name = "potential.verify_equilibrium";
    const EquilibriumReport r = timed("verify", [&] {
      return verify_equilibrium(field, profile, o_.tol);
    });
    j["alpha0"] = alpha;
    j["method"] = method;
    put(j, "FQ", profile.robin_constant());
    put(j, "mass", profile.mass());
    j["passed"] = r.passed;
    json res;
    put(res, "sup_deviation_on_support", r.sup_deviation_on_support);
    put(res, "min_slack_off_support", r.min_slack_off_support);
    put(res, "mass_error", r.mass_error);
    put(res, "min_density", r.min_density);
    res["tolerance"] = r.tolerance;
    j["residuals"] = res;
    table(profile, field, j);
    return j;
  }

  json oracle() {
    const ExternalField field = load_field();
    json j;
    j["field"] = field_json(field);
    if (o_.method == "energy") {
      stage_.name = "oracle.discrete_energy_minimize";
      const DiscreteMeasure m = timed("oracle", [&] {
        return discrete_energy_minimize(field, o_.nodes, o_.iterations);
      });
      // Support edge: first ring carrying weight, from the north pole.
      double edge = kPi;
      for (std::size_t i = 0; i < m.weights.size(); ++i) {
        if (m.weights[i] > 1e-6) {
          edge = m.ring_angles[i] - m.ring_halfwidths[i];
          break;
        }
      }
      j["method"] = "DiscreteEnergy";
      j["alpha0"] = edge;
      j["FQ"] = m.multiplier;
      j["mass"] = 1.0;
      j["rings"] = m.weights.size();
      j["iterations"] = m.iterations;
      j["residuals"] = {{"gradient_norm", m.gradient_norm}};
      return j;
    }
    if (o_.method != "nystrom") {
      throw ValidationError("unknown oracle method: " + o_.method);
    }
    const auto [alpha, method] = support_angle(field, j);
    stage_.name = "oracle.nystrom_solve";
    const NystromSolution ns = timed("oracle", [&] {
      return nystrom_solve(field, SphericalCap::south(alpha), o_.nodes);
    });
    j["method"] = "Nystrom";
    j["alpha0"] = alpha;
    j["FQ"] = ns.robin_constant;
    j["mass"] = ns.profile.mass();
    j["nodes"] = o_.nodes;
    table(ns.profile, field, j);
    return j;
  }

  json timings() const { return timings_; }

 private:
  double angle() const {
    if (o_.alpha.empty()) throw ValidationError("--alpha is required");
    return parse_angle(o_.alpha, "--alpha");
  }

  ExternalField load_field() {
    stage_.name = "fields.validate";
    return make_field(o_);
  }

  template <class F>
  std::invoke_result_t<F> timed(const std::string& key, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = fn();
    const auto t1 = std::chrono::steady_clock::now();
    timings_[key + "_seconds"] =
        std::chrono::duration<double>(t1 - t0).count();
    return result;
  }

  static void support_fields(json& j, const SupportSolution& s) {
    j["alpha0"] = s.alpha0.value();
    j["FQ"] = s.robin_constant;
    j["method"] = std::string(to_string(s.method));
    j["iterations"] = s.iterations;
    json res;
    put(res, "support", s.residual);
    res["bracket"] = {s.bracket.first, s.bracket.second};
    j["residuals"] = res;
  }

  // --alpha when given, otherwise the solved support angle.
  std::pair<double, std::string> support_angle(const ExternalField& field,
                                               json& j) {
    if (!o_.alpha.empty()) return {angle(), "Given"};
    stage_.name = "support_finder.solve_support";
    const SupportSolution s =
        timed("support", [&] { return solve_support(field); });
    json sup;
    support_fields(sup, s);
    j["support"] = sup;
    return {s.alpha0.value(), std::string(to_string(s.method))};
  }

  DensityProfile make_profile(const ExternalField& field, double alpha,
                              json& j) {
    const SphericalCap cap = SphericalCap::south(alpha);
    const PhiGrid grid =
        PhiGrid::for_cap(cap, o_.nodes, GridSpacing::BoundaryClustered);
    return timed("density", [&] {
      if (!o_.pipeline) {
        try {
          stage_.name = "equilibrium.closed_form_profile";
          DensityProfile p = closed_form_profile(field, PolarAngle(alpha), grid);
          j["density_route"] = "ClosedForm";
          return p;
        } catch (const ValidationError&) {
          // No closed form for this field.
        }
      }
      stage_.name = "equilibrium.density_general";
      DensityProfile p = density_general(field, cap, grid);
      j["density_route"] = "AbelPipeline";
      return p;
    });
  }

  void table(const DensityProfile& profile, const ExternalField& field,
             json& j) {
    if (o_.table.empty()) return;
    stage_.name = "cli.emit_density_table";
    timed("table", [&] {
      emit_density_table(profile, field, o_.table);
      return 0;
    });
    j["table"] = o_.table;
  }

  const Options& o_;
  Stage& stage_;
  json timings_ = json::object();
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

// Compares every number of the pinned summary; returns mismatch messages.
std::vector<std::string> compare(const json& golden, const json& current,
                                 double tol) {
  std::vector<std::string> out;
  const json flat_gold = golden.flatten();
  const json flat_now = current.flatten();
  for (const auto& [key, value] : flat_gold.items()) {
    if (!flat_now.contains(key)) {
      out.push_back(key + ": missing");
      continue;
    }
    const json& now = flat_now[key];
    if (value.is_number() && now.is_number()) {
      const double g = value.get<double>();
      const double c = now.get<double>();
      if (std::abs(g - c) > tol * std::max(1.0, std::abs(g))) {
        out.push_back(key + ": pinned " + format17(g) + ", got " + format17(c));
      }
    } else if (value != now) {
      out.push_back(key + ": pinned " + value.dump() + ", got " + now.dump());
    }
  }
  return out;
}

}  // namespace

void emit_density_table(const DensityProfile& profile,
                        const ExternalField& field,
                        const std::filesystem::path& path) {
  const PhiGrid& grid = profile.grid();
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    u[i] = potential_on_sphere(profile, PolarAngle(grid[i]));
  }
  std::ostringstream text;
  text << "phi,f,Q,U,weighted_potential\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double q = field.evaluate(PolarAngle(grid[i]));
    text << format17(grid[i]) << ',' << format17(profile.values()[i]) << ','
         << format17(q) << ',' << format17(u[i]) << ','
         << format17(u[i] + q) << '\n';
  }
  write_text(path.string(), text.str());
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"Weighted equilibrium measures on the unit sphere", "capfield"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1, 1);

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "JSON summary path (default stdout)");
    sub->add_option("--pin", o.pin, "write the summary as golden values");
    sub->add_option("--check", o.check, "compare against golden values");
    sub->add_flag("--timings", o.timings, "add wall-clock timings");
  };
  const auto field_opts = [&](CLI::App* sub) {
    sub->add_option("--field", o.field,
                    "zero, point-charge, north-pole, quadratic or tabulated")
        ->check(CLI::IsMember(
            {"zero", "point-charge", "north-pole", "quadratic", "tabulated"}));
    sub->add_option("--q", o.q, "charge");
    sub->add_option("--h", o.h, "charge height");
    sub->add_option("--a", o.a, "quadratic coefficient of x3^2");
    sub->add_option("--b", o.b, "quadratic coefficient of x3");
    sub->add_option("--c", o.c, "quadratic constant");
    sub->add_option("--csv", o.csv, "x3,Q samples for a tabulated field");
  };
  const auto alpha_opt = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--alpha", o.alpha, "cap angle in radians");
    if (required) opt->required();
  };
  const auto grid_opts = [&](CLI::App* sub) {
    sub->add_option("--nodes", o.nodes, "grid size")
        ->check(CLI::Range(2, 100000));
    sub->add_option("--table", o.table, "CSV output path");
    sub->add_flag("--pipeline", o.pipeline,
                  "use the Abel pipeline even when a closed form exists");
  };

  auto* capacity = app.add_subcommand("capacity", "capacity of a south cap");
  alpha_opt(capacity, true);
  common(capacity);
  auto* support = app.add_subcommand("support", "support angle and F_Q");
  field_opts(support);
  common(support);
  auto* density = app.add_subcommand("density", "equilibrium density table");
  field_opts(density);
  alpha_opt(density, false);
  grid_opts(density);
  common(density);
  auto* ffun = app.add_subcommand("ffunctional", "Mhaskar-Saff F-functional");
  field_opts(ffun);
  alpha_opt(ffun, true);
  common(ffun);
  auto* verify = app.add_subcommand("verify", "Gauss variational check");
  field_opts(verify);
  alpha_opt(verify, false);
  grid_opts(verify);
  verify->add_option("--tol", o.tol, "equilibrium tolerance");
  common(verify);
  auto* oracle = app.add_subcommand("oracle", "independent numerical solution");
  field_opts(oracle);
  alpha_opt(oracle, false);
  grid_opts(oracle);
  oracle->add_option("--method", o.method, "nystrom or energy")
      ->check(CLI::IsMember({"nystrom", "energy"}));
  oracle->add_option("--iterations", o.iterations,
                     "projected-gradient iteration cap")
      ->check(CLI::PositiveNumber);
  common(oracle);
  auto* gonchar = app.add_subcommand("gonchar", "Gonchar threshold heights");
  gonchar->add_option("--q", o.q, "charge");
  common(gonchar);

  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "capfield: " << e.what() << '\n';
    return kValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Stage stage{"cli.run"};
  try {
    Runner runner(o, stage);
    json j;
    j["command"] = command;
    json body;
    if (command == "capacity") body = runner.capacity();
    if (command == "support") body = runner.support();
    if (command == "density") body = runner.density();
    if (command == "ffunctional") body = runner.ffunctional();
    if (command == "verify") body = runner.verify();
    if (command == "oracle") body = runner.oracle();
    if (command == "gonchar") body = runner.gonchar();
    j.update(body);
    if (o.timings) j["timings"] = runner.timings();

    stage.name = "cli.write_summary";
    const std::string text = j.dump(2) + "\n";
    if (o.out.empty()) {
      out << text;
    } else {
      write_text(o.out, text);
    }
    if (!o.pin.empty()) {
      json pinned = j;
      pinned.erase("timings");
      write_text(o.pin, pinned.dump(2) + "\n");
    }
    if (!o.check.empty()) {
      std::ifstream f(o.check, std::ios::binary);
      if (!f) throw std::runtime_error("cannot read " + o.check);
      json golden;
      try {
        golden = json::parse(f);
      } catch (const json::exception& e) {
        throw ValidationError(o.check + ": " + e.what());
      }
      const auto diffs = compare(golden, j, tolerance_for(command));
      for (const auto& d : diffs) err << "capfield: check: " << d << '\n';
      if (!diffs.empty()) return kCheckMismatch;
    }
    return kOk;
  } catch (const ConvergenceError& e) {
    err << "capfield: " << stage.name << ": " << e.what()
        << " (best estimate " << format17(e.best_estimate())
        << ", error bound " << format17(e.error_bound()) << ")\n";
    return kNonconvergence;
  } catch (const NonUnimodalError& e) {
    err << "capfield: " << stage.name << ": " << e.what() << '\n';
    return kNonconvergence;
  } catch (const std::exception& e) {
    err << "capfield: " << stage.name << ": " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace capfield::cli
