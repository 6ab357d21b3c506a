#include "flexilab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "flexilab/elliptica.hpp"
#include "flexilab/errors.hpp"
#include "flexilab/io.hpp"
#include "json.hpp"

namespace flexilab {

namespace {

using nlohmann::json;

struct Common {
  std::string space = "euclid";
  std::optional<double> from;
  std::optional<double> to;
  int steps = 81;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::string out;
  std::string format = "json";
  std::string expect;
};

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out);
  if (!file) throw ValidationError("cannot write " + c.out);
  file << text;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

void check_common(const Common& c) {
  if (c.steps < 2) throw ValidationError("--steps must be at least 2");
  if (c.tol && !(*c.tol > 0.0)) throw ValidationError("--tol must be positive");
  if (c.format != "json" && c.format != "csv") throw ValidationError("--format must be json or csv");
  if (c.from && c.to && !(*c.from < *c.to)) throw ValidationError("--from must be below --to");
}

std::vector<double> sweep_of(const Common& c, const FlexFamily& f) {
  return FlexFamily::linspace(c.from.value_or(f.lower()), c.to.value_or(f.upper()), c.steps);
}

int verdict_exit(bool ok, std::ostream& err, const std::string& what) {
  if (!ok) err << "verdict mismatch: " << what << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"flexcli: flexible polyhedra, flexion tracking and volume checks"};
  app.require_subcommand(1);
  Common c;
  const auto add_common = [&](CLI::App* sub, bool sweep) {
    sub->add_option("--space", c.space, "euclid | sphere | hyperbolic")->check(CLI::IsMember({"euclid", "sphere", "hyperbolic"}));
    if (sweep) {
      sub->add_option("--from", c.from, "sweep start");
      sub->add_option("--to", c.to, "sweep end");
      sub->add_option("--steps", c.steps, "sweep samples (>= 2)");
    }
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--tol", c.tol, "tolerance override");
    sub->add_option("--out", c.out, "output file (default stdout)");
    sub->add_option("--format", c.format, "json | csv");
  };

  std::string input;
  double u_value = std::numeric_limits<double>::quiet_NaN();
  auto* construct = app.add_subcommand("construct", "evaluate a family spec at one parameter");
  construct->add_option("spec", input, "family spec JSON")->required();
  construct->add_option("--u", u_value, "parameter (default: start of range)");
  add_common(construct, false);

  auto* sweep = app.add_subcommand("sweep", "sample a family over a parameter range");
  sweep->add_option("spec", input, "family spec JSON")->required();
  add_common(sweep, true);

  TrackOptions track_opts;
  bool fixed_step = false;
  auto* track = app.add_subcommand("track", "continue a flex from a seed mesh");
  track->add_option("mesh", input, "mesh JSON with coordinates")->required();
  track->add_option("--max-steps", track_opts.max_steps, "accepted steps");
  track->add_option("--step", track_opts.step, "initial step length");
  track->add_option("--direction", track_opts.direction, "+1 or -1");
  track->add_flag("--fixed-step", fixed_step, "keep the step length fixed");
  add_common(track, false);

  auto* rigidity = app.add_subcommand("rigidity", "Jacobian kernel of a placement");
  rigidity->add_option("mesh", input, "mesh JSON with coordinates")->required();
  rigidity->add_option("--expect", c.expect, "rigid | flexible")->check(CLI::IsMember({"rigid", "flexible"}));
  add_common(rigidity, false);

  auto* verify = app.add_subcommand("verify", "check a claim and report a verdict");
  verify->require_subcommand(1);
  std::string method;
  ReportOptions report_opts;
  auto* bellows = verify->add_subcommand("bellows", "volume constancy along a family");
  bellows->add_option("spec", input, "family spec JSON")->required();
  bellows->add_option("--method", method, "cone-sum | schlafli-delta | monte-carlo");
  bellows->add_option("--samples", report_opts.samples, "Monte Carlo samples per sweep point");
  bellows->add_option("--expect", c.expect, "constant | non-constant")->check(CLI::IsMember({"constant", "non-constant"}));
  add_common(bellows, true);

  double k = std::numeric_limits<double>::quiet_NaN();
  double shift = std::numeric_limits<double>::quiet_NaN();
  auto* biquad = verify->add_subcommand("biquad", "biquadratic relation between half-angle tangents");
  biquad->add_option("spec", input, "family spec JSON (omit to check dn pairs)");
  biquad->add_option("--k", k, "modulus for the dn-pair check");
  biquad->add_option("--shift", shift, "phase shift sigma for the dn-pair check");
  add_common(biquad, true);

  long long samples = 1000000;
  auto* volume = app.add_subcommand("volume", "generalized volume of a placement");
  volume->add_option("mesh", input, "mesh JSON with coordinates")->required();
  volume->add_option("--method", method, "cone-sum | monte-carlo");
  volume->add_option("--samples", samples, "Monte Carlo samples");
  add_common(volume, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    check_common(c);
    if (construct->parsed()) {
      const FlexFamily f = make_family(load_family_spec(input));
      const Polyhedron p = f(std::isnan(u_value) ? f.lower() : u_value);
      emit(c, c.format == "json" ? polyhedron_to_json(p)
                                 : trajectory_to_csv({std::isnan(u_value) ? f.lower() : u_value}, {p}),
           out);
      return 0;
    }
    if (sweep->parsed()) {
      const FamilySpec spec = load_family_spec(input);
      const FlexFamily f = make_family(spec);
      const auto us = sweep_of(c, f);
      std::vector<Polyhedron> samples;
      for (double u : us) samples.push_back(f(u));
      emit(c, c.format == "json" ? trajectory_to_json(spec.kind, us, samples) : trajectory_to_csv(us, samples), out);
      err << "max relative edge deviation " << format_double(max_relative_edge_deviation(samples)) << "\n";
      return 0;
    }
    if (track->parsed()) {
      const MeshInput mesh = load_mesh(input);
      const Polyhedron seed = mesh.polyhedron(space_from_string(c.space, mesh.complex->dim() + 1));
      track_opts.adaptive = !fixed_step;
      if (c.tol) track_opts.corrector_tol = *c.tol;
      if (mesh.involution) {
        const SymmetricFlex flex = track_symmetric_flex(seed, *mesh.involution, track_opts);
        emit(c, c.format == "json" ? path_to_json(flex.reduction->system, *flex.path)
                                   : path_to_csv(flex.reduction->system, *flex.path),
             out);
        return 0;
      }
      const Simplex pin = default_pinned_facet(*seed.complex);
      const ConstraintSystem system =
          build_constraint_system(seed.complex, edge_lengths(seed), seed.space, pin, seed.points(pin));
      const TrackedPath path = track_flex(system, system.variables_from(seed.coords), track_opts);
      emit(c, c.format == "json" ? path_to_json(system, path) : path_to_csv(system, path), out);
      return 0;
    }
    if (rigidity->parsed()) {
      const MeshInput mesh = load_mesh(input);
      const Polyhedron p = mesh.polyhedron(space_from_string(c.space, mesh.complex->dim() + 1));
      const Simplex pin = default_pinned_facet(*p.complex);
      const ConstraintSystem system =
          build_constraint_system(p.complex, mesh.edge_lengths_or_measured(p.space), p.space, pin, p.points(pin));
      const RigidityReport r = rigidity_test(system, system.variables_from(p.coords));
      json j;
      j["kernel_dim"] = r.kernel_dim;
      j["min_singular_value"] = r.min_singular_value;
      j["max_singular_value"] = r.max_singular_value;
      j["variables"] = system.variable_count();
      j["equations"] = system.equation_count();
      j["verdict"] = r.kernel_dim == 0 ? "rigid" : "flexible";
      emit(c, json_text(j), out);
      if (!c.expect.empty()) return verdict_exit(j["verdict"] == c.expect, err, "expected " + c.expect);
      return 0;
    }
    if (bellows->parsed()) {
      const FlexFamily f = make_family(load_family_spec(input));
      const Polyhedron first = f(f.lower());
      VolumeMethod m = first.space.is_euclidean() ? VolumeMethod::ConeSum : VolumeMethod::MonteCarlo;
      if (!method.empty()) m = volume_method_from_string(method);
      report_opts.seed = c.seed;
      if (c.tol) report_opts.tolerance = *c.tol;
      const VolumeReport report = bellows_report(f, sweep_of(c, f), m, report_opts);
      emit(c, c.format == "json" ? report_to_json(report) : report_to_csv(report), out);
      const std::string expected = c.expect.empty() ? "constant" : c.expect;
      const std::string got = report.constant ? "constant" : "non-constant";
      return verdict_exit(expected == got, err, "expected " + expected + ", got " + got);
    }
    if (biquad->parsed()) {
      json j;
      bool pass = true;
      if (input.empty()) {
        if (std::isnan(k) || std::isnan(shift)) throw ValidationError("give a spec or both --k and --shift");
        const BiquadraticRelation rel = biquad_coefficients(shift, k);
        const double quarter = quarter_period(k);
        double worst = 0.0;
        for (double u : FlexFamily::linspace(-4.0 * quarter, 4.0 * quarter, std::max(c.steps, 2001))) {
          worst = std::max(worst, std::abs(rel.evaluate(jacobi(u, k).dn, jacobi(u - shift, k).dn)));
        }
        const double tol = c.tol.value_or(1e-11);
        pass = worst < tol;
        j["coefficients"] = {rel.a, rel.b, rel.c, rel.d, rel.e};
        j["max_residual"] = worst;
        j["tolerance"] = tol;
      } else {
        const FlexFamily f = make_family(load_family_spec(input));
        const int n = f.complex()->dim() + 1;
        const TangentProfile profile = tangent_profile(f, cross_polytope_a_ridges(n), sweep_of(c, f));
        const double tol = c.tol.value_or(1e-8);
        json pairs = json::array();
        double worst = 0.0;
        for (int a = 0; a < n; ++a) {
          for (int b = a + 1; b < n; ++b) {
            std::vector<double> t;
            std::vector<double> tp;
            for (size_t s = 0; s < profile.sweep.size(); ++s) {
              if (!profile.valid[s]) continue;
              t.push_back(profile.values(static_cast<Eigen::Index>(s), a));
              tp.push_back(profile.values(static_cast<Eigen::Index>(s), b));
            }
            const BiquadraticFit fit = fit_biquadratic(t, tp);
            worst = std::max(worst, fit.residual);
            const auto& r = fit.relation;
            pairs.push_back({{"ridges", {a + 1, b + 1}}, {"coefficients", {r.a, r.b, r.c, r.d, r.e}},
                             {"residual", fit.residual}});
          }
        }
        pass = worst < tol;
        j["pairs"] = pairs;
        j["max_residual"] = worst;
        j["tolerance"] = tol;
      }
      j["verdict"] = pass ? "pass" : "fail";
      emit(c, json_text(j), out);
      return verdict_exit(pass, err, "biquadratic residual above tolerance");
    }
    if (volume->parsed()) {
      const MeshInput mesh = load_mesh(input);
      const Polyhedron p = mesh.polyhedron(space_from_string(c.space, mesh.complex->dim() + 1));
      json j;
      const std::string m = method.empty() ? (p.space.is_euclidean() ? "cone-sum" : "monte-carlo") : method;
      if (volume_method_from_string(m) == VolumeMethod::ConeSum) {
        j["volume"] = generalized_volume_euclidean(p);
      } else if (volume_method_from_string(m) == VolumeMethod::MonteCarlo) {
        const MonteCarloEstimate e = monte_carlo_volume(p, samples, c.seed);
        j["volume"] = e.estimate;
        j["std_error"] = e.std_error;
        j["samples"] = e.samples;
      } else {
        throw ValidationError("volume supports cone-sum and monte-carlo");
      }
      j["method"] = m;
      emit(c, json_text(j), out);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace flexilab
