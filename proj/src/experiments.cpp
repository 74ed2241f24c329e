#include "nsa/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsa/checks.hpp"
#include "nsa/discretize.hpp"
#include "nsa/errors.hpp"
#include "nsa/model.hpp"
#include "nsa/potential.hpp"
#include "nsa/rng.hpp"
#include "nsa/semigroup.hpp"
#include "nsa/spectral.hpp"

namespace nsa::cli {
namespace {

using nlohmann::json;

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

// Everything an experiment hands back to the report writer. CSV cells
// are preformatted strings so numeric formatting stays in one place.
struct Outcome {
  json results = json::object();
  std::vector<Check> checks;
  std::vector<std::string> csv_names;
  std::vector<std::string> csv_texts;
};

std::string num(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_table(const std::string& header, const std::vector<std::vector<std::string>>& rows) {
  std::string text = header + "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + row[i];
    text += "\n";
  }
  return text;
}

/// Quadratic model at the first declared minimum: magnetic Jacobian b
/// plus the Hessian of V there. Unlike verify_minima this does not
/// insist on Re V''>= 0 away from the point, so purely imaginary wells
/// still get their lattice.
model::QuadraticModel quadratic_at_minimum(const potential::PotentialSpec& spec) {
  Vec x0 = spec.declared_minima.empty() ? Vec::Zero(spec.dim).eval() : spec.declared_minima[0];
  auto ev = potential::evaluate(spec, x0);
  try {
    return model::QuadraticModel(spec.b, ev.hess_v);
  } catch (const Error& err) {
    throw ConfigError(std::string("potential has no usable quadratic model at its minimum: ") +
                      err.what());
  }
}

std::vector<Cplx> lattice_values(const model::QuadraticModel& qm, double bound) {
  std::vector<Cplx> mus;
  for (const auto& me : model::model_spectrum(qm, bound)) mus.push_back(me.value);
  return mus;
}

std::string join_index(const std::vector<int>& index) {
  std::string out;
  for (size_t i = 0; i < index.size(); ++i) out += (i ? ";" : "") + std::to_string(index[i]);
  return out;
}

Outcome run_model_spectrum(const RunConfig& config) {
  Outcome outcome;
  auto qm = quadratic_at_minimum(*config.spec);
  std::vector<model::ModelEigenvalue> lattice;
  try {
    lattice = model::model_spectrum(qm, config.window.search_bound);
  } catch (const EmptyWindow&) {
    throw ConfigError("window.C leaves the spectral window empty; raise it");
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& me : lattice)
    rows.push_back({num(me.value.real()), num(me.value.imag()), join_index(me.index),
                    std::to_string(me.multiplicity)});
  outcome.csv_names.push_back("model_spectrum.csv");
  outcome.csv_texts.push_back(csv_table("re_mu,im_mu,nu,multiplicity", rows));

  auto [mu0, tau0] = model::spectral_gap(qm);
  outcome.results["mu0"] = {mu0.real(), mu0.imag()};
  outcome.results["gap"] = tau0;
  outcome.results["sector_angle"] = model::sector_angle(qm);
  outcome.results["count"] = lattice.size();
  outcome.checks.push_back({"lattice points found below the bound", !lattice.empty(),
                            std::to_string(lattice.size()) + " points"});
  return outcome;
}

Outcome run_check_potential(const RunConfig& config) {
  Outcome outcome;
  const auto& spec = *config.spec;
  std::string minima_note = std::to_string(spec.declared_minima.size()) + " verified";
  bool minima_ok = true;
  try {
    potential::verify_minima(spec, spec.declared_minima);
  } catch (const Error& err) {
    minima_ok = false;
    minima_note = err.what();
  }
  outcome.checks.push_back({"declared minima are isolated nondegenerate zeros", minima_ok,
                            minima_note});

  auto report = potential::check_assumptions(spec, 10.0, 2000, {0.5, 1.0, 2.0, 4.0, 8.0, 16.0});
  std::vector<std::vector<std::string>> rows;
  for (const auto& record : report.records) {
    rows.push_back({record.id, record.pass ? "1" : "0", num(record.margin),
                    num(record.constant)});
    outcome.checks.push_back({"hypothesis " + record.id, record.pass, record.note});
  }
  outcome.csv_names.push_back("assumptions.csv");
  outcome.csv_texts.push_back(csv_table("id,pass,margin,constant", rows));

  auto gen = rng::stream(config.seed, "order");
  auto order = potential::check_order_property(spec, 0.5, 20000, gen);
  outcome.results["order_worst_constant"] = order.worst_constant;
  outcome.results["order_grad_ratio_sup"] = order.grad_ratio_sup;
  return outcome;
}

Outcome run_eigs(const RunConfig& config) {
  Outcome outcome;
  discretize::Grid grid(config.spec->dim, config.grid->half_width, config.grid->points);
  auto mus = lattice_values(quadratic_at_minimum(*config.spec), config.window.search_bound);
  std::vector<std::vector<std::string>> rows;
  for (double h : config.h_values) {
    auto op = discretize::assemble(*config.spec, grid, h);
    auto pairs = spectral::eigs_in_disc(op, config.window.search_bound);
    for (const auto& pair : pairs) {
      Cplx scaled = pair.lambda / h;
      Cplx paired = mus.empty() ? Cplx(0, 0) : mus[0];
      for (Cplx mu : mus)
        if (std::abs(scaled - mu) < std::abs(scaled - paired)) paired = mu;
      rows.push_back({num(h), num(pair.lambda.real()), num(pair.lambda.imag()),
                      num(pair.residual), num(paired.real()), num(paired.imag())});
    }
    outcome.checks.push_back({"eigenvalues found at h=" + num(h), !pairs.empty(),
                              std::to_string(pairs.size()) + " inside the disc"});
  }
  outcome.csv_names.push_back("eigs.csv");
  outcome.csv_texts.push_back(
      csv_table("h,re_lambda,im_lambda,residual,paired_re_mu,paired_im_mu", rows));
  outcome.results["rows"] = rows.size();
  return outcome;
}

Outcome run_resolvent_map(const RunConfig& config) {
  Outcome outcome;
  discretize::Grid grid(config.spec->dim, config.grid->half_width, config.grid->points);
  auto mus = lattice_values(quadratic_at_minimum(*config.spec), config.window.search_bound);
  double a = config.window.reference_a;
  for (Cplx mu : mus)
    if (std::abs(a - mu.real()) <= 0.05)
      throw ConfigError("window.a is within 0.05 of a lattice real part; the line sweep "
                        "would track a pole");

  std::vector<std::vector<std::string>> rows;
  std::vector<double> line_sups, axis_products;
  const int samples = 11;
  for (double h : config.h_values) {
    auto op = discretize::assemble(*config.spec, grid, h);
    double sup = 0.0;
    for (int k = 0; k < samples; ++k) {
      double s = config.window.line_half_width * h *
                 (samples == 1 ? 0.0 : -1.0 + 2.0 * double(k) / double(samples - 1));
      Cplx z(a * h, s);
      double norm = spectral::resolvent_norm(op, z).norm;
      sup = std::max(sup, h * norm);
      rows.push_back({num(h), num(z.real()), num(z.imag()), num(norm), num(h * norm)});
    }
    line_sups.push_back(sup);
    for (const auto& row : spectral::parabolic_probe(
             op, {std::max(1.0, 10.0 * h), std::max(2.0, 10.0 * h), std::max(4.0, 10.0 * h)},
             10.0)) {
      axis_products.push_back(row.compensated);
      rows.push_back({num(h), "0", num(row.s), num(row.norm), num(row.compensated)});
    }
  }
  outcome.csv_names.push_back("resolvent_map.csv");
  outcome.csv_texts.push_back(csv_table("h,re_z,im_z,norm,compensated", rows));

  double lo = *std::min_element(line_sups.begin(), line_sups.end());
  double hi = *std::max_element(line_sups.begin(), line_sups.end());
  outcome.results["line_sup_min"] = lo;
  outcome.results["line_sup_max"] = hi;
  if (config.h_values.size() > 1)
    outcome.checks.push_back({"gap-line sup of h*norm varies by < 2x across h", hi / lo < 2.0,
                              "ratio " + num(hi / lo)});
  std::vector<double> sorted = axis_products;
  std::sort(sorted.begin(), sorted.end());
  double median = sorted[sorted.size() / 2];
  double worst = std::max(sorted.back() / median, median / sorted.front());
  outcome.results["axis_median"] = median;
  outcome.checks.push_back({"imaginary-axis compensated products within 3x of median",
                            worst < 3.0, "spread " + num(worst) + "x"});
  return outcome;
}

Outcome run_semigroup_decay(const RunConfig& config) {
  Outcome outcome;
  discretize::Grid grid(config.spec->dim, config.grid->half_width, config.grid->points);
  double a = config.window.reference_a;
  auto gen = rng::stream(config.seed, "remainder");
  auto times = semigroup::default_time_grid();
  std::vector<std::vector<std::string>> rows;
  for (double h : config.h_values) {
    auto op = discretize::assemble(*config.spec, grid, h);
    auto pairs = spectral::eigs_in_disc(op, config.window.search_bound);
    std::vector<Cplx> spectrum;
    for (const auto& pair : pairs) spectrum.push_back(pair.lambda);
    std::vector<Cplx> kept;
    std::vector<std::shared_ptr<const spectral::SpectralProjection>> projections;
    for (const auto& pair : pairs) {
      if (pair.lambda.real() >= a * h) continue;
      auto diag = spectral::spectral_projection(op, pair.lambda,
                                                config.contour.radius_factor * h,
                                                config.contour.nodes, spectrum);
      kept.push_back(pair.lambda);
      projections.push_back(diag.action);
    }
    if (kept.empty())
      throw ConfigError("no eigenvalue lies below the reference line Re lambda < a*h");

    std::vector<double> remainders;
    if (op.matrix.rows() <= 2000) {
      semigroup::DensePropagator prop(op, times);
      std::vector<CMat> pmats;
      for (const auto& projection : projections)
        pmats.push_back(semigroup::projection_matrix(*projection));
      for (double t : times)
        remainders.push_back(semigroup::remainder_norm(prop, t, h, kept, pmats, gen));
    } else {
      for (double t : times)
        remainders.push_back(semigroup::remainder_norm(op, t, kept, projections, gen));
    }
    auto series = semigroup::decay_rate_fit(times, remainders, a);
    for (size_t i = 0; i < times.size(); ++i)
      rows.push_back({num(h), num(times[i]), num(remainders[i]), num(series.fitted_rate),
                      num(a)});
    outcome.checks.push_back({"fitted decay rate >= a - 0.1 at h=" + num(h),
                              series.fitted_rate >= a - 0.1,
                              "rate " + num(series.fitted_rate) + " vs a " + num(a)});
    outcome.results["fitted_rate_h=" + num(h)] = series.fitted_rate;
    outcome.results["kept_eigenvalues_h=" + num(h)] = kept.size();
  }
  outcome.csv_names.push_back("semigroup_decay.csv");
  outcome.csv_texts.push_back(csv_table("h,t,remainder,fitted_rate,a", rows));
  return outcome;
}

// RFC 4180 quoting for fields that would split the row
std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

Outcome run_verify_all() {
  Outcome outcome;
  std::vector<std::vector<std::string>> rows;
  for (const auto& result : checks::run_all()) {
    outcome.checks.push_back({"criterion " + std::to_string(result.id) + ": " + result.name,
                              result.pass, result.detail});
    rows.push_back({std::to_string(result.id), csv_field(result.name), result.pass ? "1" : "0"});
  }
  outcome.csv_names.push_back("criteria.csv");
  outcome.csv_texts.push_back(csv_table("id,name,pass", rows));
  return outcome;
}

}  // namespace

int run_experiment(const RunConfig& config) {
  if (!config.spec && config.experiment != "verify-all")
    throw ConfigError("config carries no potential");
  Outcome outcome;
  if (config.experiment == "model-spectrum") outcome = run_model_spectrum(config);
  else if (config.experiment == "check-potential") outcome = run_check_potential(config);
  else if (config.experiment == "eigs") outcome = run_eigs(config);
  else if (config.experiment == "resolvent-map") outcome = run_resolvent_map(config);
  else if (config.experiment == "semigroup-decay") outcome = run_semigroup_decay(config);
  else if (config.experiment == "verify-all") outcome = run_verify_all();
  else throw ConfigError("unknown experiment " + config.experiment);

  std::error_code fs_error;
  std::filesystem::create_directories(config.output_dir, fs_error);
  if (fs_error) throw ConfigError("cannot create output directory " + config.output_dir);

  bool all_pass = true;
  json checks_json = json::array();
  for (const auto& check : outcome.checks) {
    all_pass = all_pass && check.pass;
    checks_json.push_back({{"name", check.name}, {"pass", check.pass}, {"detail", check.detail}});
    std::printf("[%s] %s (%s)\n", check.pass ? "PASS" : "FAIL", check.name.c_str(),
                check.detail.c_str());
  }

  json report;
  report["config"] = json::parse(resolved_config_json(config));
  report["results"] = outcome.results;
  report["checks"] = checks_json;
  report["pass"] = all_pass;
  report["outputs"] = outcome.csv_names;

  auto write_file = [&](const std::string& name, const std::string& text) {
    std::ofstream out(std::filesystem::path(config.output_dir) / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + name + " in " + config.output_dir);
    out << text;
  };
  for (size_t i = 0; i < outcome.csv_names.size(); ++i)
    write_file(outcome.csv_names[i], outcome.csv_texts[i]);
  write_file("report.json", report.dump(2) + "\n");
  std::printf("report written to %s\n",
              (std::filesystem::path(config.output_dir) / "report.json").c_str());
  return all_pass ? 0 : 1;
}

}  // namespace nsa::cli
