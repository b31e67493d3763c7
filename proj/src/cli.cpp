#include "gtdesign/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "gtdesign/design_io.hpp"
#include "gtdesign/robustness.hpp"
#include "gtdesign/rounding.hpp"
#include "gtdesign/simulation.hpp"
#include "gtdesign/solver.hpp"

namespace gtdesign::cli {

namespace {

using nlohmann::ordered_json;

/// Reads either a flat JSON object or key=value lines.
class FlatConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool defaults, bool write_description,
                        std::string prefix) const override {
    return CLI::ConfigINI().to_config(app, defaults, write_description, std::move(prefix));
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream ini(text);
      return CLI::ConfigINI().from_config(ini);
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      } else {
        item.inputs.push_back(value.is_string() ? value.get<std::string>() : value.dump());
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

struct Flags {
  std::optional<double> p0, p1, p2, xl, xu;
  std::string criterion = "d";
  int n = 3000;
  long reps = 10000;
  std::uint64_t seed = 1;
  double grid_step = kDefaultGridStep;
  std::string format = "json";
  std::string out;
  unsigned threads = 0;
  std::vector<double> grid_p0, grid_p1, grid_p2;
  std::string design_path;
};

struct Options {
  CLI::Option* criterion = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* format = nullptr;
};

std::string number(double x) { return fmt::format("{}", x); }

std::string optional_number(const std::optional<double>& x) { return x ? number(*x) : "nan"; }

Params theta_from(const Flags& f, const std::optional<Params>& fallback) {
  if (f.p0 || f.p1 || f.p2) {
    if (!(f.p0 && f.p1 && f.p2) && !fallback)
      throw InvalidArgument("--p0, --p1 and --p2 are all required");
    return Params(f.p0 ? *f.p0 : fallback->prevalence(), f.p1 ? *f.p1 : fallback->sensitivity(),
                  f.p2 ? *f.p2 : fallback->specificity());
  }
  if (!fallback) throw InvalidArgument("--p0, --p1 and --p2 are required");
  return *fallback;
}

Bounds bounds_from(const Flags& f, const std::optional<Bounds>& fallback) {
  if (f.xl || f.xu) {
    if (!(f.xl && f.xu) && !fallback) throw InvalidArgument("--xl and --xu are both required");
    return Bounds(f.xl ? *f.xl : fallback->lower(), f.xu ? *f.xu : fallback->upper());
  }
  if (!fallback) throw InvalidArgument("--xl and --xu are required");
  return *fallback;
}

void emit(const Flags& f, const std::string& text, std::ostream& out) {
  if (f.out.empty())
    out << text;
  else
    write_text_file(f.out, text);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::string exact_design_csv(const ExactDesign& d) {
  std::string s = "size,count,weight\n";
  for (Eigen::Index i = 0; i < d.size(); ++i)
    s += fmt::format("{},{},{}\n", d.sizes()(i), d.counts()(i),
                     number(static_cast<double>(d.counts()(i)) / d.total_trials()));
  return s;
}

ordered_json criterion_values(const Design& d, const Params& theta) {
  ordered_json j;
  const Eigen::Matrix3d m = information_matrix(d, theta);
  if (estimability(m).full)
    j["d"] = d_criterion(m);
  else
    j["d"] = nullptr;
  if (estimability(m).prevalence)
    j["ds"] = ds_criterion(d, theta);
  else
    j["ds"] = nullptr;
  return j;
}

void check_format(const Flags& f) {
  if (f.format != "json" && f.format != "csv")
    throw InvalidArgument("--format must be json or csv");
}

int cmd_design(const Flags& f, std::ostream& out) {
  const Params theta = theta_from(f, std::nullopt);
  const Bounds bounds = bounds_from(f, std::nullopt);
  const Criterion criterion = parse_criterion(f.criterion);

  const auto k = derived_constants(theta, bounds);
  const auto root = criterion == Criterion::D ? solve_d_equation(k) : solve_ds_equation(k);
  const Design approx = optimal_design(theta, bounds, criterion);
  const ExactDesign exact = round_design(approx, theta, f.n, criterion);

  if (f.format == "csv") {
    emit(f, exact_design_csv(exact), out);
    return kSuccess;
  }
  DesignDocument doc{theta, bounds, criterion, approx, exact};
  ordered_json j = to_json(doc);
  j["criterion_values"] = criterion_values(approx, theta);
  j["exact_criterion_values"] = criterion_values(exact.to_approximate(), theta);
  j["constants"] = {{"c", k.c},
                    {"delta", k.delta},
                    {"r", k.r},
                    {"delta0", k.delta0},
                    {"root_a", root.a},
                    {"root_residual", root.residual},
                    {"bracket_count", root.bracket_count},
                    {"intermediate_size", size_from_root(root.a, theta, bounds)}};
  emit(f, dump(j), out);
  return kSuccess;
}

DesignDocument load_design(const Flags& f) {
  if (f.design_path.empty()) throw InvalidArgument("a design file is required");
  return read_design_file(f.design_path);
}

int cmd_round(const Flags& f, const Options& o, std::ostream& out) {
  DesignDocument doc = load_design(f);
  if (!doc.approximate) throw InvalidArgument("design file has no approximate design to round");
  doc.theta = theta_from(f, doc.theta);
  doc.bounds = bounds_from(f, doc.bounds);
  if (o.criterion->count() > 0) doc.criterion = parse_criterion(f.criterion);
  doc.exact = round_design(*doc.approximate, doc.theta, f.n, doc.criterion);
  emit(f, f.format == "csv" ? exact_design_csv(*doc.exact) : dump(to_json(doc)), out);
  return kSuccess;
}

int cmd_verify(const Flags& f, const Options& o, std::ostream& out) {
  const DesignDocument doc = load_design(f);
  const Params theta = theta_from(f, doc.theta);
  const Bounds bounds = bounds_from(f, doc.bounds);
  const Criterion criterion = o.criterion->count() > 0 ? parse_criterion(f.criterion) : doc.criterion;
  const Design design = doc.approximate ? *doc.approximate : doc.exact->to_approximate();

  const auto report = verify_optimality(design, theta, bounds, criterion, f.grid_step);
  if (f.format == "csv") {
    std::string s = "size,gap\n";
    for (std::size_t i = 0; i < report.support_sizes.size(); ++i)
      s += number(report.support_sizes[i]) + "," + number(report.support_gaps[i]) + "\n";
    emit(f, s, out);
  } else {
    ordered_json support = ordered_json::array();
    for (std::size_t i = 0; i < report.support_sizes.size(); ++i)
      support.push_back({{"size", report.support_sizes[i]}, {"gap", report.support_gaps[i]}});
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["criterion"] = std::string(to_string(criterion));
    j["grid_step"] = report.grid_step;
    j["max_violation"] = report.max_violation;
    j["argmax_size"] = report.argmax_size;
    j["tolerance"] = kCertificationTolerance;
    j["certified"] = report.certified();
    j["support"] = support;
    emit(f, dump(j), out);
  }
  return report.certified() ? kSuccess : kNotCertified;
}

int cmd_simulate(const Flags& f, const Options& o, std::ostream& out) {
  const DesignDocument doc = load_design(f);
  const Params theta = theta_from(f, doc.theta);
  const Bounds bounds = bounds_from(f, doc.bounds);
  if (f.reps < 1) throw InvalidArgument("--reps must be at least 1");
  ExactDesign exact = doc.exact ? *doc.exact
                                : round_design(*doc.approximate, doc.theta, f.n,
                                               o.criterion->count() > 0
                                                   ? parse_criterion(f.criterion)
                                                   : doc.criterion);

  const MseMatrix mse = simulate_mse(exact, theta, f.reps, f.seed, f.threads);
  const Design reference_d = d_optimal_design(theta, bounds);
  const Design reference_s = ds_optimal_design(theta, bounds);

  // A singular MSE (e.g. a single replication) leaves eff_D undefined; report null.
  std::optional<double> eff_d, eff_s;
  try {
    const auto report = efficiencies_from_mse(mse, theta, bounds);
    eff_d = report.eff_d;
    eff_s = report.eff_s;
  } catch (const EfficiencyUndefined&) {
    if (mse.m(0, 0) > 0) eff_s = std::exp(-ds_criterion(reference_s, theta)) / mse.m(0, 0);
  }

  if (f.format == "csv") {
    emit(f,
         fmt::format("eff_d,eff_s,replications,failures\n{},{},{},{}\n", optional_number(eff_d),
                     optional_number(eff_s), mse.replications, mse.failures),
         out);
    return kSuccess;
  }
  ordered_json matrix = ordered_json::array();
  for (int r = 0; r < 3; ++r) matrix.push_back({mse.m(r, 0), mse.m(r, 1), mse.m(r, 2)});
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["theta"] = to_json(theta);
  j["bounds"] = to_json(bounds);
  j["exact"] = to_json(exact);
  j["reps"] = f.reps;
  j["seed"] = f.seed;
  j["mse"] = {{"matrix", matrix}, {"replications", mse.replications}, {"failures", mse.failures}};
  j["eff_d"] = eff_d ? ordered_json(*eff_d) : ordered_json(nullptr);
  j["eff_s"] = eff_s ? ordered_json(*eff_s) : ordered_json(nullptr);
  j["reference_d"] = to_json(reference_d);
  j["reference_s"] = to_json(reference_s);
  emit(f, dump(j), out);
  return kSuccess;
}

int cmd_sweep(const Flags& f, const Options& o, std::ostream& out) {
  const Params truth = theta_from(f, std::nullopt);
  const Bounds bounds = bounds_from(f, std::nullopt);
  const Criterion criterion = parse_criterion(f.criterion);
  if (f.reps < 0) throw InvalidArgument("--reps must be nonnegative (0 skips simulation)");

  MisspecGrid grid = criterion == Criterion::D ? intermediate_size_grid() : ds_efficiency_grid();
  if (!f.grid_p0.empty()) grid.p0_values = f.grid_p0;
  if (!f.grid_p1.empty()) grid.p1_values = f.grid_p1;
  if (!f.grid_p2.empty()) grid.p2_values = f.grid_p2;

  const auto rows = f.reps == 0
                        ? sweep_designs(grid, bounds, f.n, criterion)
                        : sweep(grid, truth, bounds, f.n, f.reps, f.seed, criterion, f.threads);

  // Sweeps default to CSV; --format json switches to a JSON array.
  if (o.format->count() == 0 || f.format == "csv") {
    std::string s = "p0,p1,p2,x_mid,w1,w2,w3,efficiency\n";
    for (const auto& r : rows) {
      s += fmt::format("{},{},{},{},{},{},{},{}\n", number(r.theta_tilde.prevalence()),
                       number(r.theta_tilde.sensitivity()), number(r.theta_tilde.specificity()),
                       r.intermediate_size, number(r.weights(0)), number(r.weights(1)),
                       number(r.weights(2)), number(r.efficiency));
    }
    emit(f, s, out);
    return kSuccess;
  }
  ordered_json a = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row;
    row["theta_tilde"] = to_json(r.theta_tilde);
    row["x_mid"] = r.intermediate_size;
    row["weights"] = {r.weights(0), r.weights(1), r.weights(2)};
    row["exact"] = to_json(r.design);
    if (std::isnan(r.efficiency))
      row["efficiency"] = nullptr;
    else
      row["efficiency"] = r.efficiency;
    a.push_back(row);
  }
  emit(f, dump(a), out);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal group-testing designs for prevalence estimation with unknown test errors",
               args.empty() ? "gtdesign" : args.front()};
  app.fallthrough();
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<FlatConfig>());
  app.set_config("--config", "", "flat key=value or JSON file mirroring the flags; flags override");

  Flags f;
  Options o;
  app.add_option("--p0", f.p0, "prevalence");
  app.add_option("--p1", f.p1, "sensitivity");
  app.add_option("--p2", f.p2, "specificity");
  app.add_option("--xl", f.xl, "smallest allowed group size");
  app.add_option("--xu", f.xu, "largest allowed group size");
  o.criterion = app.add_option("--criterion", f.criterion, "d or ds")->capture_default_str();
  o.n = app.add_option("--n", f.n, "total number of trials")->capture_default_str();
  app.add_option("--reps", f.reps, "Monte Carlo replications")->capture_default_str();
  app.add_option("--seed", f.seed, "random seed")->capture_default_str();
  app.add_option("--grid-step", f.grid_step, "grid step for verify")->capture_default_str();
  o.format = app.add_option("--format", f.format, "json or csv");
  app.add_option("--out", f.out, "write the document to PATH instead of stdout");
  app.add_option("--threads", f.threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--grid-p0", f.grid_p0, "sweep lattice for p0")->delimiter(',');
  app.add_option("--grid-p1", f.grid_p1, "sweep lattice for p1")->delimiter(',');
  app.add_option("--grid-p2", f.grid_p2, "sweep lattice for p2")->delimiter(',');

  auto* design = app.add_subcommand("design", "construct, round and describe the optimal design");
  auto* round = app.add_subcommand("round", "round the approximate design in a design file");
  auto* verify = app.add_subcommand("verify", "equivalence-theorem check of a design file");
  auto* simulate = app.add_subcommand("simulate", "simulated MSE and efficiencies of a design file");
  auto* sweep_cmd = app.add_subcommand("sweep", "robustness sweep over misspecified parameters");
  for (auto* sub : {round, verify, simulate})
    sub->add_option("design", f.design_path, "design file (JSON)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::FileError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    check_format(f);
    if (f.n < 1) throw InvalidArgument("--n must be positive");
    if (*design) return cmd_design(f, out);
    if (*round) return cmd_round(f, o, out);
    if (*verify) return cmd_verify(f, o, out);
    if (*simulate) return cmd_simulate(f, o, out);
    if (*sweep_cmd) return cmd_sweep(f, o, out);
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << "\n";
    return kSolver;
  }
  return kUsage;
}

}  // namespace gtdesign::cli
