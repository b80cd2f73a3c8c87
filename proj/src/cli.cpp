#include "efgeo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "efgeo/errors.hpp"
#include "efgeo/geometry.hpp"
#include "efgeo/identity.hpp"
#include "efgeo/model.hpp"
#include "efgeo/propagator.hpp"
#include "format.hpp"

namespace efgeo::cli {

namespace {

using nlohmann::json;

constexpr Command kCommands[] = {Command::verify_identity, Command::verify_tensors, Command::emit_figure,
                                 Command::propagate};

json model_and_grid() {
  return {{"eta", 0.1},  {"mass", 10.0},  {"gamma", 40.0}, {"inertia", nullptr},
          {"x_min", -4.0}, {"x_max", 6.0}, {"n", 4096}};
}

double number(const json& cfg, const char* key) {
  const json& v = cfg.at(key);
  if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(std::string(key) + " must be finite");
  return x;
}

std::size_t count(const json& cfg, const char* key) {
  const json& v = cfg.at(key);
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::size_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x == std::floor(x) && x < 1e15) return static_cast<std::size_t>(x);
  }
  throw ConfigError(std::string(key) + " must be a non-negative integer");
}

bool flag(const json& cfg, const char* key) {
  const json& v = cfg.at(key);
  if (!v.is_boolean()) throw ConfigError(std::string(key) + " must be true or false");
  return v.get<bool>();
}

std::string text(const json& cfg, const char* key) {
  const json& v = cfg.at(key);
  if (!v.is_string()) throw ConfigError(std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& cfg, const char* key) {
  const json& v = cfg.at(key);
  if (!v.is_array()) throw ConfigError(std::string(key) + " must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) throw ConfigError(std::string(key) + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

model::ModelParams model_params(const json& cfg) {
  model::ModelParams p;
  p.eta = number(cfg, "eta");
  p.mass = number(cfg, "mass");
  p.gamma = number(cfg, "gamma");
  p.inertia = cfg.at("inertia").is_null() ? 1.0 / p.mass : number(cfg, "inertia");
  p.validate();
  return p;
}

Grid1D grid(const json& cfg) { return Grid1D(number(cfg, "x_min"), number(cfg, "x_max"), count(cfg, "n")); }

std::vector<double> sample_times(double t0, double t1, std::size_t samples) {
  if (samples < 1) throw ConfigError("samples must be at least 1");
  if (t1 < t0) throw ConfigError("t_end must not precede t_start");
  std::vector<double> t(samples, t0);
  for (std::size_t k = 1; k < samples; ++k)
    t[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(samples - 1);
  return t;
}

std::ofstream open(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

void write_json(const std::filesystem::path& path, const json& j) { open(path) << j.dump(2) << '\n'; }

int run_identity(const json& cfg, const std::filesystem::path& out) {
  const model::ModelParams p = model_params(cfg);
  const Grid1D g = grid(cfg);
  identity::VerifyOptions opts;
  opts.t_start = number(cfg, "t_start");
  opts.t_end = number(cfg, "t_end");
  opts.samples = count(cfg, "samples");
  opts.dt = number(cfg, "dt");
  opts.tolerance = number(cfg, "tolerance");
  const char* flips[] = {"flip_T1", "flip_T2", "flip_T3", "flip_T4"};
  for (std::size_t k = 0; k < 4; ++k)
    if (flag(cfg, flips[k])) opts.mutation.sign[k] = -1.0;
  opts.mutation.drop_T1_weight = flag(cfg, "drop_T1_weight");

  bool pass = false;
  identity::IdentityReport base;
  if (flag(cfg, "refine")) {
    const identity::Adjudication adj = identity::adjudicate(p, g, opts, number(cfg, "min_reduction"));
    write_json(out / "report.json", identity::to_json(adj));
    base = adj.base;
    pass = adj.converges;
  } else {
    base = identity::evaluate(p, g, opts);
    write_json(out / "report.json", identity::to_json(base));
    pass = base.pass;
  }
  auto csv = open(out / "series.csv");
  identity::write_csv(csv, base);
  std::cerr << "identity: reading " << identity::name(base.winner) << " relative residual "
            << detail::g17(base.relative_of(base.winner)) << (pass ? " pass" : " FAIL") << '\n';
  return pass ? kPass : kFail;
}

int run_tensors(const json& cfg, const std::filesystem::path& out) {
  geometry::SuiteOptions opts;
  opts.reference_points = count(cfg, "reference_points");
  opts.refinement.clear();
  const json& levels = cfg.at("refinement");
  if (!levels.is_array() || levels.size() < 2) throw ConfigError("refinement must list at least two grid sizes");
  for (const json& n : levels) {
    if (!n.is_number_integer() || n.get<long long>() < 0)
      throw ConfigError("refinement entries must be non-negative integers");
    opts.refinement.push_back(n.get<std::size_t>());
  }
  opts.tolerance = number(cfg, "tolerance");
  opts.min_order = number(cfg, "min_order");
  opts.exact_floor = number(cfg, "exact_floor");
  const std::string stencil = text(cfg, "stencil");
  if (stencil == "richardson")
    opts.stencil = geometry::Stencil::richardson;
  else if (stencil == "fourth_order")
    opts.stencil = geometry::Stencil::fourth_order;
  else
    throw ConfigError("stencil must be richardson or fourth_order");

  // Recipes by built-in name or inline object; null selects every built-in.
  const std::vector<geometry::FamilyRecipe> builtin = geometry::default_recipes();
  std::vector<geometry::FamilyRecipe> recipes;
  const json& sel = cfg.at("recipes");
  if (sel.is_null()) {
    recipes = builtin;
  } else if (sel.is_array()) {
    for (const json& r : sel) {
      if (r.is_string()) {
        auto it = std::find_if(builtin.begin(), builtin.end(),
                               [&](const geometry::FamilyRecipe& b) { return b.name == r.get<std::string>(); });
        if (it == builtin.end()) throw ConfigError("unknown built-in recipe " + r.get<std::string>());
        recipes.push_back(*it);
      } else {
        recipes.push_back(geometry::parse_recipe(r));
      }
    }
  } else {
    throw ConfigError("recipes must be null or an array");
  }
  if (recipes.empty()) throw ConfigError("no recipes selected");

  json report = {{"recipes", json::array()}};
  bool pass = true;
  for (const auto& r : recipes) {
    const geometry::RecipeReport rep = geometry::run_recipe(r, opts);
    report["recipes"].push_back(geometry::to_json(rep));
    pass = pass && rep.pass;
    std::cerr << "tensors: " << r.name << (rep.pass ? " pass" : " FAIL") << '\n';
  }
  report["pass"] = pass;
  write_json(out / "report.json", report);
  return pass ? kPass : kFail;
}

int run_figure(const json& cfg, const std::filesystem::path& out) {
  const model::ModelParams p = model_params(cfg);
  const Grid1D g = grid(cfg);
  std::vector<double> t = sample_times(number(cfg, "t_start"), number(cfg, "t_end"), count(cfg, "samples"));
  for (double e : numbers(cfg, "extra_times")) t.push_back(e);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());

  const std::vector<double> t_geo = identity::t_geo_series(p, g, t);
  auto csv = open(out / "figure.csv");
  csv << "t,xbar,sigma,T_geo\n";
  double min_t_geo = t_geo.empty() ? 0.0 : t_geo.front();
  for (std::size_t k = 0; k < t.size(); ++k) {
    using detail::g17;
    csv << g17(t[k]) << ',' << g17(model::mean_position(t[k], p)) << ',' << g17(model::width(t[k], p)) << ','
        << g17(t_geo[k]) << '\n';
    min_t_geo = std::min(min_t_geo, t_geo[k]);
  }
  write_json(out / "report.json", {{"rows", t.size()}, {"columns", {"t", "xbar", "sigma", "T_geo"}},
                                   {"min_T_geo", min_t_geo}});
  return kPass;
}

int run_propagate(const json& cfg, const std::filesystem::path& out) {
  const model::ModelParams p = model_params(cfg);
  const Grid1D g = grid(cfg);
  propagator::PropagatorConfig pc;
  pc.dt = number(cfg, "dt");
  pc.t_end = number(cfg, "t_end");
  pc.samples = count(cfg, "samples");
  pc.max_dt = number(cfg, "max_dt");
  const std::string update = text(cfg, "h_update");
  if (update == "per_step")
    pc.h_update = propagator::HUpdate::per_step;
  else if (update == "per_half_step")
    pc.h_update = propagator::HUpdate::per_half_step;
  else
    throw ConfigError("h_update must be per_step or per_half_step");
  const double l2_tolerance = number(cfg, "l2_tolerance");
  const std::vector<double> order_dts = numbers(cfg, "order_dts");
  pc.validate();
  for (double dt : order_dts) {
    propagator::PropagatorConfig c = pc;
    c.dt = dt;
    c.validate();
  }

  propagator::SnapshotHook hook;
  std::size_t snap = 0;
  if (flag(cfg, "snapshots")) {
    std::filesystem::create_directories(out / "snapshots");
    hook = [&](double, const TwoComponentWavefunction& psi) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%04zu.csv", snap++);
      auto f = open(out / "snapshots" / name);
      propagator::write_snapshot_csv(f, psi);
    };
  }
  const propagator::PropagationResult r = propagator::propagate(p, g, pc, hook);
  json report = propagator::to_json(r);
  const double final_error = r.samples.empty() ? 0.0 : r.samples.back().l2_error;
  report["final_l2_error"] = final_error;
  report["l2_tolerance"] = l2_tolerance;
  if (!order_dts.empty()) report["order_study"] = propagator::to_json(propagator::convergence_order(p, g, pc, order_dts));
  const bool pass = final_error <= l2_tolerance;
  report["pass"] = pass;
  write_json(out / "report.json", report);
  auto csv = open(out / "series.csv");
  propagator::write_csv(csv, r);
  std::cerr << "propagate: final L2 error " << detail::g17(final_error) << (pass ? " pass" : " FAIL") << '\n';
  return pass ? kPass : kFail;
}

bool known_anywhere(const std::string& key) {
  for (Command c : kCommands)
    if (default_config(c).contains(key)) return true;
  return false;
}

json parse_override(const std::string& value) {
  json j = json::parse(value, nullptr, false);
  return j.is_discarded() ? json(value) : j;
}

}  // namespace

Command parse_command(std::string_view s) {
  for (Command c : kCommands)
    if (s == name(c)) return c;
  throw ConfigError("unknown subcommand " + std::string(s));
}

const char* name(Command c) {
  switch (c) {
    case Command::verify_identity: return "verify-identity";
    case Command::verify_tensors: return "verify-tensors";
    case Command::emit_figure: return "emit-figure";
    case Command::propagate: return "propagate";
  }
  return "?";
}

json default_config(Command c) {
  json j;
  switch (c) {
    case Command::verify_identity:
      j = model_and_grid();
      j.update({{"t_start", 0.0}, {"t_end", 10.0}, {"samples", 101}, {"dt", 1e-4}, {"tolerance", 1e-3},
                {"flip_T1", false}, {"flip_T2", false}, {"flip_T3", false}, {"flip_T4", false},
                {"drop_T1_weight", false}, {"refine", false}, {"min_reduction", 8.0}});
      break;
    case Command::verify_tensors:
      j = {{"reference_points", 64}, {"refinement", {32, 64, 128, 256}}, {"tolerance", 1e-6},
           {"min_order", 3.5},       {"exact_floor", 1e-10},             {"stencil", "richardson"},
           {"recipes", nullptr}};
      break;
    case Command::emit_figure:
      j = model_and_grid();
      j.update({{"t_start", 0.0}, {"t_end", 10.0}, {"samples", 201}, {"extra_times", json::array()}});
      break;
    case Command::propagate:
      j = model_and_grid();
      j.update({{"dt", 1e-4}, {"t_end", 2.0}, {"samples", 11}, {"h_update", "per_step"}, {"max_dt", 1e-3},
                {"l2_tolerance", 1e-3}, {"order_dts", json::array()}, {"snapshots", false}});
      break;
  }
  return j;
}

std::vector<std::string> keys(Command c) {
  std::vector<std::string> out;
  const json d = default_config(c);
  for (const auto& [k, v] : d.items()) out.push_back(k);
  return out;
}

json resolve_config(Command c, const json& file, const std::vector<std::pair<std::string, std::string>>& overrides) {
  json cfg = default_config(c);
  if (!file.is_null()) {
    if (!file.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : file.items()) {
      if (cfg.contains(k))
        cfg[k] = v;
      else if (!known_anywhere(k))
        throw ConfigError("unknown config key " + k);
    }
  }
  for (const auto& [k, v] : overrides) {
    if (!cfg.contains(k)) throw ConfigError("key " + k + " does not apply to " + name(c));
    cfg[k] = parse_override(v);
  }
  return cfg;
}

int execute(Command c, const json& cfg, const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) throw ConfigError("cannot create output directory " + out.string());
  write_json(out / "manifest.json", {{"command", name(c)}, {"config", cfg}});
  try {
    switch (c) {
      case Command::verify_identity: return run_identity(cfg, out);
      case Command::verify_tensors: return run_tensors(cfg, out);
      case Command::emit_figure: return run_figure(cfg, out);
      case Command::propagate: return run_propagate(cfg, out);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return kUsage;
}

int run(int argc, char** argv) {
  CLI::App app{"Exact-factorization geometry verification"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "efgeo_out";
  // Storage for per-key overrides, one map per subcommand.
  std::map<Command, std::map<std::string, std::string>> values;
  std::map<Command, CLI::App*> subs;
  for (Command c : kCommands) {
    CLI::App* sub = app.add_subcommand(name(c));
    sub->add_option("--config", config_path, "JSON config file with flat keys");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    auto& store = values[c];
    const json d = default_config(c);
    for (const auto& [k, v] : d.items())
      sub->add_option("--" + k, store[k], "default " + v.dump());
    subs[c] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  Command cmd = Command::verify_identity;
  for (Command c : kCommands)
    if (subs[c]->parsed()) cmd = c;

  try {
    json file;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read config file " + config_path);
      file = json::parse(f, nullptr, false);
      if (file.is_discarded()) throw ConfigError("config file " + config_path + " is not valid JSON");
    }
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& [k, v] : values[cmd])
      if (subs[cmd]->count("--" + k) > 0) overrides.emplace_back(k, v);
    return execute(cmd, resolve_config(cmd, file, overrides), out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const GridError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const RecipeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const AccuracyGuard& e) {
    std::cerr << "accuracy guard: " << e.what() << '\n';
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
}

}  // namespace efgeo::cli
