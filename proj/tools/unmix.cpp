// SPDX-License-Identifier: Apache-2.0
// unmix: command-line front end over the lrntf C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lrntf/lrntf.h"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kIo = 3, kSolver = 4 };

int exit_code(lrntf_status s) {
  switch (s) {
    case LRNTF_OK: return kOk;
    case LRNTF_ERR_CONFIG:
    case LRNTF_ERR_PARSE:
    case LRNTF_ERR_VALIDATION: return kConfig;
    case LRNTF_ERR_IO: return kIo;
    case LRNTF_ERR_SOLVER: return kSolver;
    default: return kOther;
  }
}

struct Failure {
  lrntf_status status;
  std::string message;
};

void check(lrntf_status s) {
  if (s != LRNTF_OK) throw Failure{s, lrntf_last_error()};
}

struct CubeDel {
  void operator()(lrntf_cube *c) const { lrntf_cube_free(c); }
};
struct EmDel {
  void operator()(lrntf_endmembers *e) const { lrntf_endmembers_free(e); }
};
struct SceneDel {
  void operator()(lrntf_scene *s) const { lrntf_scene_free(s); }
};
struct ResultDel {
  void operator()(lrntf_result *r) const { lrntf_result_free(r); }
};
struct ProfileDel {
  void operator()(lrntf_rank_profile *p) const { lrntf_rank_profile_free(p); }
};
using Cube = std::unique_ptr<lrntf_cube, CubeDel>;
using Ems = std::unique_ptr<lrntf_endmembers, EmDel>;

Cube read_cube(const std::string &path) {
  lrntf_cube *c = nullptr;
  check(lrntf_cube_read(path.c_str(), &c));
  return Cube(c);
}

void write_cube(const lrntf_cube *c, const fs::path &path) { check(lrntf_cube_write(c, path.string().c_str())); }

void make_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{LRNTF_ERR_IO, "cannot create directory '" + dir.string() + "': " + ec.message()};
}

void need_file(const std::string &path, const char *what) {
  if (!fs::exists(path)) throw Failure{LRNTF_ERR_CONFIG, std::string(what) + " '" + path + "' does not exist"};
}

std::string presets_help() {
  size_t width = 0;
  for (size_t i = 0; i < lrntf_preset_count(); ++i) width = std::max(width, std::strlen(lrntf_preset_name(i)));
  std::string out = "Presets:\n";
  for (size_t i = 0; i < lrntf_preset_count(); ++i) {
    std::string name = lrntf_preset_name(i);
    name.resize(width, ' ');
    out += "  " + name + "  " + lrntf_preset_description(i) + "\n";
  }
  return out;
}

json preset_json(const std::string &name) {
  char *s = nullptr;
  check(lrntf_preset_config(name.c_str(), &s));
  json j = json::parse(s);
  lrntf_string_free(s);
  return j;
}

double parse_snr(const std::string &s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  try {
    return std::stod(s);
  } catch (const std::exception &) {
    throw Failure{LRNTF_ERR_CONFIG, "--snr: expected a number or 'inf', got '" + s + "'"};
  }
}

struct SolverFlags {
  std::optional<double> lambda1, lambda2, mu, tol;
  std::optional<int> max_iter;
  std::optional<std::string> projection, schedule;

  void add(CLI::App *app) {
    app->add_option("--lambda1", lambda1, "nuclear-norm weight on abundance maps");
    app->add_option("--lambda2", lambda2, "nuclear-norm weight on interaction maps");
    app->add_option("--mu", mu, "ADMM penalty");
    app->add_option("--max-iter", max_iter, "iteration cap");
    app->add_option("--tol", tol, "relative RE change that stops the solver (0 disables)");
    app->add_option("--projection", projection, "abs | clamp")->check(CLI::IsMember({"abs", "clamp"}));
    app->add_option("--schedule", schedule, "per_slice | per_sweep")->check(CLI::IsMember({"per_slice", "per_sweep"}));
  }

  void overlay(json &solver) const {
    if (lambda1) solver["lambda1"] = *lambda1;
    if (lambda2) solver["lambda2"] = *lambda2;
    if (mu) solver["mu"] = *mu;
    if (tol) solver["tol"] = *tol;
    if (max_iter) solver["max_iter"] = *max_iter;
    if (projection) solver["projection"] = *projection;
    if (schedule) solver["schedule"] = *schedule;
  }

  lrntf_solver_params params() const {
    lrntf_solver_params p;
    lrntf_solver_params_init(&p);
    if (lambda1) p.lambda1 = *lambda1;
    if (lambda2) p.lambda2 = *lambda2;
    if (mu) p.mu = *mu;
    if (tol) p.tol = *tol;
    if (max_iter) p.max_iter = *max_iter;
    if (projection) p.projection = *projection == "abs" ? LRNTF_PROJ_ABS : LRNTF_PROJ_CLAMP;
    if (schedule) p.schedule = *schedule == "per_sweep" ? LRNTF_SCHED_PER_SWEEP : LRNTF_SCHED_PER_SLICE;
    return p;
  }
};

struct SceneFlags {
  std::optional<int64_t> s, size, k, R;
  std::optional<double> purity_cap, ppnm_b;
  std::optional<std::string> mix, snr, library;
  std::optional<uint64_t> seed;

  void add(CLI::App *app) {
    app->add_option("--library", library, "spectral library CSV");
    app->add_option("--block", s, "abundance block side s (image side s*s unless --size)");
    app->add_option("--size", size, "image side in pixels");
    app->add_option("--filter", k, "box filter side (odd)");
    app->add_option("-R,--endmembers-count", R, "number of endmembers (first R library columns)");
    app->add_option("--purity-cap", purity_cap, "abundances above this become 1/R");
    app->add_option("--mix", mix, "gbm | ppnm | half")->check(CLI::IsMember({"gbm", "ppnm", "half"}));
    app->add_option("--ppnm-b", ppnm_b, "PPNM nonlinearity");
    app->add_option("--snr", snr, "noise SNR in dB, or 'inf'");
    app->add_option("--seed", seed, "random seed");
  }

  void overlay(json &scene) const {
    if (library) scene["library"] = *library;
    if (s) scene["s"] = *s;
    if (size) scene["size"] = *size;
    if (k) scene["k"] = *k;
    if (R) scene["R"] = *R;
    if (purity_cap) scene["purity_cap"] = *purity_cap;
    if (mix) scene["mix"] = *mix;
    if (ppnm_b) scene["ppnm_b"] = *ppnm_b;
    if (snr) scene["snr_db"] = *snr == "inf" ? json("inf") : json(parse_snr(*snr));
    if (seed) scene["seed"] = *seed;
  }
};

// ---- gen ----

struct GenArgs {
  std::string preset = "image1";
  SceneFlags scene;
  std::string out = "scene";
};

int run_gen(const GenArgs &a) {
  json cfg = preset_json(a.preset);
  a.scene.overlay(cfg["scene"]);
  const json &sc = cfg["scene"];
  const std::string library = sc["library"].get<std::string>();
  need_file(library, "spectral library");

  lrntf_endmembers *e = nullptr;
  check(lrntf_endmembers_load_first(library.c_str(), sc["R"].get<int64_t>(), &e));
  Ems ems(e);

  lrntf_synth_params p;
  lrntf_synth_params_init(&p);
  p.s = sc["s"].get<int64_t>();
  p.size = sc["size"].get<int64_t>();
  p.k = sc["k"].get<int64_t>();
  p.purity_cap = sc["purity_cap"].get<double>();
  const auto mix = sc["mix"].get<std::string>();
  p.mix = mix == "ppnm" ? LRNTF_MIX_PPNM : mix == "half" ? LRNTF_MIX_HALF : LRNTF_MIX_GBM;
  p.ppnm_b = sc["ppnm_b"].get<double>();
  p.snr_db = sc["snr_db"].is_string() ? std::numeric_limits<double>::infinity() : sc["snr_db"].get<double>();
  p.seed = sc["seed"].get<uint64_t>();

  lrntf_scene *raw = nullptr;
  check(lrntf_scene_generate(&p, ems.get(), &raw));
  std::unique_ptr<lrntf_scene, SceneDel> scene(raw);

  const fs::path out = a.out;
  make_dir(out);
  const std::pair<lrntf_scene_part, const char *> parts[] = {
      {LRNTF_SCENE_NOISY, "cube.f64"},       {LRNTF_SCENE_CLEAN, "clean.f64"},
      {LRNTF_SCENE_ABUNDANCES, "abundances.f64"}, {LRNTF_SCENE_INTERACTIONS, "interactions.f64"},
      {LRNTF_SCENE_GAMMA, "gamma.f64"},
  };
  for (const auto &[part, name] : parts) {
    lrntf_cube *c = nullptr;
    check(lrntf_scene_get(scene.get(), part, &c));
    Cube cube(c);
    write_cube(cube.get(), out / name);
  }
  check(lrntf_endmembers_write(ems.get(), (out / "endmembers.csv").string().c_str()));
  std::ofstream(out / "scene.json") << json{{"scene", sc}}.dump(2) << '\n';
  std::cout << "wrote scene to " << out.string() << '\n';
  return kOk;
}

// ---- solve ----

struct SolveArgs {
  std::string cube, endmembers, init, truth;
  SolverFlags solver;
  std::string out = "solve_out";
};

int run_solve(const SolveArgs &a) {
  need_file(a.cube, "cube");
  need_file(a.endmembers, "endmember file");
  Cube y = read_cube(a.cube);
  lrntf_endmembers *e = nullptr;
  check(lrntf_endmembers_load(a.endmembers.c_str(), &e));
  Ems ems(e);

  Cube init;
  if (a.init.empty()) {
    lrntf_cube *c = nullptr;
    check(lrntf_fcls(y.get(), ems.get(), &c));
    init.reset(c);
  } else {
    need_file(a.init, "initial abundance cube");
    init = read_cube(a.init);
  }
  Cube truth;
  if (!a.truth.empty()) {
    need_file(a.truth, "ground-truth cube");
    truth = read_cube(a.truth);
  }

  const lrntf_solver_params p = a.solver.params();
  lrntf_result *r = nullptr;
  check(lrntf_solve(y.get(), ems.get(), &p, init.get(), nullptr, truth.get(), &r));
  std::unique_ptr<lrntf_result, ResultDel> result(r);

  const fs::path out = a.out;
  make_dir(out);
  lrntf_cube *c = nullptr;
  check(lrntf_result_abundances(result.get(), &c));
  Cube A(c);
  write_cube(A.get(), out / "abundances.f64");
  check(lrntf_result_interactions(result.get(), &c));
  Cube B(c);
  write_cube(B.get(), out / "interactions.f64");
  write_cube(init.get(), out / "init_abundances.f64");
  check(lrntf_result_write_trace(result.get(), (out / "trace.csv").string().c_str()));

  json summary = {{"iterations", lrntf_result_iterations(result.get())},
                  {"converged", lrntf_result_converged(result.get()) != 0}};
  check(lrntf_forward(A.get(), B.get(), ems.get(), &c));
  Cube y_hat(c);
  double v = 0.0;
  check(lrntf_re(y.get(), y_hat.get(), &v));
  summary["re"] = v;
  check(lrntf_asam(y.get(), y_hat.get(), &v));
  summary["asam"] = v;
  if (truth) {
    check(lrntf_rmse(truth.get(), A.get(), &v));
    summary["rmse"] = v;
  }
  std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

// ---- eval ----

struct EvalArgs {
  std::string truth, estimate, cube, endmembers, interactions;
};

int run_eval(const EvalArgs &a) {
  json out;
  double v = 0.0;
  Cube est;
  if (!a.estimate.empty()) {
    need_file(a.estimate, "estimated abundance cube");
    est = read_cube(a.estimate);
  }
  if (!a.truth.empty()) {
    if (!est) throw Failure{LRNTF_ERR_CONFIG, "--truth needs --estimate"};
    need_file(a.truth, "ground-truth cube");
    Cube truth = read_cube(a.truth);
    check(lrntf_rmse(truth.get(), est.get(), &v));
    out["rmse"] = v;
  }
  if (!a.cube.empty()) {
    if (!est || a.endmembers.empty())
      throw Failure{LRNTF_ERR_CONFIG, "--cube needs --estimate and --endmembers"};
    need_file(a.cube, "cube");
    need_file(a.endmembers, "endmember file");
    Cube y = read_cube(a.cube);
    lrntf_endmembers *e = nullptr;
    check(lrntf_endmembers_load(a.endmembers.c_str(), &e));
    Ems ems(e);
    Cube B;
    if (!a.interactions.empty()) {
      need_file(a.interactions, "interaction cube");
      B = read_cube(a.interactions);
    } else {
      int64_t nr = 0, nc = 0, k = 0;
      check(lrntf_cube_dims(est.get(), &nr, &nc, nullptr));
      check(lrntf_endmembers_dims(ems.get(), nullptr, nullptr, &k));
      lrntf_cube *c = nullptr;
      check(lrntf_cube_create(nr, nc, k, &c));
      B.reset(c);
    }
    lrntf_cube *c = nullptr;
    check(lrntf_forward(est.get(), B.get(), ems.get(), &c));
    Cube y_hat(c);
    check(lrntf_re(y.get(), y_hat.get(), &v));
    out["re"] = v;
    check(lrntf_asam(y.get(), y_hat.get(), &v));
    out["asam"] = v;
  }
  if (out.empty()) throw Failure{LRNTF_ERR_CONFIG, "nothing to evaluate: give --truth/--estimate or --cube"};
  std::cout << out.dump(2) << '\n';
  return kOk;
}

// ---- rank ----

struct RankArgs {
  std::string cube;
  std::optional<int64_t> slice;
  double energy = 0.95;
  std::optional<int64_t> lowrank;
  std::string out;
};

int run_rank(const RankArgs &a) {
  need_file(a.cube, "cube");
  Cube c = read_cube(a.cube);
  int64_t nr = 0, nc = 0, depth = 0;
  check(lrntf_cube_dims(c.get(), &nr, &nc, &depth));
  const int64_t first = a.slice.value_or(0);
  const int64_t last = a.slice ? *a.slice + 1 : depth;

  json arr = json::array();
  for (int64_t k = first; k < last; ++k) {
    lrntf_rank_profile *raw = nullptr;
    check(lrntf_rank_profile_compute(c.get(), k, a.energy, &raw));
    std::unique_ptr<lrntf_rank_profile, ProfileDel> p(raw);
    std::vector<double> s(lrntf_rank_profile_singulars(p.get(), nullptr, 0));
    lrntf_rank_profile_singulars(p.get(), s.data(), s.size());
    arr.push_back({{"slice", k}, {"dim", lrntf_rank_profile_dim(p.get())}, {"singulars", s}});
  }
  if (a.lowrank) {
    if (a.out.empty()) throw Failure{LRNTF_ERR_CONFIG, "--lowrank needs --out"};
    lrntf_cube *raw = nullptr;
    check(lrntf_cube_create(nr, nc, last - first, &raw));
    Cube approx(raw);
    std::vector<double> buf(static_cast<size_t>(nr * nc));
    double *dst = lrntf_cube_data(approx.get());
    const int64_t d = last - first;
    for (int64_t k = first; k < last; ++k) {
      check(lrntf_lowrank_approx(c.get(), k, *a.lowrank, buf.data()));
      for (int64_t px = 0; px < nr * nc; ++px) dst[px * d + (k - first)] = buf[static_cast<size_t>(px)];
    }
    write_cube(approx.get(), a.out);
  }
  std::cout << json{{"energy", a.energy}, {"profiles", arr}}.dump(2) << '\n';
  return kOk;
}

// ---- run ----

struct RunArgs {
  std::string preset, config, out;
  SceneFlags scene;
  SolverFlags solver;
  bool interaction_maps = false;
};

int run_run(const RunArgs &a) {
  json cfg;
  if (!a.config.empty()) {
    need_file(a.config, "config file");
    std::ifstream in(a.config);
    try {
      cfg = json::parse(in);
    } catch (const json::exception &e) {
      throw Failure{LRNTF_ERR_CONFIG, "config '" + a.config + "' is not valid JSON: " + e.what()};
    }
    if (!a.preset.empty()) cfg["preset"] = a.preset;
  } else {
    cfg = json{{"preset", a.preset.empty() ? "image1" : a.preset}};
  }
  json scene = cfg.value("scene", json::object());
  a.scene.overlay(scene);
  if (!scene.empty()) cfg["scene"] = scene;
  json solver = cfg.value("solver", json::object());
  a.solver.overlay(solver);
  if (!solver.empty()) cfg["solver"] = solver;
  if (a.interaction_maps) cfg["emit"]["interaction_maps"] = true;

  char *results = nullptr;
  const std::string text = cfg.dump();
  check(lrntf_run_experiment(text.c_str(), a.out.empty() ? nullptr : a.out.c_str(), &results));
  const json r = json::parse(results);
  lrntf_string_free(results);

  json brief = {{"outputs", r["config"]["outputs"]}, {"wall_time_s", r["wall_time_s"]}};
  for (const char *m : {"fcls", "lrntf"}) {
    json row;
    for (const char *f : {"rmse", "re", "asam", "iterations", "converged"})
      if (r[m].contains(f)) row[f] = r[m][f];
    brief[m] = row;
  }
  std::cout << brief.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"unmix: low-rank nonnegative tensor unmixing of hyperspectral cubes under the bilinear model"};
  app.footer(presets_help());
  app.require_subcommand(1);

  GenArgs gen;
  auto *g = app.add_subcommand("gen", "generate a synthetic scene from a preset");
  g->add_option("--preset", gen.preset, "starting preset")->capture_default_str();
  gen.scene.add(g);
  g->add_option("-o,--out", gen.out, "output directory")->capture_default_str();

  SolveArgs sol;
  auto *s = app.add_subcommand("solve", "unmix a cube (FCLS init, then the low-rank tensor solver)");
  s->add_option("--cube", sol.cube, "observed cube")->required();
  s->add_option("--endmembers", sol.endmembers, "endmember CSV")->required();
  s->add_option("--init", sol.init, "initial abundance cube (default: FCLS)");
  s->add_option("--truth", sol.truth, "ground-truth abundances for RMSE tracking");
  sol.solver.add(s);
  s->add_option("-o,--out", sol.out, "output directory")->capture_default_str();

  EvalArgs ev;
  auto *e = app.add_subcommand("eval", "compute RMSE / RE / aSAM for saved results");
  e->add_option("--truth", ev.truth, "ground-truth abundance cube");
  e->add_option("--estimate", ev.estimate, "estimated abundance cube");
  e->add_option("--cube", ev.cube, "observed cube (for RE / aSAM)");
  e->add_option("--endmembers", ev.endmembers, "endmember CSV (for RE / aSAM)");
  e->add_option("--interactions", ev.interactions, "estimated interaction cube (default: zeros)");

  RankArgs rk;
  auto *r = app.add_subcommand("rank", "singular value profile of cube slices");
  r->add_option("--cube", rk.cube, "cube whose band slices are analysed")->required();
  r->add_option("--slice", rk.slice, "single slice index (default: all)");
  r->add_option("--energy", rk.energy, "cumulative energy threshold")->capture_default_str();
  r->add_option("--lowrank", rk.lowrank, "also write the best rank-r approximation of each slice");
  r->add_option("-o,--out", rk.out, "cube path for --lowrank output");

  RunArgs run;
  auto *x = app.add_subcommand("run", "full experiment: scene, FCLS, solver, metrics, artefacts");
  x->add_option("--preset", run.preset, "preset name (default image1)");
  x->add_option("--config", run.config, "JSON experiment config");
  x->add_option("-o,--out", run.out, "output directory (overrides config)");
  run.scene.add(x);
  run.solver.add(x);
  x->add_flag("--interaction-maps", run.interaction_maps, "also emit interaction abundance maps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*g) return run_gen(gen);
    if (*s) return run_solve(sol);
    if (*e) return run_eval(ev);
    if (*r) return run_rank(rk);
    if (*x) return run_run(run);
  } catch (const Failure &f) {
    std::cerr << "unmix: " << lrntf_status_name(f.status) << " error: " << f.message << '\n';
    return exit_code(f.status);
  } catch (const json::exception &err) {
    std::cerr << "unmix: config error: " << err.what() << '\n';
    return kConfig;
  }
  return kOther;
}
