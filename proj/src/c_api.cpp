// SPDX-License-Identifier: Apache-2.0
#include "lrntf/lrntf.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "lrntf/experiment.hpp"
#include "lrntf/fcls.hpp"
#include "lrntf/io.hpp"
#include "lrntf/metrics.hpp"
#include "lrntf/solver.hpp"
#include "lrntf/synthgen.hpp"

struct lrntf_cube {
  lrntf::Tensor3 t;
};
struct lrntf_endmembers {
  lrntf::EndmemberSet ems;
};
struct lrntf_scene {
  lrntf::GroundTruth gt;
};
struct lrntf_result {
  lrntf::SolveResult r;
};
struct lrntf_rank_profile {
  lrntf::RankProfile p;
};

namespace {

thread_local std::string g_last_error;

lrntf_status status_of(lrntf::ErrorKind k) {
  using K = lrntf::ErrorKind;
  switch (k) {
    case K::Index: return LRNTF_ERR_INDEX;
    case K::Shape: return LRNTF_ERR_SHAPE;
    case K::Domain: return LRNTF_ERR_DOMAIN;
    case K::Config: return LRNTF_ERR_CONFIG;
    case K::Parse: return LRNTF_ERR_PARSE;
    case K::Validation: return LRNTF_ERR_VALIDATION;
    case K::Io: return LRNTF_ERR_IO;
    case K::Solver: return LRNTF_ERR_SOLVER;
  }
  return LRNTF_ERR_INTERNAL;
}

template <class F>
lrntf_status guard(F &&f) {
  try {
    f();
    g_last_error.clear();
    return LRNTF_OK;
  } catch (const lrntf::Error &e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return LRNTF_ERR_INTERNAL;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return LRNTF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LRNTF_ERR_INTERNAL;
  }
}

template <class T>
void require(const T *p, const char *what) {
  if (!p) throw lrntf::ConfigError(std::string(what) + " is NULL");
}

char *dup_string(const std::string &s) {
  char *out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lrntf::Index slice_index(const lrntf::Tensor3 &t, int64_t k) {
  if (k < 0 || k >= t.depth())
    throw lrntf::IndexError("slice " + std::to_string(k) + " out of range [0, " + std::to_string(t.depth()) + ")");
  return static_cast<lrntf::Index>(k);
}

lrntf::SolverConfig to_cpp(const lrntf_solver_params &p) {
  lrntf::SolverConfig c;
  c.lambda1 = p.lambda1;
  c.lambda2 = p.lambda2;
  c.mu = p.mu;
  c.max_iter = p.max_iter;
  c.tol = p.tol;
  c.record_trace = p.record_trace != 0;
  c.projection = p.projection == LRNTF_PROJ_ABS ? lrntf::Projection::Abs : lrntf::Projection::Clamp;
  c.schedule =
      p.schedule == LRNTF_SCHED_PER_SWEEP ? lrntf::ProjectionSchedule::PerSweep : lrntf::ProjectionSchedule::PerSlice;
  return c;
}

}  // namespace

extern "C" {

const char *lrntf_last_error(void) { return g_last_error.c_str(); }

const char *lrntf_status_name(lrntf_status status) {
  switch (status) {
    case LRNTF_OK: return "ok";
    case LRNTF_ERR_CONFIG: return "config";
    case LRNTF_ERR_IO: return "io";
    case LRNTF_ERR_SOLVER: return "solver";
    case LRNTF_ERR_SHAPE: return "shape";
    case LRNTF_ERR_INDEX: return "index";
    case LRNTF_ERR_DOMAIN: return "domain";
    case LRNTF_ERR_PARSE: return "parse";
    case LRNTF_ERR_VALIDATION: return "validation";
    case LRNTF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char *lrntf_version(void) { return "0.1.0"; }

lrntf_status lrntf_cube_create(int64_t n_row, int64_t n_col, int64_t depth, lrntf_cube **out) {
  return guard([&] {
    require(out, "out");
    *out = new lrntf_cube{lrntf::Tensor3(n_row, n_col, depth)};
  });
}

lrntf_status lrntf_cube_from_data(int64_t n_row, int64_t n_col, int64_t depth, const double *data,
                                  lrntf_cube **out) {
  return guard([&] {
    require(out, "out");
    lrntf::Tensor3 t(n_row, n_col, depth);
    if (t.size() > 0) {
      require(data, "data");
      std::memcpy(t.data(), data, static_cast<std::size_t>(t.size()) * sizeof(double));
    }
    *out = new lrntf_cube{std::move(t)};
  });
}

void lrntf_cube_free(lrntf_cube *cube) { delete cube; }

lrntf_status lrntf_cube_dims(const lrntf_cube *cube, int64_t *n_row, int64_t *n_col, int64_t *depth) {
  return guard([&] {
    require(cube, "cube");
    if (n_row) *n_row = cube->t.n_row();
    if (n_col) *n_col = cube->t.n_col();
    if (depth) *depth = cube->t.depth();
  });
}

double *lrntf_cube_data(lrntf_cube *cube) { return cube ? cube->t.data() : nullptr; }

lrntf_status lrntf_cube_read(const char *path, lrntf_cube **out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new lrntf_cube{lrntf::read_cube(path)};
  });
}

lrntf_status lrntf_cube_write(const lrntf_cube *cube, const char *path) {
  return guard([&] {
    require(cube, "cube");
    require(path, "path");
    lrntf::write_cube(path, cube->t);
  });
}

lrntf_status lrntf_cube_write_gray_map(const lrntf_cube *cube, int64_t k, double lo, double hi, const char *path) {
  return guard([&] {
    require(cube, "cube");
    require(path, "path");
    const lrntf::Mat m = lrntf::slice(cube->t, slice_index(cube->t, k));
    if (lo < hi)
      lrntf::emit_gray_map(m, path, lrntf::GrayBounds{lo, hi});
    else
      lrntf::emit_gray_map(m, path);
  });
}

lrntf_status lrntf_endmembers_load(const char *csv_path, lrntf_endmembers **out) {
  return guard([&] {
    require(csv_path, "csv_path");
    require(out, "out");
    auto lib = lrntf::load_spectral_library(csv_path);
    *out = new lrntf_endmembers{lrntf::EndmemberSet(std::move(lib.C), std::move(lib.names))};
  });
}

lrntf_status lrntf_endmembers_load_first(const char *csv_path, int64_t r, lrntf_endmembers **out) {
  return guard([&] {
    require(csv_path, "csv_path");
    require(out, "out");
    *out = new lrntf_endmembers{lrntf::select_endmembers(lrntf::load_spectral_library(csv_path), r)};
  });
}

lrntf_status lrntf_endmembers_from_data(int64_t bands, int64_t count, const double *col_major,
                                        lrntf_endmembers **out) {
  return guard([&] {
    require(out, "out");
    if (bands <= 0 || count <= 0) throw lrntf::ShapeError("endmember matrix must be non-empty");
    require(col_major, "data");
    lrntf::Mat C = Eigen::Map<const lrntf::Mat>(col_major, bands, count);
    *out = new lrntf_endmembers{lrntf::EndmemberSet(std::move(C))};
  });
}

void lrntf_endmembers_free(lrntf_endmembers *ems) { delete ems; }

lrntf_status lrntf_endmembers_dims(const lrntf_endmembers *ems, int64_t *bands, int64_t *count,
                                   int64_t *interactions) {
  return guard([&] {
    require(ems, "endmembers");
    if (bands) *bands = ems->ems.bands();
    if (count) *count = ems->ems.count();
    if (interactions) *interactions = ems->ems.interactions();
  });
}

lrntf_status lrntf_endmembers_write(const lrntf_endmembers *ems, const char *csv_path) {
  return guard([&] {
    require(ems, "endmembers");
    require(csv_path, "csv_path");
    lrntf::write_spectral_library(csv_path, lrntf::SpectralLibrary{ems->ems.C(), ems->ems.names()});
  });
}

void lrntf_synth_params_init(lrntf_synth_params *p) {
  if (!p) return;
  const lrntf::SynthConfig d;
  p->s = d.s;
  p->size = d.size;
  p->k = d.k;
  p->purity_cap = d.purity_cap;
  p->mix = LRNTF_MIX_GBM;
  p->ppnm_b = d.ppnm_b;
  p->snr_db = d.snr_db;
  p->seed = d.seed;
}

lrntf_status lrntf_scene_generate(const lrntf_synth_params *p, const lrntf_endmembers *ems, lrntf_scene **out) {
  return guard([&] {
    require(p, "params");
    require(ems, "endmembers");
    require(out, "out");
    lrntf::SynthConfig c;
    c.s = p->s;
    c.size = p->size;
    c.k = p->k;
    c.R = ems->ems.count();
    c.purity_cap = p->purity_cap;
    switch (p->mix) {
      case LRNTF_MIX_GBM: c.mix = lrntf::MixKind::Gbm; break;
      case LRNTF_MIX_PPNM: c.mix = lrntf::MixKind::Ppnm; break;
      case LRNTF_MIX_HALF: c.mix = lrntf::MixKind::Half; break;
      default: throw lrntf::ConfigError("unknown mixing model");
    }
    c.ppnm_b = p->ppnm_b;
    c.snr_db = p->snr_db;
    c.seed = p->seed;
    *out = new lrntf_scene{lrntf::generate_scene(c, ems->ems)};
  });
}

void lrntf_scene_free(lrntf_scene *scene) { delete scene; }

lrntf_status lrntf_scene_get(const lrntf_scene *scene, lrntf_scene_part part, lrntf_cube **out) {
  return guard([&] {
    require(scene, "scene");
    require(out, "out");
    const auto &gt = scene->gt;
    switch (part) {
      case LRNTF_SCENE_ABUNDANCES: *out = new lrntf_cube{gt.A_true}; break;
      case LRNTF_SCENE_INTERACTIONS: *out = new lrntf_cube{gt.B_true}; break;
      case LRNTF_SCENE_GAMMA: *out = new lrntf_cube{gt.gamma}; break;
      case LRNTF_SCENE_CLEAN: *out = new lrntf_cube{gt.clean}; break;
      case LRNTF_SCENE_NOISY: *out = new lrntf_cube{gt.noisy}; break;
      default: throw lrntf::ConfigError("unknown scene part");
    }
  });
}

lrntf_status lrntf_fcls(const lrntf_cube *y, const lrntf_endmembers *ems, lrntf_cube **abundances) {
  return guard([&] {
    require(y, "cube");
    require(ems, "endmembers");
    require(abundances, "out");
    *abundances = new lrntf_cube{lrntf::fcls_cube(y->t, ems->ems.C())};
  });
}

void lrntf_solver_params_init(lrntf_solver_params *p) {
  if (!p) return;
  const lrntf::SolverConfig d;
  p->lambda1 = d.lambda1;
  p->lambda2 = d.lambda2;
  p->mu = d.mu;
  p->max_iter = d.max_iter;
  p->tol = d.tol;
  p->record_trace = d.record_trace ? 1 : 0;
  p->projection = d.projection == lrntf::Projection::Abs ? LRNTF_PROJ_ABS : LRNTF_PROJ_CLAMP;
  p->schedule = d.schedule == lrntf::ProjectionSchedule::PerSweep ? LRNTF_SCHED_PER_SWEEP : LRNTF_SCHED_PER_SLICE;
}

lrntf_status lrntf_solve(const lrntf_cube *y, const lrntf_endmembers *ems, const lrntf_solver_params *p,
                         const lrntf_cube *init_a, const lrntf_cube *init_b, const lrntf_cube *truth,
                         lrntf_result **out) {
  return guard([&] {
    require(y, "cube");
    require(ems, "endmembers");
    require(p, "params");
    require(init_a, "init_a");
    require(out, "out");
    const lrntf::AbundanceState init{init_a->t, init_b ? init_b->t : lrntf::Tensor3()};
    *out = new lrntf_result{lrntf::solve(y->t, ems->ems, to_cpp(*p), init, truth ? &truth->t : nullptr)};
  });
}

void lrntf_result_free(lrntf_result *result) { delete result; }

lrntf_status lrntf_result_abundances(const lrntf_result *result, lrntf_cube **out) {
  return guard([&] {
    require(result, "result");
    require(out, "out");
    *out = new lrntf_cube{result->r.state.A};
  });
}

lrntf_status lrntf_result_interactions(const lrntf_result *result, lrntf_cube **out) {
  return guard([&] {
    require(result, "result");
    require(out, "out");
    *out = new lrntf_cube{result->r.state.B};
  });
}

int lrntf_result_iterations(const lrntf_result *result) { return result ? result->r.iterations : 0; }
int lrntf_result_converged(const lrntf_result *result) { return result && result->r.converged ? 1 : 0; }

size_t lrntf_result_re_trace(const lrntf_result *result, double *buf, size_t cap) {
  if (!result) return 0;
  const auto &re = result->r.trace.re;
  if (buf)
    for (size_t i = 0; i < re.size() && i < cap; ++i) buf[i] = re[i];
  return re.size();
}

lrntf_status lrntf_result_write_trace(const lrntf_result *result, const char *csv_path) {
  return guard([&] {
    require(result, "result");
    require(csv_path, "csv_path");
    lrntf::write_trace_csv(csv_path, result->r.trace);
  });
}

lrntf_status lrntf_forward(const lrntf_cube *a, const lrntf_cube *b, const lrntf_endmembers *ems,
                           lrntf_cube **y_hat) {
  return guard([&] {
    require(a, "a");
    require(b, "b");
    require(ems, "endmembers");
    require(y_hat, "out");
    *y_hat = new lrntf_cube{lrntf::forward(lrntf::AbundanceState{a->t, b->t}, ems->ems)};
  });
}

lrntf_status lrntf_rmse(const lrntf_cube *a_true, const lrntf_cube *a_est, double *out) {
  return guard([&] {
    require(a_true, "a_true");
    require(a_est, "a_est");
    require(out, "out");
    *out = lrntf::rmse(a_true->t, a_est->t);
  });
}

lrntf_status lrntf_re(const lrntf_cube *y, const lrntf_cube *y_hat, double *out) {
  return guard([&] {
    require(y, "y");
    require(y_hat, "y_hat");
    require(out, "out");
    *out = lrntf::re(y->t, y_hat->t);
  });
}

lrntf_status lrntf_asam(const lrntf_cube *y, const lrntf_cube *y_hat, double *out) {
  return guard([&] {
    require(y, "y");
    require(y_hat, "y_hat");
    require(out, "out");
    *out = lrntf::asam(y->t, y_hat->t);
  });
}

lrntf_status lrntf_rank_profile_compute(const lrntf_cube *cube, int64_t k, double energy,
                                        lrntf_rank_profile **out) {
  return guard([&] {
    require(cube, "cube");
    require(out, "out");
    *out = new lrntf_rank_profile{lrntf::rank_profile(lrntf::slice(cube->t, slice_index(cube->t, k)), energy)};
  });
}

void lrntf_rank_profile_free(lrntf_rank_profile *p) { delete p; }

int64_t lrntf_rank_profile_dim(const lrntf_rank_profile *p) { return p ? p->p.dim : -1; }

size_t lrntf_rank_profile_singulars(const lrntf_rank_profile *p, double *buf, size_t cap) {
  if (!p) return 0;
  const auto n = static_cast<size_t>(p->p.singulars.size());
  if (buf)
    for (size_t i = 0; i < n && i < cap; ++i) buf[i] = p->p.singulars[static_cast<lrntf::Index>(i)];
  return n;
}

lrntf_status lrntf_lowrank_approx(const lrntf_cube *cube, int64_t k, int64_t r, double *out) {
  return guard([&] {
    require(cube, "cube");
    require(out, "out");
    const auto lr = lrntf::lowrank_approx(lrntf::slice(cube->t, slice_index(cube->t, k)), r);
    Eigen::Map<lrntf::RowMat>(out, lr.approx.rows(), lr.approx.cols()) = lr.approx;
  });
}

size_t lrntf_preset_count(void) { return lrntf::preset_names().size(); }

const char *lrntf_preset_name(size_t i) {
  static const std::vector<std::string> names = lrntf::preset_names();
  return i < names.size() ? names[i].c_str() : nullptr;
}

const char *lrntf_preset_description(size_t i) {
  static const std::vector<std::string> desc = lrntf::preset_descriptions();
  return i < desc.size() ? desc[i].c_str() : nullptr;
}

lrntf_status lrntf_preset_config(const char *name, char **json_out) {
  return guard([&] {
    require(name, "name");
    require(json_out, "out");
    const auto cfg = lrntf::preset_config(name);
    auto j = lrntf::to_json(cfg);
    j["preset"] = cfg.preset;
    *json_out = dup_string(j.dump(2));
  });
}

lrntf_status lrntf_run_experiment(const char *config_json, const char *out_dir, char **results_json) {
  return guard([&] {
    require(config_json, "config_json");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception &e) {
      throw lrntf::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    auto cfg = lrntf::parse_experiment_config(j);
    if (out_dir) cfg.outputs = out_dir;
    const auto results = lrntf::run_experiment(cfg);
    if (results_json) *results_json = dup_string(results.dump(2));
  });
}

void lrntf_string_free(char *s) { delete[] s; }

}  // extern "C"
