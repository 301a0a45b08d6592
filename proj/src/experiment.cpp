// SPDX-License-Identifier: Apache-2.0
#include "lrntf/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>

#include "lrntf/io.hpp"
#include "lrntf/metrics.hpp"

#ifndef LRNTF_DEFAULT_LIBRARY
#define LRNTF_DEFAULT_LIBRARY "data/library_224.csv"
#endif

namespace lrntf {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string default_library_path() { return LRNTF_DEFAULT_LIBRARY; }

namespace {

struct Preset {
  const char *name;
  const char *description;
  MixKind mix;
  Index s, size, k;
};

// Full scenes are 100x100 with 10x10 blocks. The fast variants halve the side
// for CI. param-test keeps the 36x36 (s = 6) geometry used for parameter sweeps.
constexpr Preset kPresets[] = {
    {"image1", "GBM scene, 100x100x224, R=6, SNR 30 dB", MixKind::Gbm, 10, 100, 9},
    {"image2", "PPNM scene (b=0.25), 100x100x224, R=6, SNR 30 dB", MixKind::Ppnm, 10, 100, 9},
    {"image3", "half GBM / half PPNM scene, 100x100x224, R=6, SNR 30 dB", MixKind::Half, 10, 100, 9},
    {"image1-fast", "GBM scene, 50x50x224 (5x5 blocks, k=5)", MixKind::Gbm, 5, 50, 5},
    {"image2-fast", "PPNM scene, 50x50x224 (5x5 blocks, k=5)", MixKind::Ppnm, 5, 50, 5},
    {"image3-fast", "half GBM / half PPNM scene, 50x50x224 (5x5 blocks, k=5)", MixKind::Half, 5, 50, 5},
    {"param-test", "GBM scene, s=6 (36x36), k=9, SNR 30 dB", MixKind::Gbm, 6, 0, 9},
};

void check_keys(const json &obj, std::initializer_list<const char *> allowed, const std::string &where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto &[key, value] : obj.items()) {
    bool ok = false;
    for (const char *a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void take(const json &obj, const char *key, T &dst) {
  if (auto it = obj.find(key); it != obj.end()) dst = it->get<T>();
}

double parse_snr(const json &v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("scene.snr_db: expected a number or \"inf\"");
  }
  return v.get<double>();
}

json snr_to_json(double snr) {
  if (std::isinf(snr) && snr > 0) return "inf";
  return snr;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto &p : kPresets) out.emplace_back(p.name);
  return out;
}

std::vector<std::string> preset_descriptions() {
  std::vector<std::string> out;
  for (const auto &p : kPresets) out.emplace_back(p.description);
  return out;
}

ExperimentConfig preset_config(const std::string &name) {
  for (const auto &p : kPresets) {
    if (name != p.name) continue;
    ExperimentConfig cfg;
    cfg.preset = name;
    cfg.scene.library = default_library_path();
    cfg.scene.synth.mix = p.mix;
    cfg.scene.synth.s = p.s;
    cfg.scene.synth.size = p.size;
    cfg.scene.synth.k = p.k;
    cfg.outputs = "out/" + name;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

ExperimentConfig parse_experiment_config(const json &j) {
  try {
    check_keys(j, {"preset", "scene", "solver", "fcls", "outputs", "emit"}, "config");
    ExperimentConfig cfg;
    cfg.scene.library = default_library_path();
    if (j.contains("preset")) cfg = preset_config(j.at("preset").get<std::string>());
    take(j, "outputs", cfg.outputs);

    if (j.contains("scene")) {
      const json &s = j.at("scene");
      check_keys(s,
                 {"source", "library", "s", "size", "k", "R", "purity_cap", "mix", "ppnm_b", "snr_db",
                  "seed", "cube", "endmembers", "truth"},
                 "scene");
      auto &sc = cfg.scene;
      if (s.contains("source")) {
        const auto src = s.at("source").get<std::string>();
        if (src == "synthetic")
          sc.source = SceneConfig::Source::Synthetic;
        else if (src == "file")
          sc.source = SceneConfig::Source::File;
        else
          throw ConfigError("scene.source must be 'synthetic' or 'file'");
      }
      take(s, "library", sc.library);
      take(s, "s", sc.synth.s);
      take(s, "size", sc.synth.size);
      take(s, "k", sc.synth.k);
      take(s, "R", sc.synth.R);
      take(s, "purity_cap", sc.synth.purity_cap);
      if (s.contains("mix")) sc.synth.mix = parse_mix_kind(s.at("mix").get<std::string>());
      take(s, "ppnm_b", sc.synth.ppnm_b);
      if (s.contains("snr_db")) sc.synth.snr_db = parse_snr(s.at("snr_db"));
      take(s, "seed", sc.synth.seed);
      take(s, "cube", sc.cube);
      take(s, "endmembers", sc.endmembers);
      take(s, "truth", sc.truth);
    }
    if (j.contains("solver")) {
      const json &s = j.at("solver");
      check_keys(s, {"lambda1", "lambda2", "mu", "max_iter", "tol", "record_trace", "projection", "schedule"},
                 "solver");
      auto &sv = cfg.solver;
      take(s, "lambda1", sv.lambda1);
      take(s, "lambda2", sv.lambda2);
      take(s, "mu", sv.mu);
      take(s, "max_iter", sv.max_iter);
      take(s, "tol", sv.tol);
      take(s, "record_trace", sv.record_trace);
      if (s.contains("projection")) sv.projection = parse_projection(s.at("projection").get<std::string>());
      if (s.contains("schedule")) sv.schedule = parse_schedule(s.at("schedule").get<std::string>());
    }
    if (j.contains("fcls")) {
      const json &f = j.at("fcls");
      check_keys(f, {"max_iter", "tol", "asc_weight"}, "fcls");
      take(f, "max_iter", cfg.fcls.max_iter);
      take(f, "tol", cfg.fcls.tol);
      take(f, "asc_weight", cfg.fcls.asc_weight);
    }
    if (j.contains("emit")) {
      const json &e = j.at("emit");
      check_keys(e, {"abundance_maps", "interaction_maps", "error_map", "trace", "rank_profiles", "cubes"},
                 "emit");
      take(e, "abundance_maps", cfg.emit.abundance_maps);
      take(e, "interaction_maps", cfg.emit.interaction_maps);
      take(e, "error_map", cfg.emit.error_map);
      take(e, "trace", cfg.emit.trace);
      take(e, "rank_profiles", cfg.emit.rank_profiles);
      take(e, "cubes", cfg.emit.cubes);
    }
    cfg.solver.validate();
    cfg.fcls.validate();
    return cfg;
  } catch (const json::exception &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json to_json(const ExperimentConfig &cfg) {
  json scene;
  const auto &sc = cfg.scene;
  if (sc.source == SceneConfig::Source::Synthetic) {
    const auto &s = sc.synth;
    scene = {{"source", "synthetic"}, {"library", sc.library}, {"s", s.s},
             {"size", s.size},        {"k", s.k},              {"R", s.R},
             {"purity_cap", s.purity_cap}, {"mix", to_string(s.mix)}, {"ppnm_b", s.ppnm_b},
             {"snr_db", snr_to_json(s.snr_db)}, {"seed", s.seed}};
  } else {
    scene = {{"source", "file"}, {"cube", sc.cube}, {"endmembers", sc.endmembers}, {"truth", sc.truth}};
  }
  const auto &sv = cfg.solver;
  json out = {
      {"scene", scene},
      {"solver",
       {{"lambda1", sv.lambda1}, {"lambda2", sv.lambda2}, {"mu", sv.mu}, {"max_iter", sv.max_iter},
        {"tol", sv.tol}, {"record_trace", sv.record_trace}, {"projection", to_string(sv.projection)},
        {"schedule", to_string(sv.schedule)}}},
      {"fcls", {{"max_iter", cfg.fcls.max_iter}, {"tol", cfg.fcls.tol}, {"asc_weight", cfg.fcls.asc_weight}}},
      {"outputs", cfg.outputs},
      {"emit",
       {{"abundance_maps", cfg.emit.abundance_maps}, {"interaction_maps", cfg.emit.interaction_maps},
        {"error_map", cfg.emit.error_map}, {"trace", cfg.emit.trace},
        {"rank_profiles", cfg.emit.rank_profiles}, {"cubes", cfg.emit.cubes}}},
  };
  return out;
}

ExperimentConfig load_experiment_config(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

namespace {

template <class F>
auto stage(const char *name, F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError &) {
    throw;
  } catch (const Error &e) {
    throw StageError(name, e);
  } catch (const std::exception &e) {
    throw StageError(name, Error(ErrorKind::Io, e.what()));
  }
}

json metrics_json(const Tensor3 &y, const Tensor3 &y_hat, const Tensor3 *truth, const Tensor3 &A) {
  const AngleStats angle = asam_stats(y, y_hat);
  json m = {{"re", re(y, y_hat)}, {"asam", angle.mean}, {"asam_degenerate_pixels", angle.degenerate}};
  if (truth) {
    m["rmse"] = rmse(*truth, A);
    const Vec per = rmse_per_endmember(*truth, A);
    m["rmse_per_endmember"] = std::vector<double>(per.data(), per.data() + per.size());
  }
  return m;
}

json profile_json(const RankProfile &p) {
  return {{"dim95", p.dim},
          {"singulars", std::vector<double>(p.singulars.data(), p.singulars.data() + p.singulars.size())},
          {"cum_energy", std::vector<double>(p.cum_energy.data(), p.cum_energy.data() + p.cum_energy.size())}};
}

json profiles_json(const Tensor3 &t, const std::vector<std::string> &labels) {
  json arr = json::array();
  for (Index k = 0; k < t.depth(); ++k) {
    json p = profile_json(rank_profile(slice(t, k)));
    p["map"] = labels[static_cast<std::size_t>(k)];
    arr.push_back(std::move(p));
  }
  return arr;
}

void write_json(const fs::path &path, const json &j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

json run_experiment(const ExperimentConfig &cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_dir = cfg.outputs;
  try {
    stage("outputs", [&] {
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
      fs::remove(out_dir / "FAILED", ec);
    });
    stage("config", [&] {
      cfg.solver.validate();
      cfg.fcls.validate();
    });

    // Scene and endmembers.
    Tensor3 y, truth_A;
    bool has_truth = false;
    EndmemberSet ems;
    json scene_info;
    if (cfg.scene.source == SceneConfig::Source::Synthetic) {
      ems = stage("endmembers", [&] {
        if (!fs::exists(cfg.scene.library))
          throw ConfigError("spectral library '" + cfg.scene.library + "' does not exist");
        return select_endmembers(load_spectral_library(cfg.scene.library), cfg.scene.synth.R);
      });
      GroundTruth gt = stage("scene", [&] { return generate_scene(cfg.scene.synth, ems); });
      if (std::isfinite(cfg.scene.synth.snr_db)) scene_info["realized_snr_db"] = realized_snr_db(gt.clean, gt.noisy);
      y = std::move(gt.noisy);
      truth_A = std::move(gt.A_true);
      has_truth = true;
    } else {
      ems = stage("endmembers", [&] {
        if (!fs::exists(cfg.scene.endmembers))
          throw ConfigError("endmember file '" + cfg.scene.endmembers + "' does not exist");
        auto lib = load_spectral_library(cfg.scene.endmembers);
        return EndmemberSet(std::move(lib.C), std::move(lib.names));
      });
      y = stage("scene", [&] {
        if (!fs::exists(cfg.scene.cube)) throw ConfigError("cube file '" + cfg.scene.cube + "' does not exist");
        return read_cube(cfg.scene.cube);
      });
      if (!cfg.scene.truth.empty()) {
        truth_A = stage("scene", [&] { return read_cube(cfg.scene.truth); });
        has_truth = true;
      }
    }
    scene_info["n_row"] = y.n_row();
    scene_info["n_col"] = y.n_col();
    scene_info["bands"] = y.depth();
    scene_info["endmembers"] = ems.names();
    scene_info["interactions"] = ems.interactions();

    const Tensor3 *truth = has_truth ? &truth_A : nullptr;
    const Tensor3 A0 = stage("fcls", [&] { return fcls_cube(y, ems.C(), cfg.fcls); });
    const AbundanceState init{A0, Tensor3(y.n_row(), y.n_col(), ems.interactions())};
    const SolveResult sol = stage("solve", [&] { return solve(y, ems, cfg.solver, init, truth); });

    json results;
    stage("metrics", [&] {
      results["config"] = to_json(cfg);
      if (!cfg.preset.empty()) results["config"]["preset"] = cfg.preset;
      results["scene"] = scene_info;
      results["fcls"] = metrics_json(y, forward(init, ems), truth, A0);
      json lr = metrics_json(y, forward(sol.state, ems), truth, sol.state.A);
      lr["iterations"] = sol.iterations;
      lr["converged"] = sol.converged;
      if (!sol.trace.res_asc.empty()) lr["final_res_asc"] = sol.trace.res_asc.back();
      results["lrntf"] = lr;
    });

    stage("emit", [&] {
      if (cfg.emit.trace) write_trace_csv(out_dir / "trace.csv", sol.trace);
      if (cfg.emit.cubes) {
        write_cube(out_dir / "abundances.f64", sol.state.A);
        write_cube(out_dir / "interactions.f64", sol.state.B);
        write_cube(out_dir / "fcls_abundances.f64", A0);
      }
      if (cfg.emit.abundance_maps || cfg.emit.interaction_maps || cfg.emit.error_map)
        fs::create_directories(out_dir / "maps");
      const auto &names = ems.names();
      if (cfg.emit.abundance_maps)
        for (Index k = 0; k < sol.state.A.depth(); ++k)
          emit_gray_map(slice(sol.state.A, k), out_dir / "maps" / ("abundance_" + names[static_cast<std::size_t>(k)] + ".pgm"),
                        GrayBounds{0.0, 1.0});
      std::vector<std::string> pair_labels;
      for (const auto &[i, j] : ems.pairs())
        pair_labels.push_back(names[static_cast<std::size_t>(i)] + "+" + names[static_cast<std::size_t>(j)]);
      if (cfg.emit.interaction_maps)
        for (Index q = 0; q < sol.state.B.depth(); ++q)
          emit_gray_map(slice(sol.state.B, q),
                        out_dir / "maps" / ("interaction_" + pair_labels[static_cast<std::size_t>(q)] + ".pgm"),
                        GrayBounds{0.0, 0.25});
      if (cfg.emit.error_map)
        emit_gray_map(error_map(y, forward(sol.state, ems)), out_dir / "maps" / "error_map.pgm");
      if (cfg.emit.rank_profiles) {
        json rp = {{"abundance", profiles_json(sol.state.A, names)},
                   {"interaction", profiles_json(sol.state.B, pair_labels)}};
        if (truth) rp["true_abundance"] = profiles_json(*truth, names);
        write_json(out_dir / "rank_profiles.json", rp);
      }
    });

    results["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stage("emit", [&] { write_json(out_dir / "results.json", results); });
    return results;
  } catch (const StageError &e) {
    std::error_code ec;
    if (fs::is_directory(out_dir, ec)) {
      std::ofstream marker(out_dir / "FAILED");
      marker << "stage " << e.stage() << '\n' << "cause " << e.what() << '\n';
    }
    throw;
  }
}

}  // namespace lrntf
