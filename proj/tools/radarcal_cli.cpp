// radarcal command-line front end. Every subcommand goes through the C API and
// finishes by writing a JSON run manifest next to its primary output; the
// manifest's presence means the run completed.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "radarcal/radarcal.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct CliError {
  int exit_code;
  std::string message;
};

void check(radarcal_status status, const std::string& context) {
  if (status == RADARCAL_OK) return;
  const int code = status == RADARCAL_ERR_IO ? kExitIo : kExitValidation;
  throw CliError{code, context + ": " + radarcal_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Freer {
  void operator()(T* p) const { Free(p); }
};
template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, Freer<T, Free>>;

using Cube = Handle<radarcal_cube, radarcal_cube_free>;
using Temps = Handle<radarcal_temps, radarcal_temps_free>;
using Amplitudes = Handle<radarcal_amplitudes, radarcal_amplitudes_free>;
using Model = Handle<radarcal_model, radarcal_model_free>;
using Flags = Handle<radarcal_flags, radarcal_flags_free>;
using Report = Handle<radarcal_report, radarcal_report_free>;
using Spec = Handle<radarcal_synth_spec, radarcal_synth_spec_free>;

Amplitudes read_amplitudes(const std::string& path) {
  radarcal_amplitudes* raw = nullptr;
  check(radarcal_amplitudes_read(path.c_str(), &raw), "reading " + path);
  return Amplitudes(raw);
}

Temps read_temps(const std::string& path) {
  radarcal_temps* raw = nullptr;
  check(radarcal_temps_read(path.c_str(), &raw), "reading " + path);
  return Temps(raw);
}

struct Dims {
  uint32_t frames = 0, antennas = 0, bins = 0;
};

Dims dims_of(const radarcal_amplitudes* ap) {
  Dims d;
  check(radarcal_amplitudes_dims(ap, &d.frames, &d.antennas, &d.bins), "amplitude dims");
  return d;
}

void require_frames(const Dims& d, const radarcal_temps* temps, const std::string& what) {
  if (radarcal_temps_size(temps) != d.frames)
    throw CliError{kExitValidation, what + ": temperature log has " + std::to_string(radarcal_temps_size(temps)) +
                                        " rows but the amplitudes have " + std::to_string(d.frames) + " frames"};
}

std::string manifest_path_for(const std::string& primary, const std::string& override_path) {
  return override_path.empty() ? primary + ".manifest.json" : override_path;
}

// Written last: temp file + rename, so a manifest never appears half-written.
void write_manifest(const std::string& path, const std::string& command, json inputs, json outputs, json config) {
  json m;
  m["tool"] = "radarcal";
  m["version"] = radarcal_version();
  m["command"] = command;
  m["inputs"] = std::move(inputs);
  m["outputs"] = std::move(outputs);
  m["config"] = std::move(config);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << m.dump(2) << "\n";
    if (!out) throw CliError{kExitIo, "cannot write manifest " + path};
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw CliError{kExitIo, "cannot write manifest " + path + ": " + ec.message()};
  spdlog::debug("manifest written to {}", path);
}

std::vector<uint32_t> parse_bins(const std::string& text) {
  // "1,2,5-8"
  std::vector<uint32_t> bins;
  std::stringstream ss(text);
  std::string item;
  auto to_u32 = [&](const std::string& s) -> uint32_t {
    try {
      std::size_t used = 0;
      const auto v = std::stoul(s, &used);
      if (used != s.size() || v > UINT32_MAX) throw std::invalid_argument(s);
      return static_cast<uint32_t>(v);
    } catch (const std::exception&) {
      throw CliError{kExitValidation, "--bins: bad bin '" + s + "'"};
    }
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      bins.push_back(to_u32(item));
      continue;
    }
    const auto lo = to_u32(item.substr(0, dash)), hi = to_u32(item.substr(dash + 1));
    if (lo > hi) throw CliError{kExitValidation, "--bins: empty range '" + item + "'"};
    for (uint32_t b = lo; b <= hi; ++b) bins.push_back(b);
  }
  if (bins.empty()) throw CliError{kExitValidation, "--bins: no bins given"};
  return bins;
}

struct ConfigFile {
  radarcal_radar_config radar{};
  double train_fraction = 0.7;
};

std::optional<ConfigFile> load_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  ConfigFile c;
  check(radarcal_config_load(path.c_str(), &c.radar, &c.train_fraction), "reading config " + path);
  return c;
}

double resolve_fraction(const std::optional<double>& flag, const std::optional<ConfigFile>& cfg) {
  if (flag) return *flag;
  return cfg ? cfg->train_fraction : 0.7;
}

// ---- subcommands -----------------------------------------------------------

struct SynthArgs {
  std::string spec, cube, temps, manifest;
  std::optional<uint64_t> seed;
  unsigned threads = 1;
};

int run_synth(const SynthArgs& a) {
  radarcal_synth_spec* raw = nullptr;
  check(radarcal_synth_spec_load(a.spec.c_str(), &raw), "reading synth spec " + a.spec);
  Spec spec(raw);
  if (a.seed) check(radarcal_synth_spec_set_seed(spec.get(), *a.seed), "seed");

  radarcal_cube* cube_raw = nullptr;
  radarcal_temps* temps_raw = nullptr;
  check(radarcal_synth_generate(spec.get(), a.threads, &cube_raw, &temps_raw), "generating synthetic data");
  Cube cube(cube_raw);
  Temps temps(temps_raw);
  uint32_t frames = 0;
  check(radarcal_cube_dims(cube.get(), &frames, nullptr, nullptr, nullptr), "cube dims");
  spdlog::info("generated {} frames", frames);

  check(radarcal_cube_write(cube.get(), a.cube.c_str()), "writing " + a.cube);
  check(radarcal_temps_write(temps.get(), a.temps.c_str()), "writing " + a.temps);
  json cfg = {{"seed_override", a.seed ? json(*a.seed) : json(nullptr)}, {"frames", frames}};
  write_manifest(manifest_path_for(a.cube, a.manifest), "synth", {{"spec", a.spec}}, json::array({a.cube, a.temps}),
                 cfg);
  return 0;
}

struct PreprocessArgs {
  std::string cube, out, config, manifest;
  unsigned threads = 1;
};

int run_preprocess(const PreprocessArgs& a) {
  auto cfg = load_config(a.config);
  radarcal_cube* raw = nullptr;
  check(radarcal_cube_read(a.cube.c_str(), &raw), "reading " + a.cube);
  Cube cube(raw);
  uint32_t frames = 0, antennas = 0, chirps = 0, samples = 0;
  check(radarcal_cube_dims(cube.get(), &frames, &antennas, &chirps, &samples), "cube dims");
  if (cfg && (cfg->radar.num_antennas != antennas || cfg->radar.num_chirps != chirps ||
              cfg->radar.num_samples != samples))
    throw CliError{kExitValidation, "cube dimensions A=" + std::to_string(antennas) + " C=" + std::to_string(chirps) +
                                        " N=" + std::to_string(samples) + " do not match " + a.config};

  radarcal_amplitudes* ap_raw = nullptr;
  check(radarcal_compute_profiles(cube.get(), a.threads, &ap_raw), "preprocessing");
  Amplitudes ap(ap_raw);
  check(radarcal_amplitudes_write(ap.get(), a.out.c_str()), "writing " + a.out);
  spdlog::info("{} frames x {} antennas -> {} bins", frames, antennas, samples / 2);
  write_manifest(manifest_path_for(a.out, a.manifest), "preprocess", {{"cube", a.cube}}, json::array({a.out}),
                 {{"frames", frames}, {"antennas", antennas}, {"chirps", chirps}, {"samples", samples},
                  {"config", a.config.empty() ? json(nullptr) : json(a.config)}});
  return 0;
}

struct TrainArgs {
  std::string ap, temps, out, config, bins, manifest;
  std::optional<double> train_fraction, t_ref;
  double epsilon = 1e-6;
};

int run_train(const TrainArgs& a) {
  auto cfg = load_config(a.config);
  const double fraction = resolve_fraction(a.train_fraction, cfg);
  auto ap = read_amplitudes(a.ap);
  auto temps = read_temps(a.temps);
  const auto d = dims_of(ap.get());
  require_frames(d, temps.get(), "train");

  size_t boundary = 0;
  check(radarcal_split_boundary(d.frames, fraction, &boundary), "train split");
  radarcal_amplitudes* train_ap_raw = nullptr;
  radarcal_temps* train_temps_raw = nullptr;
  check(radarcal_amplitudes_slice(ap.get(), 0, boundary, &train_ap_raw), "train split");
  Amplitudes train_ap(train_ap_raw);
  check(radarcal_temps_slice(temps.get(), 0, boundary, &train_temps_raw), "train split");
  Temps train_temps(train_temps_raw);

  radarcal_fit_options opt;
  radarcal_fit_options_default(&opt);
  opt.epsilon = a.epsilon;
  if (a.t_ref) {
    opt.has_t_ref = 1;
    opt.t_ref = *a.t_ref;
  }
  std::vector<uint32_t> bins;
  if (!a.bins.empty()) {
    bins = parse_bins(a.bins);
    opt.bins = bins.data();
    opt.num_bins = bins.size();
  }

  radarcal_model* model_raw = nullptr;
  check(radarcal_fit(train_ap.get(), train_temps.get(), &opt, &model_raw), "training");
  Model model(model_raw);
  radarcal_model_info info{};
  check(radarcal_model_info_get(model.get(), &info), "model info");
  check(radarcal_model_save(model.get(), a.out.c_str()), "writing " + a.out);
  spdlog::info("trained {} bin models on frames [0, {}) of {}; t_ref = {}", info.num_bin_models, boundary, d.frames,
               info.t_ref);

  json config = {{"train_fraction", fraction},
                 {"epsilon", a.epsilon},
                 {"t_ref", info.t_ref},
                 {"t_ref_override", a.t_ref.has_value()},
                 {"bins", a.bins.empty() ? json("default") : json(bins)}};
  json split = {{"total_frames", d.frames}, {"train_frames", boundary}, {"train_end_frame", boundary}};
  config["split"] = split;
  write_manifest(manifest_path_for(a.out, a.manifest), "train", {{"ap", a.ap}, {"temps", a.temps}},
                 json::array({a.out}), config);
  return 0;
}

struct CalibrateArgs {
  std::string ap, temps, model, out, flags, manifest;
  bool clamp = false;
};

int run_calibrate(const CalibrateArgs& a) {
  auto ap = read_amplitudes(a.ap);
  auto temps = read_temps(a.temps);
  radarcal_model* model_raw = nullptr;
  check(radarcal_model_load(a.model.c_str(), &model_raw), "reading " + a.model);
  Model model(model_raw);

  radarcal_amplitudes* tcap_raw = nullptr;
  radarcal_flags* flags_raw = nullptr;
  check(radarcal_apply_correction(model.get(), ap.get(), temps.get(), a.clamp ? 1 : 0, &tcap_raw, &flags_raw),
        "calibrating");
  Amplitudes tcap(tcap_raw);
  Flags flags(flags_raw);

  const std::string flags_path = a.flags.empty() ? a.out + ".flags.csv" : a.flags;
  check(radarcal_amplitudes_write(tcap.get(), a.out.c_str()), "writing " + a.out);
  check(radarcal_flags_write(flags.get(), flags_path.c_str()), "writing " + flags_path);
  const auto n_flags = radarcal_flags_count(flags.get());
  if (n_flags > 0) spdlog::warn("{} (frame, antenna, bin) cells skipped by the epsilon guard", n_flags);
  write_manifest(manifest_path_for(a.out, a.manifest), "calibrate",
                 {{"ap", a.ap}, {"temps", a.temps}, {"model", a.model}}, json::array({a.out, flags_path}),
                 {{"clamp", a.clamp}, {"flagged_cells", n_flags}});
  return 0;
}

struct EvaluateArgs {
  std::string ap, tcap, temps, out, model, config, manifest;
  std::optional<double> train_fraction;
  bool test_only = false;
};

std::size_t boundary_from_model_manifest(const std::string& model_path) {
  const std::string path = model_path + ".manifest.json";
  std::ifstream in(path);
  if (!in) throw CliError{kExitIo, "cannot read " + path};
  try {
    return json::parse(in).at("config").at("split").at("train_end_frame").get<std::size_t>();
  } catch (const json::exception& e) {
    throw CliError{kExitValidation, path + ": no split boundary recorded (" + e.what() + ")"};
  }
}

int run_evaluate(const EvaluateArgs& a) {
  auto cfg = load_config(a.config);
  auto ap = read_amplitudes(a.ap);
  auto tcap = read_amplitudes(a.tcap);
  auto temps = read_temps(a.temps);
  const auto d = dims_of(ap.get());
  const auto dt = dims_of(tcap.get());
  if (d.frames != dt.frames || d.antennas != dt.antennas || d.bins != dt.bins)
    throw CliError{kExitValidation, "AP and TCAP dimensions differ"};
  require_frames(d, temps.get(), "evaluate");

  std::size_t begin = 0;
  json split = nullptr;
  if (a.test_only) {
    std::optional<std::size_t> from_fraction;
    if (a.train_fraction || cfg || a.model.empty()) {
      std::size_t b = 0;
      check(radarcal_split_boundary(d.frames, resolve_fraction(a.train_fraction, cfg), &b), "test split");
      from_fraction = b;
    }
    if (!a.model.empty()) {
      begin = boundary_from_model_manifest(a.model);
      if (from_fraction && *from_fraction != begin)
        throw CliError{kExitValidation, "train fraction gives boundary " + std::to_string(*from_fraction) +
                                            " but the model was trained up to frame " + std::to_string(begin)};
    } else {
      begin = *from_fraction;
    }
    if (begin > d.frames) throw CliError{kExitValidation, "split boundary lies beyond the data"};
    split = {{"first_test_frame", begin}, {"test_frames", d.frames - begin}};
  }

  Amplitudes ap_eval, tcap_eval;
  Temps temps_eval;
  {
    radarcal_amplitudes* x = nullptr;
    check(radarcal_amplitudes_slice(ap.get(), begin, d.frames, &x), "slicing AP");
    ap_eval.reset(x);
    check(radarcal_amplitudes_slice(tcap.get(), begin, d.frames, &x), "slicing TCAP");
    tcap_eval.reset(x);
    radarcal_temps* t = nullptr;
    check(radarcal_temps_slice(temps.get(), begin, d.frames, &t), "slicing temperatures");
    temps_eval.reset(t);
  }

  radarcal_report* report_raw = nullptr;
  check(radarcal_evaluate(ap_eval.get(), tcap_eval.get(), temps_eval.get(), begin, &report_raw), "evaluating");
  Report report(report_raw);

  const fs::path out(a.out);
  const fs::path stem = out.parent_path() / out.stem();
  const std::string bins_path = stem.string() + ".bins.csv";
  json outputs = json::array({a.out, bins_path});
  check(radarcal_report_write(report.get(), a.out.c_str()), "writing " + a.out);
  check(radarcal_report_write_bins(report.get(), bins_path.c_str()), "writing " + bins_path);
  json results = json::array();
  for (uint32_t ant = 0; ant < radarcal_report_num_antennas(report.get()); ++ant) {
    const std::string series = stem.string() + ".series.a" + std::to_string(ant) + ".csv";
    check(radarcal_report_write_series(report.get(), ap_eval.get(), tcap_eval.get(), temps_eval.get(), ant,
                                       series.c_str()),
          "writing " + series);
    outputs.push_back(series);

    radarcal_antenna_result r{};
    check(radarcal_report_antenna(report.get(), ant, &r), "report");
    auto opt = [](int has, double v) { return has ? json(v) : json(nullptr); };
    results.push_back({{"antenna", r.antenna},
                       {"peak_bin", r.peak_bin},
                       {"pr_ap", opt(r.has_pr_ap, r.pr_ap)},
                       {"pr_tcap", opt(r.has_pr_tcap, r.pr_tcap)},
                       {"reduction", opt(r.has_reduction, r.reduction)}});
    spdlog::info("antenna {} bin {}: PR(T,AP) = {}, PR(T,TCAP) = {}", r.antenna, r.peak_bin,
                 r.has_pr_ap ? std::to_string(r.pr_ap) : "NA", r.has_pr_tcap ? std::to_string(r.pr_tcap) : "NA");
  }
  write_manifest(manifest_path_for(a.out, a.manifest), "evaluate",
                 {{"ap", a.ap}, {"tcap", a.tcap}, {"temps", a.temps}, {"model", a.model.empty() ? json(nullptr) : json(a.model)}},
                 outputs, {{"test_only", a.test_only}, {"split", split}, {"results", results}});
  return 0;
}

int run_default_spec(const std::string& out) {
  radarcal_synth_spec* raw = nullptr;
  check(radarcal_synth_spec_default(&raw), "default spec");
  Spec spec(raw);
  check(radarcal_synth_spec_save(spec.get(), out.c_str()), "writing " + out);
  return 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("radarcal");
  logger->set_pattern("radarcal: %^%l%$: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("RADARCAL_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour names it really knows.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("ignoring unknown RADARCAL_LOG level '{}'", env);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Temperature drift compensation for FMCW radar amplitude profiles"};
  app.set_version_flag("--version", std::string(radarcal_version()));
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic cube and temperature log");
  s->add_option("spec", synth.spec, "Synthetic spec (key = value)")->required();
  s->add_option("cube", synth.cube, "Output RDC1 cube")->required();
  s->add_option("temps", synth.temps, "Output temperature CSV")->required();
  s->add_option("--seed", synth.seed, "Override the spec's seed");
  s->add_option("--threads", synth.threads, "Worker threads")->check(CLI::PositiveNumber);
  s->add_option("--manifest", synth.manifest, "Manifest path (default <cube>.manifest.json)");

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Compute amplitude profiles from an RDC1 cube");
  p->add_option("cube", pre.cube, "Input RDC1 cube")->required();
  p->add_option("out", pre.out, "Output RAP1 amplitude tensor")->required();
  p->add_option("--config", pre.config, "Acquisition config; cube dimensions must match it");
  p->add_option("--threads", pre.threads, "Worker threads")->check(CLI::PositiveNumber);
  p->add_option("--manifest", pre.manifest, "Manifest path (default <out>.manifest.json)");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Fit per-antenna, per-bin temperature models on the training slice");
  t->add_option("ap", train.ap, "Input RAP1 amplitude tensor")->required();
  t->add_option("temps", train.temps, "Input temperature CSV")->required();
  t->add_option("out", train.out, "Output model JSON")->required();
  t->add_option("--train-fraction", train.train_fraction, "Leading fraction of frames used for training (0.7)");
  t->add_option("--config", train.config, "Acquisition config (supplies train_fraction)");
  t->add_option("--epsilon", train.epsilon, "Division guard for the correction")->capture_default_str();
  t->add_option("--t-ref", train.t_ref, "Reference temperature (default: mean training temperature)");
  t->add_option("--bins", train.bins, "Bins to fit, e.g. 1,4-7 (default: all but DC)");
  t->add_option("--manifest", train.manifest, "Manifest path (default <out>.manifest.json)");

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Apply a model to amplitude profiles");
  c->add_option("ap", cal.ap, "Input RAP1 amplitude tensor")->required();
  c->add_option("temps", cal.temps, "Input temperature CSV")->required();
  c->add_option("model", cal.model, "Model JSON")->required();
  c->add_option("out", cal.out, "Output RAP1 TCAP tensor")->required();
  c->add_option("--flags", cal.flags, "Flags CSV (default <out>.flags.csv)");
  c->add_flag("--clamp", cal.clamp, "Clamp temperatures to the training range before prediction");
  c->add_option("--manifest", cal.manifest, "Manifest path (default <out>.manifest.json)");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Pearson correlation of temperature with AP and TCAP");
  e->add_option("ap", ev.ap, "Input RAP1 AP tensor")->required();
  e->add_option("tcap", ev.tcap, "Input RAP1 TCAP tensor")->required();
  e->add_option("temps", ev.temps, "Input temperature CSV")->required();
  e->add_option("out", ev.out, "Output report CSV")->required();
  e->add_flag("--test-only", ev.test_only, "Evaluate only frames after the training split");
  e->add_option("--train-fraction", ev.train_fraction, "Split used by --test-only (0.7)");
  e->add_option("--model", ev.model, "Model whose manifest records the split boundary");
  e->add_option("--config", ev.config, "Acquisition config (supplies train_fraction)");
  e->add_option("--manifest", ev.manifest, "Manifest path (default <out>.manifest.json)");

  std::string default_out;
  auto* d = app.add_subcommand("default-spec", "Write the default synthetic spec");
  d->add_option("out", default_out, "Output spec path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*s) return run_synth(synth);
    if (*p) return run_preprocess(pre);
    if (*t) return run_train(train);
    if (*c) return run_calibrate(cal);
    if (*e) return run_evaluate(ev);
    if (*d) return run_default_spec(default_out);
  } catch (const CliError& err) {
    spdlog::error("{}", err.message);
    return err.exit_code;
  } catch (const std::exception& err) {
    spdlog::error("{}", err.what());
    return kExitValidation;
  }
  return kExitValidation;
}
