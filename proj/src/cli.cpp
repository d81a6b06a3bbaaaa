/* Copyright 2026 The WaveSense Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "wavesense/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "wavesense/checkpoint.hpp"
#include "wavesense/datasets.hpp"
#include "wavesense/error.hpp"
#include "wavesense/eval.hpp"
#include "wavesense/frontend.hpp"
#include "wavesense/network.hpp"
#include "wavesense/trainer.hpp"

namespace fs = std::filesystem;

namespace wavesense::cli {

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
};

void add_config_args(CLI::App* cmd, ConfigArgs& args, const char* what) {
  cmd->add_option("--config", args.path, std::string(what) + " file (key = value lines)");
  cmd->add_option("--set", args.overrides, "Override a key: --set key=value (repeatable)");
}

KeyValueConfig load_config(const ConfigArgs& args) {
  KeyValueConfig kv = args.path.empty() ? KeyValueConfig{} : KeyValueConfig::load(args.path);
  for (const auto& o : args.overrides) kv.apply_override(o);
  return kv;
}

void log_config(std::ostream& err, const std::string& title, const std::string& text) {
  err << "# " << title << "\n";
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) err << "#   " << line << "\n";
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
  ConfigArgs config;
  std::string manifest, out, noise_dir;
  double snr_db = 5.0;
  double seconds = 5.0;
  std::size_t augment = 0;
};

FrontendConfig frontend_from(const KeyValueConfig& kv) {
  FrontendConfig f;
  if (auto v = kv.get_int("n_filters")) {
    if (*v < 1) throw ConfigError("n_filters must be >= 1");
    f.n_filters = static_cast<std::size_t>(*v);
  }
  if (auto v = kv.get_double("f_lo")) f.f_lo = *v;
  if (auto v = kv.get_double("f_hi")) f.f_hi = *v;
  if (auto v = kv.get_double("gain")) f.gain = *v;
  if (auto v = kv.get_double("theta")) f.theta = *v;
  if (auto v = kv.get_double("bin_seconds")) f.bin_seconds = *v;
  if (auto v = kv.get_double("peak")) f.peak = *v;
  return f;
}

std::string frontend_text(const FrontendConfig& f) {
  std::ostringstream s;
  s << "n_filters = " << f.n_filters << "\nf_lo = " << f.f_lo << "\nf_hi = " << f.f_hi
    << "\ngain = " << f.gain << "\ntheta = " << f.theta << "\nbin_seconds = " << f.bin_seconds
    << "\nseconds = " << f.seconds << "\npeak = " << f.peak << "\n";
  return s.str();
}

int cmd_preprocess(const PreprocessArgs& a, const Common& common, std::ostream& out,
                   std::ostream& err) {
  const KeyValueConfig kv = load_config(a.config);
  FrontendConfig fc = frontend_from(kv);
  reject_unknown_keys(kv);
  fc.seconds = a.seconds;
  log_config(err, "frontend", frontend_text(fc) + "snr_db = " + std::to_string(a.snr_db) +
                                  "\naugment = " + std::to_string(a.augment) + "\n");

  const Manifest manifest = load_manifest(a.manifest);
  for (const auto& m : manifest.missing) err << "warning: missing file " << m.string() << "\n";
  std::optional<NoisePool> pool;
  if (!a.noise_dir.empty()) {
    pool = NoisePool::scan(a.noise_dir);
    if (pool->empty()) throw MixingError("no .wav files under " + a.noise_dir);
  }
  const BiquadBank bank = design_filterbank(fc.n_filters, fc.f_lo, fc.f_hi, fc.sample_rate);
  std::mt19937_64 rng(common.seed.value_or(0));

  Dataset data;
  std::size_t skipped = 0;
  for (const auto& e : manifest.entries) {
    if (!fs::exists(e.path)) {
      ++skipped;
      continue;
    }
    const Waveform clean = read_wav(e.path);
    const bool silent = rms(clean.samples) == 0.0;
    const std::size_t copies = 1 + (e.split == Split::kTrain && pool ? a.augment : 0);
    for (std::size_t k = 0; k < copies; ++k) {
      Waveform w = clean;
      if (pool && !silent) w = mix_noise(clean, pool->pick(rng), a.snr_db);
      data.split(e.split).push_back({audio_to_raster(w, bank, fc), e.label});
    }
    data.n_classes = std::max(data.n_classes, e.label + 1);
  }
  save_dataset(a.out, data);
  out << "wrote " << data.train.size() << " train, " << data.val.size() << " val, "
      << data.test.size() << " test rasters to " << a.out;
  if (skipped) out << " (" << skipped << " missing files skipped)";
  out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  ConfigArgs config;
  std::string out;
  std::size_t stream_keywords = 20;
  std::size_t stream_gap = 150;
};

std::string spec_text(const SyntheticSpec& s) {
  std::ostringstream o;
  o << "n_classes = " << s.n_classes << "\nchannels = " << s.channels << "\nbins = " << s.bins
    << "\ndensity = " << s.density << "\njitter = " << s.jitter
    << "\nnoise_rate = " << s.noise_rate << "\nkeep_probability = " << s.keep_probability
    << "\nsamples_per_class = " << s.samples_per_class
    << "\nmin_template_difference = " << s.min_template_difference << "\nseed = " << s.seed
    << "\n";
  return o.str();
}

int cmd_synth(const SynthArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
  const KeyValueConfig kv = load_config(a.config);
  SyntheticSpec spec = SyntheticSpec::from(kv);
  reject_unknown_keys(kv);
  if (common.seed) spec.seed = *common.seed;
  log_config(err, "synthetic spec", spec_text(spec));
  const Dataset data = synth_keyword_dataset(spec);
  save_dataset(a.out, data);
  const SyntheticStream stream =
      synth_stream(spec, a.stream_keywords, a.stream_gap, spec.seed + 1);
  save_raster(fs::path(a.out) / "stream.wsras", stream.raster);
  write_stream_labels(fs::path(a.out) / "stream_labels.tsv", stream.labels);
  out << "wrote " << data.train.size() << " train, " << data.val.size() << " val, "
      << data.test.size() << " test samples and a " << stream.raster.bins()
      << "-bin stream to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  ConfigArgs config;
  std::string data, out, resume, log;
};

int cmd_train(const TrainArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
  KeyValueConfig kv = load_config(a.config);
  const Dataset data = load_dataset(a.data);
  if (data.train.empty()) throw InvalidInput("dataset has no training samples");
  if (!kv.contains("n_classes")) kv.set("n_classes", std::to_string(data.n_classes));
  if (!kv.contains("n_channels_in")) {
    kv.set("n_channels_in", std::to_string(data.train.front().raster.channels()));
  }
  const WaveSenseConfig net_config = WaveSenseConfig::from(kv);
  TrainConfig tc = TrainConfig::from(kv);
  reject_unknown_keys(kv);
  if (common.seed) tc.seed = *common.seed;
  if (common.threads || std::getenv("WAVESENSE_THREADS")) tc.threads = resolve_threads(common.threads);
  if (data.n_classes > net_config.n_classes) {
    throw ConfigError("dataset has " + std::to_string(data.n_classes) +
                      " classes, network only " + std::to_string(net_config.n_classes));
  }

  std::optional<Trainer> trainer;
  if (!a.resume.empty()) {
    Checkpoint ck = load_checkpoint(a.resume, net_config.hash());
    Trainer t(ck.network(), tc);
    t.restore(ck.optimizer, ck.state);
    trainer.emplace(std::move(t));
  } else {
    trainer.emplace(Network<float>::build(net_config, tc.seed), tc);
  }
  log_config(err, "network", net_config.to_text());
  log_config(err, "training", tc.to_text());
  err << "# parameters: " << trainer->network().parameter_count() << "\n";

  const std::string log_path = a.log.empty() ? a.out + ".metrics.ndjson" : a.log;
  std::ofstream log(log_path, std::ios::app);
  if (!log) throw FormatError("cannot open metrics log " + log_path);

  fs::path last_good;
  try {
    while (trainer->state().epoch < tc.epochs) {
      const EpochMetrics tr = trainer->train_epoch(data.train);
      log << metrics_json(tr) << "\n";
      std::string line = "epoch " + std::to_string(tr.epoch) + "  train loss " +
                         fixed(tr.loss, 4) + "  acc " + fixed(tr.accuracy, 4);
      if (!data.val.empty()) {
        EpochMetrics va = trainer->evaluate(data.val, "val");
        va.epoch = tr.epoch;
        log << metrics_json(va) << "\n";
        line += "  val loss " + fixed(va.loss, 4) + "  acc " + fixed(va.accuracy, 4);
      }
      log.flush();
      out << line << "\n";
      if (!tc.checkpoint_dir.empty()) {
        char name[64];
        std::snprintf(name, sizeof name, "epoch_%03zu.wsckpt", tr.epoch);
        last_good = fs::path(tc.checkpoint_dir) / name;
        save_checkpoint(last_good, make_checkpoint(*trainer));
      }
    }
  } catch (const SimulationDiverged& e) {
    err << "error: " << e.what() << "\n";
    if (!last_good.empty()) err << "last good checkpoint: " << last_good.string() << "\n";
    return kExitFailure;
  }
  const Checkpoint ck = make_checkpoint(*trainer);
  save_checkpoint(a.out, ck);
  out << "saved " << a.out << " (config hash " << std::hex << std::setw(16)
      << std::setfill('0') << ck.config_hash << std::dec << std::setfill(' ') << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string ckpt, data, split = "all";
};

int cmd_eval(const EvalArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
  const Checkpoint ck = load_checkpoint(a.ckpt);
  const Network<float> net = ck.network();
  const Dataset data = load_dataset(a.data);
  const std::size_t threads = resolve_threads(common.threads);
  log_config(err, "network", ck.config.to_text());
  out << "checkpoint " << a.ckpt << "  config hash " << std::hex << std::setw(16)
      << std::setfill('0') << ck.config_hash << std::dec << std::setfill(' ') << "\n";
  out << std::left << std::setw(8) << "split" << std::right << std::setw(9) << "samples"
      << std::setw(10) << "correct" << std::setw(11) << "accuracy" << "\n";
  std::vector<Split> splits{Split::kTrain, Split::kVal, Split::kTest};
  if (a.split != "all") splits = {parse_split(a.split)};
  for (Split s : splits) {
    const auto& items = data.split(s);
    if (items.empty()) continue;
    const AccuracyReport r = evaluate_accuracy(net, items, threads);
    out << std::left << std::setw(8) << split_name(s) << std::right << std::setw(9) << r.total
        << std::setw(10) << r.correct << std::setw(11) << fixed(r.accuracy(), 4) << "\n";
    for (const auto& c : r.per_class) {
      if (c.total == 0) continue;
      out << "  class " << std::left << std::setw(4) << c.cls << std::right << std::setw(5)
          << c.total << std::setw(10) << c.correct << std::setw(11)
          << fixed(static_cast<double>(c.correct) / c.total, 4) << "\n";
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct StreamArgs {
  std::string ckpt, stream, labels, sweep_table;
  double target_faph = 0.5;
  double lockout = kDefaultLockoutSeconds;
  double match_window = kDefaultMatchWindowSeconds;
  std::optional<double> threshold;
  std::size_t grid_points = 101;
};

int cmd_stream(const StreamArgs& a, const Common&, std::ostream& out, std::ostream& err) {
  const Checkpoint ck = load_checkpoint(a.ckpt);
  const Network<float> net = ck.network();
  const SpikeRaster stream = load_raster(a.stream);
  const auto labels = read_stream_labels(a.labels);
  err << "# lockout = " << a.lockout << " s, match_window = " << a.match_window
      << " s, target_faph = " << a.target_faph << "\n";
  const OutputTrace trace = stream_trace(net, stream);
  const double hours = stream.bins() * static_cast<double>(stream.dt) / 3600.0;
  out << "stream " << stream.bins() << " bins (" << fixed(hours * 3600.0, 2) << " s), "
      << labels.size() << " keywords\n";
  if (a.threshold) {
    const auto dets = detect_on_trace(trace, *a.threshold, a.lockout);
    const auto m = compute_frr_faph(dets, labels, hours, a.match_window);
    out << "threshold " << *a.threshold << "  detections " << dets.size() << "  frr "
        << fixed(m.frr, 4) << "  faph " << fixed(m.faph, 2) << "\n";
    return kExitOk;
  }
  const SweepResult r = threshold_sweep(trace, labels, a.target_faph,
                                        threshold_grid(trace, a.grid_points), a.lockout,
                                        a.match_window);
  if (!a.sweep_table.empty()) {
    std::ofstream t(a.sweep_table);
    if (!t) throw FormatError("cannot write " + a.sweep_table);
    t << "threshold\tfrr\tfaph\thits\tfalse_alarms\n";
    for (const auto& p : r.table) {
      t << p.threshold << '\t' << p.metrics.frr << '\t' << p.metrics.faph << '\t'
        << p.metrics.hits << '\t' << p.metrics.false_alarms << '\n';
    }
  }
  out << "operating point: threshold " << r.threshold << "  frr " << fixed(r.metrics.frr, 4)
      << "  faph " << fixed(r.metrics.faph, 2) << "  (target faph " << a.target_faph << ")\n";
  if (!r.met_target) {
    out << "warning: no threshold reaches the target; reported the strictest threshold\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
  ConfigArgs config;
  std::size_t bins = 60;
  double density = 0.05;
  double eps = 1e-3;
  double weight_scaling = 0.1;
  double fraction = 0.02;
  std::size_t min_checked = 200;
  double tolerance = 1e-4;
};

int cmd_gradcheck(const GradcheckArgs& a, const Common& common, std::ostream& out,
                  std::ostream& err) {
  const KeyValueConfig kv = load_config(a.config);
  WaveSenseConfig config = WaveSenseConfig::from(kv);
  reject_unknown_keys(kv);
  config.weight_scaling = a.weight_scaling;
  log_config(err, "network", config.to_text());
  const std::uint64_t seed = common.seed.value_or(0);
  const Network<double> net = Network<double>::build(config, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::bernoulli_distribution fire(a.density);
  SpikeRaster input(config.n_channels_in, a.bins);
  for (auto& c : input.counts.data()) c = fire(rng) ? 1 : 0;
  const GradientCheckReport r =
      gradient_check(net, input, a.eps, a.fraction, seed, a.min_checked);
  out << "checked " << r.checked << " of " << net.parameter_count()
      << " parameters (spiking disabled)\n";
  out << "max relative error " << std::scientific << std::setprecision(3)
      << r.max_relative_error << std::defaultfloat << "\n";
  const bool ok = r.max_relative_error < a.tolerance && r.replay_identical;
  out << (ok ? "PASS" : "FAIL") << " (tolerance " << a.tolerance << ")\n";
  return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
  ConfigArgs config;
  std::string ckpt, preset;
};

int cmd_inspect(const InspectArgs& a, const Common&, std::ostream& out, std::ostream& err) {
  WaveSenseConfig config;
  std::optional<Checkpoint> ck;
  const int sources = !a.ckpt.empty() + !a.preset.empty();
  if (sources > 1) throw UsageError("give at most one of --ckpt and --preset");
  if (!a.ckpt.empty()) {
    ck = load_checkpoint(a.ckpt);
    config = ck->config;
  } else {
    KeyValueConfig kv = load_config(a.config);
    if (!a.preset.empty()) {
      WaveSenseConfig base;
      if (a.preset == "aloha") base = aloha_config();
      else if (a.preset == "heysnips") base = heysnips_config();
      else if (a.preset == "speech-commands") base = speech_commands_config();
      else throw UsageError("unknown preset '" + a.preset + "'");
      KeyValueConfig merged = KeyValueConfig::parse(base.to_text());
      for (const auto& [k, v] : kv.entries()) merged.set(k, v);
      kv = merged;
    }
    config = WaveSenseConfig::from(kv);
    reject_unknown_keys(kv);
  }
  log_config(err, "network", config.to_text());
  const Network<float> net = ck ? ck->network() : Network<float>(config);

  out << "parameters\n";
  const auto& params = net.parameters();
  for (ParamId p = 0; p < params.size(); ++p) {
    const auto& v = params.value(p);
    out << "  " << std::left << std::setw(22) << params.name(p) << std::right << std::setw(4)
        << v.rows() << " x " << std::left << std::setw(4) << v.cols() << std::right
        << std::setw(8) << v.size() << "\n";
  }
  out << "  total " << net.parameter_count() << "\n";
  out << "neurons " << net.neuron_count() << "\n";
  out << "time constants (bins)\n";
  out << "  tau_s " << config.tau_s << "  tau_v " << config.tau_v << "  tau_lp "
      << config.readout_tau() << "\n";
  out << "  slow synapse per block:";
  for (std::size_t d : config.dilations) out << " " << d;
  out << "\n";
  const double memory = temporal_memory(config);
  out << "temporal memory " << memory << " bins (" << memory * kDefaultBinSeconds << " s)\n";
  out << "state footprint per block (dilation, wavenet buffer, wavesense state)\n";
  std::size_t buf = 0, state = 0;
  for (const auto& f : state_footprint(config)) {
    out << "  " << std::setw(4) << f.dilation << std::setw(8) << f.wavenet_buffer
        << std::setw(6) << f.wavesense_state << "\n";
    buf += f.wavenet_buffer;
    state += f.wavesense_state;
  }
  out << "  total " << buf << " vs " << state << "\n";
  return kExitOk;
}

int classify_error(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidParameter*>(&e) ||
      dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const UsageError*>(&e) ||
      dynamic_cast<const DesignError*>(&e)) {
    return kExitInvalid;
  }
  return kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Spiking keyword-spotting toolkit", "wavesense");
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Random seed");
  app.add_option("--threads", common.threads, "Worker threads (default: $WAVESENSE_THREADS or 1)");

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Convert a WAV manifest to spike rasters");
  c_pre->add_option("--manifest", pre.manifest, "Manifest (path, label, split)")->required();
  c_pre->add_option("--out", pre.out, "Output dataset directory")->required();
  c_pre->add_option("--noise-dir", pre.noise_dir, "Directory of noise WAVs");
  c_pre->add_option("--snr-db", pre.snr_db, "Signal-to-noise ratio of the noise mix");
  c_pre->add_option("--seconds", pre.seconds, "Clip length after padding or cropping");
  c_pre->add_option("--augment", pre.augment, "Extra noisy copies per training clip");
  add_config_args(c_pre, pre.config, "Frontend");

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth-data", "Generate the synthetic keyword dataset");
  c_syn->add_option("--spec", syn.config.path, "Synthetic spec file");
  c_syn->add_option("--set", syn.config.overrides, "Override a spec key (repeatable)");
  c_syn->add_option("--out", syn.out, "Output directory")->required();
  c_syn->add_option("--stream-keywords", syn.stream_keywords, "Keywords in the test stream");
  c_syn->add_option("--stream-gap", syn.stream_gap, "Background bins between keywords");

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train a network with BPTT");
  add_config_args(c_tr, tr.config, "Network and training");
  c_tr->add_option("--data", tr.data, "Dataset directory")->required();
  c_tr->add_option("--out", tr.out, "Output checkpoint")->required();
  c_tr->add_option("--resume", tr.resume, "Checkpoint to resume from");
  c_tr->add_option("--log", tr.log, "Metrics log (default: <out>.metrics.ndjson)");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Clip classification accuracy");
  c_ev->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  c_ev->add_option("--data", ev.data, "Dataset directory")->required();
  c_ev->add_option("--split", ev.split, "train, val, test or all");

  StreamArgs st;
  auto* c_st = app.add_subcommand("stream", "Continuous-stream FRR / FAPH");
  c_st->add_option("--ckpt", st.ckpt, "Checkpoint")->required();
  c_st->add_option("--stream", st.stream, "Stream raster")->required();
  c_st->add_option("--labels", st.labels, "Keyword labels (class, start, end)")->required();
  c_st->add_option("--target-faph", st.target_faph, "False alarms per hour target");
  c_st->add_option("--lockout", st.lockout, "Seconds between detections of one class");
  c_st->add_option("--match-window", st.match_window, "Slack around labels, seconds");
  c_st->add_option("--threshold", st.threshold, "Evaluate one threshold instead of sweeping");
  c_st->add_option("--grid", st.grid_points, "Number of sweep thresholds");
  c_st->add_option("--sweep-table", st.sweep_table, "Write the full sweep as TSV");

  GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  add_config_args(c_gc, gc.config, "Network");
  c_gc->add_option("--bins", gc.bins, "Input length");
  c_gc->add_option("--eps", gc.eps, "Central-difference step");
  c_gc->add_option("--weight-scaling", gc.weight_scaling,
                   "Init scale; without spiking each layer amplifies its input, so large "
                   "scales push the loss beyond double precision");
  c_gc->add_option("--fraction", gc.fraction, "Fraction of parameters checked");
  c_gc->add_option("--min-checked", gc.min_checked, "Minimum parameters checked");
  c_gc->add_option("--tolerance", gc.tolerance, "Maximum relative error");

  InspectArgs in;
  auto* c_in = app.add_subcommand("inspect", "Parameter counts, time constants, footprint");
  c_in->add_option("--ckpt", in.ckpt, "Checkpoint");
  c_in->add_option("--preset", in.preset, "aloha, heysnips or speech-commands");
  add_config_args(c_in, in.config, "Network");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (*c_pre) return cmd_preprocess(pre, common, out, err);
    if (*c_syn) return cmd_synth(syn, common, out, err);
    if (*c_tr) return cmd_train(tr, common, out, err);
    if (*c_ev) return cmd_eval(ev, common, out, err);
    if (*c_st) return cmd_stream(st, common, out, err);
    if (*c_gc) return cmd_gradcheck(gc, common, out, err);
    if (*c_in) return cmd_inspect(in, common, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return classify_error(e);
  }
  err << app.help();
  return kExitInvalid;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace wavesense::cli
