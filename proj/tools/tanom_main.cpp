// tanom: weakly-supervised temporal anomaly localization toolkit.
//
// Subcommands: synth | train | propose | eval | gradcheck. Hyperparameter
// defaults are the reference training configuration, so the zero-flag path is
// the reproducible baseline. Exit codes: 0 success, 1 runtime failure,
// 2 usage/validation error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tanom/checkpoint.hpp"
#include "tanom/error.hpp"
#include "tanom/gradcheck.hpp"
#include "tanom/kernels.hpp"
#include "tanom/manifest.hpp"
#include "tanom/metrics.hpp"
#include "tanom/proposals.hpp"
#include "tanom/run_manifest.hpp"
#include "tanom/synthetic.hpp"
#include "tanom/trainer.hpp"

namespace fs = std::filesystem;
using namespace tanom;

namespace {

constexpr const char* kVersion = "0.1.0";

IntRange parse_range(const std::string& text) {
  const auto comma = text.find(',');
  IntRange r;
  try {
    if (comma == std::string::npos) {
      r.lo = r.hi = std::stoi(text);
    } else {
      r.lo = std::stoi(text.substr(0, comma));
      r.hi = std::stoi(text.substr(comma + 1));
    }
  } catch (const std::exception&) {
    throw ConfigError("cannot parse range '" + text + "' (expected LO,HI or a single value)");
  }
  return r;
}

std::string range_to_string(IntRange r) {
  return std::to_string(r.lo) + "," + std::to_string(r.hi);
}

struct SynthArgs {
  int videos = 40;
  std::string t_range = "20,40";
  int dim = 16;
  double anomaly_frac = 0.5;
  std::string window = "4,8";
  double noise = 0.25;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_synth(const SynthArgs& args) {
  SynthConfig cfg;
  cfg.num_videos = args.videos;
  cfg.t_range = parse_range(args.t_range);
  cfg.D = args.dim;
  cfg.anomaly_fraction = args.anomaly_frac;
  cfg.window_range = parse_range(args.window);
  cfg.noise_scale = args.noise;
  cfg.seed = args.seed;
  validate(cfg);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir / "features");
  const auto dataset = generate_synthetic(cfg);
  for (std::size_t i = 0; i < dataset.sequences.size(); ++i) {
    write_features(dataset.sequences[i], out_dir / dataset.records[i].feature_path);
  }
  write_manifest(dataset.records, out_dir / "manifest.txt");

  RunManifest rm;
  rm.tool_version = kVersion;
  rm.command = "synth";
  rm.add("videos", static_cast<std::int64_t>(cfg.num_videos));
  rm.add("t_range", range_to_string(cfg.t_range));
  rm.add("dim", static_cast<std::int64_t>(cfg.D));
  rm.add("anomaly_frac", cfg.anomaly_fraction);
  rm.add("anomaly_window", range_to_string(cfg.window_range));
  rm.add("noise", cfg.noise_scale);
  rm.add("seed", cfg.seed);
  rm.add("manifest", (out_dir / "manifest.txt").string());
  write_run_manifest(rm, out_dir / "run_manifest.txt");

  int anomalous = 0;
  for (const auto& rec : dataset.records) {
    anomalous += rec.label;
  }
  std::cout << "wrote " << dataset.records.size() << " videos (" << anomalous << " anomalous, D="
            << cfg.D << ") under " << out_dir.string() << "\n";
  return 0;
}

struct TrainArgs {
  std::string manifest;
  std::string out;
  double lr1 = 1e-4;
  int epochs1 = 10;
  double lr2 = 1e-5;
  int epochs2 = 40;
  int batch = 8;
  double alpha = 2e-8;
  double beta = 0.002;
  double gamma = 0.5;
  bool no_align = false;
  int block = 3;
  int attn_hidden = 64;
  int clf_hidden = 32;
  int conv_kernel = 3;
  int conv_channels = 0;
  std::uint64_t seed = 1;
  std::uint64_t model_seed = 7;
  bool quiet = false;
};

int cmd_train(const TrainArgs& args) {
  const auto data = load_dataset(args.manifest);
  if (data.empty()) {
    throw ConfigError("manifest lists no videos: " + args.manifest);
  }

  ModelConfig mc;
  mc.D = static_cast<int>(data.front().seq.D);
  mc.conv_kernel = args.conv_kernel;
  mc.conv_channels = args.conv_channels;
  mc.attn_hidden = args.attn_hidden;
  mc.clf_hidden = args.clf_hidden;
  mc.seed = args.model_seed;

  TrainConfig tc;
  tc.lr_phase1 = args.lr1;
  tc.epochs_phase1 = args.epochs1;
  tc.lr_phase2 = args.lr2;
  tc.epochs_phase2 = args.epochs2;
  tc.batch_size = args.batch;
  tc.weights = {args.alpha, args.beta, args.no_align ? 0.0 : args.gamma};
  tc.augment.block_len = args.block;
  tc.seed = args.seed;
  validate(tc);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);

  const auto result =
      train(mc, data, tc, [&](const ModelParams& p, int epoch, int phase, bool final) {
        if (final) {
          save_checkpoint(p, out_dir / "model.tanm");
        } else if (phase == 1) {
          save_checkpoint(p, out_dir / "model.phase1.tanm");
        }
        if (!args.quiet) {
          std::cout << "checkpoint at epoch " << epoch << (final ? " (final)" : "") << "\n";
        }
      });
  write_trainlog(result.log, out_dir / "trainlog.txt");

  if (!args.quiet) {
    for (const auto& e : result.log.epochs) {
      std::ostringstream line;
      line.precision(6);
      line << "epoch " << e.epoch << " lr " << e.lr << " total " << e.mean.total << " cl "
           << e.mean.cl << " a " << e.mean.a;
      std::cout << line.str() << "\n";
    }
  }

  RunManifest rm;
  rm.tool_version = kVersion;
  rm.command = "train";
  rm.add("manifest", args.manifest);
  rm.add("lr1", tc.lr_phase1);
  rm.add("epochs1", static_cast<std::int64_t>(tc.epochs_phase1));
  rm.add("lr2", tc.lr_phase2);
  rm.add("epochs2", static_cast<std::int64_t>(tc.epochs_phase2));
  rm.add("batch", static_cast<std::int64_t>(tc.batch_size));
  rm.add("alpha", tc.weights.alpha);
  rm.add("beta", tc.weights.beta);
  rm.add("gamma", tc.weights.gamma);
  rm.add("block", static_cast<std::int64_t>(tc.augment.block_len));
  rm.add("attn_hidden", static_cast<std::int64_t>(mc.attn_hidden));
  rm.add("clf_hidden", static_cast<std::int64_t>(mc.clf_hidden));
  rm.add("conv_kernel", static_cast<std::int64_t>(mc.conv_kernel));
  rm.add("conv_channels", static_cast<std::int64_t>(mc.channels()));
  rm.add("seed", tc.seed);
  rm.add("model_seed", mc.seed);
  rm.add("kernels", std::string(kernels::backend_name(kernels::active_backend())));
  rm.add("checkpoint", (out_dir / "model.tanm").string());
  rm.add("trainlog", (out_dir / "trainlog.txt").string());
  write_run_manifest(rm, out_dir / "run_manifest.txt");

  std::cout << "trained " << result.log.epochs.size() << " epochs over " << data.size()
            << " videos; checkpoint at " << (out_dir / "model.tanm").string() << "\n";
  return 0;
}

struct ProposeArgs {
  std::string manifest;
  std::string checkpoint;
  std::string out;
  double thr = kDefaultThreshold;
};

int cmd_propose(const ProposeArgs& args) {
  const auto params = load_checkpoint(args.checkpoint);
  const auto data = load_dataset(args.manifest);

  std::ofstream os(args.out, std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot open proposal file for write: " + args.out);
  }
  std::size_t total = 0;
  for (const auto& video : data) {
    const auto proposals =
        generate_proposals(params, video.seq, args.thr, video.rec.frames_per_segment);
    write_proposals(proposals, video.rec.id, os);
    total += proposals.size();
  }
  os.close();

  RunManifest rm;
  rm.tool_version = kVersion;
  rm.command = "propose";
  rm.add("manifest", args.manifest);
  rm.add("checkpoint", args.checkpoint);
  rm.add("thr", args.thr);
  rm.add("proposals", args.out);
  write_run_manifest(rm, fs::path(args.out).string() + ".run");

  std::cout << "wrote " << total << " proposals for " << data.size() << " videos to " << args.out
            << "\n";
  return 0;
}

struct EvalArgs {
  std::string manifest;
  std::string checkpoint;
  std::string out;
  std::string dump_traces;
  std::string segment_score = "wtcam";
  double thr = kDefaultThreshold;
};

SegmentScoreKind parse_score_kind(const std::string& name) {
  if (name == "lambda") return SegmentScoreKind::Lambda;
  if (name == "tcam") return SegmentScoreKind::Tcam;
  if (name == "wtcam") return SegmentScoreKind::Wtcam;
  throw ConfigError("unknown segment score kind '" + name + "'");
}

void dump_trace_files(const ModelParams& params, const std::vector<LoadedVideo>& data, double thr,
                      const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& video : data) {
    const ScoreTrace trace = compute_tcam(params, video.seq);
    const auto proposals =
        generate_proposals(params, video.seq, thr, video.rec.frames_per_segment);
    std::vector<double> proposal_score(video.seq.T, 0.0);
    for (const auto& p : proposals) {
      for (int t = p.t_start; t <= p.t_end; ++t) {
        proposal_score[t] = p.score;
      }
    }
    std::ofstream os(dir / (video.rec.id + ".txt"), std::ios::trunc);
    os << "# t lambda tcam wtcam proposal_score gt\n";
    os.precision(17);
    for (std::uint32_t t = 0; t < video.seq.T; ++t) {
      const int gt = video.rec.segment_labels ? (*video.rec.segment_labels)[t] : -1;
      os << t << ' ' << trace.lambda[t] << ' ' << trace.tcam[t] << ' ' << trace.wtcam[t] << ' '
         << proposal_score[t] << ' ' << gt << '\n';
    }
  }
}

int cmd_eval(const EvalArgs& args) {
  const auto params = load_checkpoint(args.checkpoint);
  const auto data = load_dataset(args.manifest);

  EvalOptions opts;
  opts.thr = args.thr;
  opts.segment_score = parse_score_kind(args.segment_score);

  for (const auto& video : data) {
    if (!video.rec.segment_labels) {
      throw ConfigError("record '" + video.rec.id +
                        "' has no segment_labels; eval needs ground truth");
    }
  }

  const auto report = evaluate(params, data, opts);
  std::cout << format_report(report);
  std::cout << format_report_line(report) << "\n";

  if (!args.out.empty()) {
    std::ofstream os(args.out, std::ios::trunc);
    if (!os) {
      throw std::runtime_error("cannot open report file for write: " + args.out);
    }
    os << format_report(report);
    os << format_report_line(report) << "\n";
    os.close();

    RunManifest rm;
    rm.tool_version = kVersion;
    rm.command = "eval";
    rm.add("manifest", args.manifest);
    rm.add("checkpoint", args.checkpoint);
    rm.add("thr", opts.thr);
    rm.add("segment_score", args.segment_score);
    rm.add("report", args.out);
    write_run_manifest(rm, fs::path(args.out).string() + ".run");
  }
  if (!args.dump_traces.empty()) {
    dump_trace_files(params, data, opts.thr, args.dump_traces);
  }
  return 0;
}

struct GradcheckArgs {
  int instances = 20;
  std::uint64_t seed = 2024;
  double epsilon = 1e-5;
  double threshold = 1e-4;
  bool perturb = false;
  std::string out;
};

int cmd_gradcheck(const GradcheckArgs& args) {
  GradCheckConfig cfg;
  cfg.instances = args.instances;
  cfg.epsilon = args.epsilon;
  cfg.threshold = args.threshold;
  cfg.seed = args.seed;
  cfg.perturb = args.perturb;

  const auto result = run_gradcheck(cfg);
  const bool ok = result.passed(cfg.threshold);
  std::cout.precision(6);
  std::cout << "gradcheck: " << result.coords_checked << " coordinates over " << result.instances
            << " instances, max relative error " << result.max_rel_err << " at "
            << result.worst_coord << " -> " << (ok ? "PASS" : "FAIL") << "\n";

  if (!args.out.empty()) {
    RunManifest rm;
    rm.tool_version = kVersion;
    rm.command = "gradcheck";
    rm.add("instances", static_cast<std::int64_t>(cfg.instances));
    rm.add("seed", cfg.seed);
    rm.add("epsilon", cfg.epsilon);
    rm.add("threshold", cfg.threshold);
    rm.add("max_rel_err", result.max_rel_err);
    rm.add("worst", result.worst_coord);
    write_run_manifest(rm, args.out);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly-supervised temporal anomaly localization toolkit"};
  app.set_version_flag("--version", std::string("tanom ") + kVersion);
  app.require_subcommand(1);

  std::string kernel_backend = "auto";
  app.add_option("--kernels", kernel_backend, "arithmetic kernel backend")
      ->check(CLI::IsMember({"auto", "scalar", "avx2", "neon"}))
      ->capture_default_str();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic planted-anomaly dataset");
  synth_cmd->add_option("--videos", synth.videos, "number of videos")->capture_default_str();
  synth_cmd->add_option("--t-range", synth.t_range, "segment count range LO,HI")
      ->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim, "feature dimension")->capture_default_str();
  synth_cmd->add_option("--anomaly-frac", synth.anomaly_frac, "fraction of anomalous videos")
      ->capture_default_str();
  synth_cmd->add_option("--anomaly-window", synth.window, "anomaly window length range LO,HI")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "noise scale")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "dataset seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "output directory")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a model on a manifest");
  train_cmd->add_option("--manifest", train_args.manifest, "dataset manifest")->required();
  train_cmd->add_option("--out", train_args.out, "output directory")->required();
  train_cmd->add_option("--lr1", train_args.lr1, "phase-1 learning rate")->capture_default_str();
  train_cmd->add_option("--epochs1", train_args.epochs1, "phase-1 epochs")->capture_default_str();
  train_cmd->add_option("--lr2", train_args.lr2, "phase-2 learning rate")->capture_default_str();
  train_cmd->add_option("--epochs2", train_args.epochs2, "phase-2 epochs")->capture_default_str();
  train_cmd->add_option("--batch", train_args.batch, "batch size")->capture_default_str();
  train_cmd->add_option("--alpha", train_args.alpha, "sparsity weight")->capture_default_str();
  train_cmd->add_option("--beta", train_args.beta, "smoothness weight")->capture_default_str();
  train_cmd->add_option("--gamma", train_args.gamma, "alignment weight")->capture_default_str();
  train_cmd->add_flag("--no-align", train_args.no_align, "disable the alignment term (gamma=0)");
  train_cmd->add_option("--block", train_args.block, "augmentation block length")
      ->capture_default_str();
  train_cmd->add_option("--attn-hidden", train_args.attn_hidden, "attention hidden width")
      ->capture_default_str();
  train_cmd->add_option("--clf-hidden", train_args.clf_hidden, "classifier hidden width")
      ->capture_default_str();
  train_cmd->add_option("--conv-kernel", train_args.conv_kernel, "causal conv taps")
      ->capture_default_str();
  train_cmd->add_option("--conv-channels", train_args.conv_channels,
                        "conv output channels (0 = feature dim)")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_args.seed, "training seed")->capture_default_str();
  train_cmd->add_option("--model-seed", train_args.model_seed, "weight init seed")
      ->capture_default_str();
  train_cmd->add_flag("--quiet", train_args.quiet, "suppress per-epoch output");

  ProposeArgs propose;
  auto* propose_cmd = app.add_subcommand("propose", "emit temporal proposals per video");
  propose_cmd->add_option("--manifest", propose.manifest, "dataset manifest")->required();
  propose_cmd->add_option("--checkpoint", propose.checkpoint, "model checkpoint")->required();
  propose_cmd->add_option("--out", propose.out, "proposal output file")->required();
  propose_cmd->add_option("--thr", propose.thr, "weighted score threshold")
      ->capture_default_str();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "report metrics at all four granularities");
  eval_cmd->add_option("--manifest", eval_args.manifest, "dataset manifest with ground truth")
      ->required();
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "model checkpoint")->required();
  eval_cmd->add_option("--out", eval_args.out, "write the report here as well");
  eval_cmd->add_option("--dump-traces", eval_args.dump_traces,
                       "dump per-video score columns into this directory");
  eval_cmd->add_option("--segment-score", eval_args.segment_score,
                       "score feeding the segment/frame rows")
      ->check(CLI::IsMember({"lambda", "tcam", "wtcam"}))
      ->capture_default_str();
  eval_cmd->add_option("--thr", eval_args.thr, "weighted score threshold")->capture_default_str();

  GradcheckArgs gradcheck;
  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "certify analytic gradients against finite differences");
  gradcheck_cmd->add_option("--instances", gradcheck.instances, "random instances")
      ->capture_default_str();
  gradcheck_cmd->add_option("--seed", gradcheck.seed, "instance seed")->capture_default_str();
  gradcheck_cmd->add_option("--epsilon", gradcheck.epsilon, "central difference step")
      ->capture_default_str();
  gradcheck_cmd->add_option("--threshold", gradcheck.threshold, "max relative error to pass")
      ->capture_default_str();
  gradcheck_cmd->add_flag("--perturb-grad", gradcheck.perturb,
                          "fault injection: corrupt one analytic gradient (must fail)");
  gradcheck_cmd->add_option("--out", gradcheck.out, "write a run manifest here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    kernels::select_backend_by_name(kernel_backend);
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (propose_cmd->parsed()) return cmd_propose(propose);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(gradcheck);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ManifestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
