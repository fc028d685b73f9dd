// Command-line front end: synthetic corpus generation, supervised
// pretraining, image-to-video transfer fine-tuning, video evaluation,
// resolution/depth/fps sweeps, and the gradient check suite.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "dcn/data_io.hpp"
#include "dcn/errors.hpp"
#include "dcn/gradcheck.hpp"
#include "dcn/netspec.hpp"
#include "dcn/trainer.hpp"
#include "dcn/transfer.hpp"
#include "dcn/videopipe.hpp"

namespace fs = std::filesystem;
using namespace dcn;

namespace {

struct ArchFlags {
  std::size_t depth = 2;
  std::size_t resolution = 32;
  std::size_t fc1_width = 4096;
  std::size_t fc2_width = 1024;
  double init_scale = 0.01;
};

struct TrainFlags {
  TrainConfig cfg;
};

void add_arch_flags(CLI::App* app, ArchFlags& a) {
  app->add_option("--depth", a.depth, "Convolution layer count (2-5)")
      ->check(CLI::IsMember({2, 3, 4, 5}));
  app->add_option("--resolution", a.resolution, "Input image resolution")
      ->check(CLI::IsMember({32, 64, 128, 256}));
  app->add_option("--fc1-width", a.fc1_width, "First FC layer width");
  app->add_option("--fc2-width", a.fc2_width, "Second FC layer width");
  app->add_option("--init-scale", a.init_scale, "Gaussian init std");
}

void add_train_flags(CLI::App* app, TrainFlags& t) {
  app->add_option("--epochs", t.cfg.epochs, "Training cycles (full passes)");
  app->add_option("--lr", t.cfg.learning_rate, "Initial learning rate");
  app->add_option("--momentum", t.cfg.momentum, "Momentum coefficient");
  app->add_option("--weight-decay", t.cfg.weight_decay, "L2 weight decay");
  app->add_option("--batch-size", t.cfg.batch_size, "Mini-batch size");
  app->add_option("--seed", t.cfg.seed, "Random seed");
  app->add_flag("--step-decay", t.cfg.step_decay, "Enable step LR decay");
  app->add_option("--decay-every", t.cfg.decay_every,
                  "Epoch interval for step decay");
  app->add_option("--decay-factor", t.cfg.decay_factor, "Step decay factor");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw format_error("cannot write " + path.string());
  os << text;
}

// resolved-config snapshot: printed and saved in the run directory
void emit_config(const fs::path& out_dir,
                 const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
  std::cout << "resolved config:\n" << os.str();
  write_text(out_dir / "config.txt", os.str());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::size_t conv_depth(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (const auto& l : spec.trunk)
    if (l.kind == LayerKind::conv) ++n;
  return n;
}

Dataset subsample_dataset(const Dataset& ds, std::size_t n) {
  if (n == 0 || n >= ds.entries.size()) return ds;
  Dataset out;
  out.class_count = ds.class_count;
  out.split = ds.split;
  out.entries.assign(ds.entries.begin(),
                     ds.entries.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out) {
  fs::create_directories(out);
  SynthCorpus corpus = synth_two_domain(cfg);
  write_synth_corpus(corpus, out);
  emit_config(out, {{"command", "synth"},
                    {"seed", std::to_string(cfg.seed)},
                    {"classes", std::to_string(cfg.class_count)},
                    {"image_train", std::to_string(cfg.image_train_size)},
                    {"image_test", std::to_string(cfg.image_test_size)},
                    {"video_train", std::to_string(cfg.video_train_count)},
                    {"video_test", std::to_string(cfg.video_test_count)},
                    {"frames_per_video", std::to_string(cfg.frames_per_video)},
                    {"frame_interval", fmt(cfg.frame_interval)},
                    {"resolution", std::to_string(cfg.resolution)},
                    {"noise", fmt(cfg.noise)}});
  std::cout << "wrote corpus to " << out << "\n";
  return 0;
}

int cmd_pretrain(const std::string& images, const std::string& heldout,
                 const ArchFlags& arch, const TrainFlags& tf,
                 const std::string& out) {
  fs::create_directories(out);
  TrainData data;
  data.primary = load_manifest(images);
  data.primary_head = "image";
  if (!heldout.empty()) data.heldout = load_manifest(heldout);

  NetworkSpec spec = build_architecture(
      arch.depth, arch.resolution,
      {{"image", data.primary.class_count, LabelMode::single}}, arch.fc2_width,
      arch.fc1_width);
  ParamStore params = init_params(spec, tf.cfg.seed, arch.init_scale);

  emit_config(out, {{"command", "pretrain"},
                    {"images", images},
                    {"heldout", heldout},
                    {"depth", std::to_string(arch.depth)},
                    {"resolution", std::to_string(arch.resolution)},
                    {"fc1_width", std::to_string(arch.fc1_width)},
                    {"fc2_width", std::to_string(arch.fc2_width)},
                    {"classes", std::to_string(data.primary.class_count)},
                    {"epochs", std::to_string(tf.cfg.epochs)},
                    {"lr", fmt(tf.cfg.learning_rate)},
                    {"momentum", fmt(tf.cfg.momentum)},
                    {"weight_decay", fmt(tf.cfg.weight_decay)},
                    {"batch_size", std::to_string(tf.cfg.batch_size)},
                    {"seed", std::to_string(tf.cfg.seed)}});

  std::ofstream log(fs::path(out) / "train_log.csv");
  log << "epoch,head,train_loss,heldout_loss,heldout_metric\n";
  train(spec, params, data, tf.cfg, &log);
  save_checkpoint(spec, params, (fs::path(out) / "checkpoint.ckpt").string());
  std::cout << "checkpoint: " << (fs::path(out) / "checkpoint.ckpt").string()
            << "\n";
  return 0;
}

int cmd_transfer(const std::string& videos_path,
                 const std::string& test_videos_path,
                 const std::string& init, const std::string& policy_str,
                 const std::string& augment, double fps, bool single_label,
                 const ArchFlags& arch, bool arch_explicit,
                 const TrainFlags& tf, const std::string& out) {
  fs::create_directories(out);
  const FreezePolicy policy = freeze_policy_from_string(policy_str);

  auto train_videos = load_video_manifest(videos_path);
  if (train_videos.empty()) throw config_error("no training videos");
  std::size_t video_classes = 0;
  for (const auto& v : train_videos)
    for (std::size_t l : v.labels)
      video_classes = std::max(video_classes, l + 1);

  TrainData data;
  data.primary = frames_dataset(train_videos, fps, video_classes);
  data.primary_head = "video";
  std::vector<HeadSpec> heads = {
      {"video", video_classes,
       single_label ? LabelMode::single : LabelMode::multi}};
  if (!augment.empty()) {
    data.augment_images = load_manifest(augment);
    data.augment_head = "image";
    heads.push_back({"image", data.augment_images.class_count,
                     LabelMode::single});
  }

  const bool random_init = init == "random";
  emit_config(
      out, {{"command", "transfer"},
            {"videos", videos_path},
            {"test_videos", test_videos_path},
            {"init", init},
            {"policy", policy_str},
            {"augment", augment},
            {"fps", fmt(fps)},
            {"epochs", std::to_string(tf.cfg.epochs)},
            {"lr", fmt(tf.cfg.learning_rate)},
            {"seed", std::to_string(tf.cfg.seed)},
            {"frames", std::to_string(data.primary.entries.size())}});

  NetworkSpec spec;
  ParamStore params;
  std::ofstream log(fs::path(out) / "train_log.csv");
  log << "epoch,head,train_loss,heldout_loss,heldout_metric\n";
  if (random_init) {
    spec = build_architecture(arch.depth, arch.resolution, heads,
                              arch.fc2_width, arch.fc1_width);
    params = init_params(spec, tf.cfg.seed, arch.init_scale);
    apply_freeze_policy(params, policy);
    train(spec, params, data, tf.cfg, &log);
  } else {
    Checkpoint source = load_checkpoint(init);
    if (arch_explicit) {
      // explicit --depth/--resolution pick the target architecture; the
      // transplant may then fail as incompatible
      spec = build_architecture(arch.depth, arch.resolution, heads,
                                arch.fc2_width, arch.fc1_width);
    } else {
      spec = source.spec;
      spec.heads = heads;  // same trunk, new heads
    }
    TransferResult result =
        transfer_train(source, spec, data, policy, tf.cfg, &log);
    write_text(fs::path(out) / "transplant_report.txt",
               result.transplant_report.to_text());
    params = std::move(result.params);
  }
  save_checkpoint(spec, params, (fs::path(out) / "final.ckpt").string());

  if (!test_videos_path.empty()) {
    auto test_videos = load_video_manifest(test_videos_path);
    EvalReport report = evaluate_split(spec, params, "video", test_videos);
    write_text(fs::path(out) / "report.txt", report.to_text());
    write_text(fs::path(out) / "report.csv", report.to_csv());

    // Table-4-shaped results row
    const std::string training_set =
        augment.empty() ? "video" : "video + image";
    std::ostringstream row;
    row << "depth,init,training_set,update_policy,map\n";
    row << conv_depth(spec) << "-conv," << (random_init ? "random" : "pretrained")
        << "," << training_set << "," << policy_str << "," << fmt(report.map)
        << "\n";
    write_text(fs::path(out) / "results_row.csv", row.str());
    std::cout << row.str();
  }
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& videos_path,
             const std::string& head, const std::string& out) {
  fs::create_directories(out);
  Checkpoint ck = load_checkpoint(ckpt_path);
  auto videos = load_video_manifest(videos_path);
  if (videos.empty()) throw config_error("empty test split");
  emit_config(out, {{"command", "eval"},
                    {"checkpoint", ckpt_path},
                    {"videos", videos_path},
                    {"head", head}});
  EvalReport report = evaluate_split(ck.spec, ck.params, head, videos);
  write_text(fs::path(out) / "report.txt", report.to_text());
  write_text(fs::path(out) / "report.csv", report.to_csv());
  std::cout << report.to_text();
  return 0;
}

struct SweepCell {
  std::string kind;  // "grid" or "fps"
  std::size_t depth = 0;
  std::size_t resolution = 0;
  std::size_t train_size = 0;  // 0 = full
  double fps = 0.0;
  // results
  bool done = false;
  bool infeasible = false;
  std::string note;
  double train_loss = -1.0;
  double test_loss = -1.0;
  double metric = -1.0;
};

int cmd_sweep(const std::string& images, const std::string& heldout,
              const std::string& videos_path,
              const std::string& test_videos_path,
              std::vector<std::size_t> depths,
              std::vector<std::size_t> resolutions,
              std::vector<std::size_t> train_sizes, std::vector<double> fps_list,
              const ArchFlags& arch, const TrainFlags& tf, std::size_t workers,
              const std::string& out) {
  fs::create_directories(out);
  if (train_sizes.empty()) train_sizes = {0};

  std::vector<SweepCell> cells;
  if (!images.empty()) {
    for (std::size_t d : depths)
      for (std::size_t r : resolutions)
        for (std::size_t n : train_sizes) {
          SweepCell c;
          c.kind = "grid";
          c.depth = d;
          c.resolution = r;
          c.train_size = n;
          cells.push_back(c);
        }
  }
  if (!videos_path.empty()) {
    for (double f : fps_list) {
      SweepCell c;
      c.kind = "fps";
      c.depth = arch.depth;
      c.resolution = arch.resolution;
      c.fps = f;
      cells.push_back(c);
    }
  }
  if (cells.empty()) throw config_error("sweep has no cells to run");

  emit_config(out, {{"command", "sweep"},
                    {"images", images},
                    {"heldout", heldout},
                    {"videos", videos_path},
                    {"cells", std::to_string(cells.size())},
                    {"workers", std::to_string(workers)},
                    {"epochs", std::to_string(tf.cfg.epochs)},
                    {"seed", std::to_string(tf.cfg.seed)}});

  Dataset image_ds, heldout_ds;
  if (!images.empty()) image_ds = load_manifest(images);
  if (!heldout.empty()) heldout_ds = load_manifest(heldout);
  std::vector<VideoRecord> train_videos, test_videos;
  if (!videos_path.empty()) train_videos = load_video_manifest(videos_path);
  if (!test_videos_path.empty())
    test_videos = load_video_manifest(test_videos_path);

  auto run_cell = [&](SweepCell& c) {
    try {
      if (c.kind == "grid") {
        NetworkSpec spec = build_architecture(
            c.depth, c.resolution,
            {{"image", image_ds.class_count, LabelMode::single}},
            arch.fc2_width, arch.fc1_width);
        ParamStore params = init_params(spec, tf.cfg.seed, arch.init_scale);
        TrainData data;
        data.primary = subsample_dataset(image_ds, c.train_size);
        data.primary_head = "image";
        data.heldout = heldout_ds;
        TrainReport rep = train(spec, params, data, tf.cfg, nullptr);
        for (auto it = rep.rows.rbegin(); it != rep.rows.rend(); ++it) {
          if (it->head == "image") {
            c.train_loss = it->train_loss;
            c.test_loss = it->heldout_loss;
            c.metric = it->heldout_metric;
            break;
          }
        }
      } else {
        std::size_t classes = 0;
        for (const auto& v : train_videos)
          for (std::size_t l : v.labels) classes = std::max(classes, l + 1);
        NetworkSpec spec = build_architecture(
            c.depth, c.resolution, {{"video", classes, LabelMode::multi}},
            arch.fc2_width, arch.fc1_width);
        ParamStore params = init_params(spec, tf.cfg.seed, arch.init_scale);
        TrainData data;
        data.primary = frames_dataset(train_videos, c.fps, classes);
        data.primary_head = "video";
        TrainReport rep = train(spec, params, data, tf.cfg, nullptr);
        if (!rep.rows.empty()) c.train_loss = rep.rows.back().train_loss;
        c.note = "frames=" + std::to_string(data.primary.entries.size());
        if (!test_videos.empty()) {
          EvalReport er = evaluate_split(spec, params, "video", test_videos);
          c.metric = er.map;
        }
      }
      c.done = true;
    } catch (const config_error& e) {
      c.infeasible = true;
      c.note = e.what();
    } catch (const std::exception& e) {
      c.note = std::string("failed: ") + e.what();
    }
  };

  if (workers <= 1) {
    for (auto& c : cells) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_cell(cells[i]);
        }
      });
    for (auto& t : pool) t.join();
  }

  std::ostringstream txt, csv;
  csv << "kind,depth,resolution,train_size,fps,train_loss,test_loss,metric,"
         "status\n";
  txt << std::left << std::setw(6) << "kind" << std::setw(7) << "depth"
      << std::setw(6) << "res" << std::setw(7) << "size" << std::setw(6)
      << "fps" << std::setw(12) << "train_loss" << std::setw(12) << "test_loss"
      << std::setw(10) << "metric" << "status\n";
  for (const auto& c : cells) {
    const std::string status =
        c.infeasible ? "infeasible" : (c.done ? "ok" : "failed");
    csv << c.kind << ',' << c.depth << ',' << c.resolution << ','
        << c.train_size << ',' << fmt(c.fps) << ',' << fmt(c.train_loss) << ','
        << fmt(c.test_loss) << ',' << fmt(c.metric) << ',' << status << "\n";
    txt << std::left << std::setw(6) << c.kind << std::setw(7) << c.depth
        << std::setw(6) << c.resolution << std::setw(7) << c.train_size
        << std::setw(6) << fmt(c.fps) << std::setw(12) << fmt(c.train_loss)
        << std::setw(12) << fmt(c.test_loss) << std::setw(10) << fmt(c.metric)
        << status;
    if (!c.note.empty()) txt << "  (" << c.note << ")";
    txt << "\n";
  }
  write_text(fs::path(out) / "sweep_results.csv", csv.str());
  write_text(fs::path(out) / "sweep_results.txt", txt.str());
  std::cout << txt.str();
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, double tolerance, bool inject_fault) {
  auto results = run_gradient_checks(seed, tolerance, inject_fault);
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(24)
              << r.name << " max_rel_error=" << fmt(r.max_rel_error) << "\n";
    all_pass &= r.pass;
  }
  std::cout << (all_pass ? "all gradient checks passed"
                         : "gradient check FAILURES present")
            << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-based video recognition networks with image-to-video "
               "transfer learning"};
  app.require_subcommand(1);

  // synth
  SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic two-domain corpus");
  synth->add_option("--seed", synth_cfg.seed);
  synth->add_option("--classes", synth_cfg.class_count);
  synth->add_option("--image-train", synth_cfg.image_train_size);
  synth->add_option("--image-test", synth_cfg.image_test_size);
  synth->add_option("--video-train", synth_cfg.video_train_count);
  synth->add_option("--video-test", synth_cfg.video_test_count);
  synth->add_option("--frames-per-video", synth_cfg.frames_per_video);
  synth->add_option("--frame-interval", synth_cfg.frame_interval);
  synth->add_option("--resolution", synth_cfg.resolution)
      ->check(CLI::IsMember({32, 64, 128, 256}));
  synth->add_option("--noise", synth_cfg.noise);
  synth->add_option("--out", synth_out)->required();
  synth->set_config("--config");

  // pretrain
  std::string pre_images, pre_heldout, pre_out;
  ArchFlags pre_arch;
  TrainFlags pre_train;
  auto* pretrain = app.add_subcommand("pretrain", "Train an image recognizer from random init");
  pretrain->add_option("--images", pre_images, "Training image manifest")->required();
  pretrain->add_option("--heldout", pre_heldout, "Held-out image manifest");
  pretrain->add_option("--out", pre_out)->required();
  add_arch_flags(pretrain, pre_arch);
  add_train_flags(pretrain, pre_train);
  pretrain->set_config("--config");

  // transfer
  std::string tr_videos, tr_test_videos, tr_init = "random",
              tr_policy = "fc", tr_augment, tr_out;
  double tr_fps = 1.0;
  bool tr_single = false;
  ArchFlags tr_arch;
  TrainFlags tr_train;
  auto* transfer = app.add_subcommand("transfer", "Fine-tune a video recognizer (random or pretrained init)");
  transfer->add_option("--videos", tr_videos, "Training video manifest")->required();
  transfer->add_option("--test-videos", tr_test_videos, "Test video manifest");
  transfer->add_option("--init", tr_init, "'random' or source checkpoint path");
  transfer->add_option("--policy", tr_policy, "Update policy: fc or fc+conv");
  transfer->add_option("--augment", tr_augment, "Image manifest for mixed-domain training");
  transfer->add_option("--fps", tr_fps, "Frame sampling rate");
  transfer->add_flag("--single-label", tr_single, "Use a softmax video head");
  transfer->add_option("--out", tr_out)->required();
  add_arch_flags(transfer, tr_arch);
  add_train_flags(transfer, tr_train);
  transfer->set_config("--config");

  // eval
  std::string ev_ckpt, ev_videos, ev_head = "video", ev_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on test videos");
  eval_cmd->add_option("--checkpoint", ev_ckpt)->required();
  eval_cmd->add_option("--videos", ev_videos)->required();
  eval_cmd->add_option("--head", ev_head);
  eval_cmd->add_option("--out", ev_out)->required();
  eval_cmd->set_config("--config");

  // sweep
  std::string sw_images, sw_heldout, sw_videos, sw_test_videos, sw_out;
  std::vector<std::size_t> sw_depths, sw_resolutions, sw_sizes;
  std::vector<double> sw_fps;
  std::size_t sw_workers = 1;
  ArchFlags sw_arch;
  TrainFlags sw_train;
  auto* sweep = app.add_subcommand("sweep", "Grid of resolution/depth/train-size/fps runs");
  sweep->add_option("--images", sw_images);
  sweep->add_option("--heldout", sw_heldout);
  sweep->add_option("--videos", sw_videos);
  sweep->add_option("--test-videos", sw_test_videos);
  sweep->add_option("--depths", sw_depths)->delimiter(',');
  sweep->add_option("--resolutions", sw_resolutions)->delimiter(',');
  sweep->add_option("--train-sizes", sw_sizes)->delimiter(',');
  sweep->add_option("--fps-list", sw_fps)->delimiter(',');
  sweep->add_option("--workers", sw_workers);
  sweep->add_option("--out", sw_out)->required();
  add_arch_flags(sweep, sw_arch);
  add_train_flags(sweep, sw_train);
  sweep->set_config("--config");

  // gradcheck
  std::uint64_t gc_seed = 7;
  double gc_tol = 1e-4;
  bool gc_fault = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  gradcheck->add_option("--seed", gc_seed);
  gradcheck->add_option("--tolerance", gc_tol);
  gradcheck->add_flag("--inject-conv-fault", gc_fault)->group("");  // hidden

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_cfg, synth_out);
    if (pretrain->parsed())
      return cmd_pretrain(pre_images, pre_heldout, pre_arch, pre_train, pre_out);
    if (transfer->parsed()) {
      const bool arch_explicit = transfer->count("--depth") > 0 ||
                                 transfer->count("--resolution") > 0;
      return cmd_transfer(tr_videos, tr_test_videos, tr_init, tr_policy,
                          tr_augment, tr_fps, tr_single, tr_arch,
                          arch_explicit, tr_train, tr_out);
    }
    if (eval_cmd->parsed()) return cmd_eval(ev_ckpt, ev_videos, ev_head, ev_out);
    if (sweep->parsed())
      return cmd_sweep(sw_images, sw_heldout, sw_videos, sw_test_videos,
                       sw_depths, sw_resolutions, sw_sizes, sw_fps, sw_arch,
                       sw_train, sw_workers, sw_out);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_seed, gc_tol, gc_fault);
  } catch (const incompatibility_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const format_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const parameter_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
