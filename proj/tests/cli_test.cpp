#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DCN_CLI_PATH;

fs::path work_dir() {
  auto d = fs::temp_directory_path() / "dcn_cli_test";
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string corpus() {
  static std::string dir;
  if (dir.empty()) {
    dir = (work_dir() / "corpus").string();
    REQUIRE(run("synth --seed 4 --out " + dir +
                " --image-train 24 --image-test 8 --video-train 3"
                " --video-test 3 --resolution 32") == 0);
  }
  return dir;
}

}  // namespace

TEST_CASE("synth writes manifests and is reproducible byte for byte") {
  const std::string a = (work_dir() / "synth_a").string();
  const std::string b = (work_dir() / "synth_b").string();
  const std::string flags =
      " --seed 11 --image-train 8 --image-test 4 --video-train 2"
      " --video-test 2 --resolution 32 --out ";
  REQUIRE(run("synth" + flags + a) == 0);
  REQUIRE(run("synth" + flags + b) == 0);
  CHECK(slurp(fs::path(a) / "img" / "train_0.ppm") ==
        slurp(fs::path(b) / "img" / "train_0.ppm"));
  CHECK(fs::exists(fs::path(a) / "video_train.manifest"));
}

TEST_CASE("pretrain produces a checkpoint, log, and config snapshot") {
  const std::string out = (work_dir() / "pre").string();
  REQUIRE(run("pretrain --images " + corpus() + "/image_train.manifest" +
              " --heldout " + corpus() + "/image_test.manifest" +
              " --depth 2 --resolution 32 --fc1-width 16 --fc2-width 8"
              " --epochs 1 --seed 3 --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "checkpoint.ckpt"));
  CHECK(fs::exists(fs::path(out) / "config.txt"));
  const std::string log = slurp(fs::path(out) / "train_log.csv");
  CHECK(log.find("epoch,head,train_loss") != std::string::npos);
  CHECK(log.find("0,image,") != std::string::npos);
}

TEST_CASE("repeated pretrain is byte-identical") {
  const std::string a = (work_dir() / "det_a").string();
  const std::string b = (work_dir() / "det_b").string();
  const std::string flags = " --images " + corpus() +
                            "/image_train.manifest --depth 2 --resolution 32"
                            " --fc1-width 16 --fc2-width 8 --epochs 1"
                            " --seed 9 --out ";
  REQUIRE(run("pretrain" + flags + a) == 0);
  REQUIRE(run("pretrain" + flags + b) == 0);
  CHECK(slurp(fs::path(a) / "checkpoint.ckpt") ==
        slurp(fs::path(b) / "checkpoint.ckpt"));
  CHECK(slurp(fs::path(a) / "train_log.csv") ==
        slurp(fs::path(b) / "train_log.csv"));
}

TEST_CASE("transfer consumes a checkpoint and emits reports") {
  const std::string pre = (work_dir() / "pre").string();
  if (!fs::exists(fs::path(pre) / "checkpoint.ckpt")) {
    REQUIRE(run("pretrain --images " + corpus() + "/image_train.manifest" +
                " --depth 2 --resolution 32 --fc1-width 16 --fc2-width 8"
                " --epochs 1 --seed 3 --out " + pre) == 0);
  }
  const std::string out = (work_dir() / "xfer").string();
  REQUIRE(run("transfer --videos " + corpus() + "/video_train.manifest" +
              " --test-videos " + corpus() + "/video_test.manifest" +
              " --init " + pre + "/checkpoint.ckpt --policy fc" +
              " --epochs 2 --seed 5 --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "final.ckpt"));
  CHECK(fs::exists(fs::path(out) / "transplant_report.txt"));
  CHECK(fs::exists(fs::path(out) / "report.txt"));
  const std::string row = slurp(fs::path(out) / "results_row.csv");
  CHECK(row.find("depth,init,training_set,update_policy,map") !=
        std::string::npos);
  CHECK(row.find("pretrained") != std::string::npos);
  CHECK(row.find("fc") != std::string::npos);
}

TEST_CASE("eval scores a checkpoint against a video split") {
  const std::string xfer = (work_dir() / "xfer").string();
  REQUIRE(fs::exists(fs::path(xfer) / "final.ckpt"));
  const std::string out = (work_dir() / "eval").string();
  REQUIRE(run("eval --checkpoint " + xfer + "/final.ckpt --videos " +
              corpus() + "/video_test.manifest --out " + out) == 0);
  const std::string rep = slurp(fs::path(out) / "report.txt");
  CHECK(rep.find("map") != std::string::npos);
}

TEST_CASE("sweep covers the grid and marks infeasible cells") {
  const std::string out = (work_dir() / "sweep").string();
  REQUIRE(run("sweep --images " + corpus() + "/image_train.manifest" +
              " --heldout " + corpus() + "/image_test.manifest" +
              " --depths 2 --resolutions 32 --train-sizes 8,16"
              " --fc1-width 16 --fc2-width 8 --epochs 1 --seed 2 --out " +
              out) == 0);
  const std::string csv = slurp(fs::path(out) / "sweep_results.csv");
  CHECK(csv.find("kind,depth,resolution") != std::string::npos);
  // one row per cell plus header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find(",ok") != std::string::npos);
}

TEST_CASE("config and format problems exit with code 2") {
  CHECK(run("pretrain --images /nonexistent.manifest --out " +
            (work_dir() / "e1").string()) == 2);
  CHECK(run("eval --checkpoint /nonexistent.ckpt --videos " + corpus() +
            "/video_test.manifest --out " + (work_dir() / "e2").string()) == 2);
}

TEST_CASE("incompatible transplants exit with code 3") {
  const std::string pre = (work_dir() / "pre").string();
  REQUIRE(fs::exists(fs::path(pre) / "checkpoint.ckpt"));
  // depth-2/32 source into an explicit depth-2/64 target: conv1 differs
  CHECK(run("transfer --videos " + corpus() + "/video_train.manifest" +
            " --init " + pre + "/checkpoint.ckpt --policy fc" +
            " --depth 2 --resolution 64 --fc1-width 16 --fc2-width 8"
            " --epochs 1 --seed 5 --out " +
            (work_dir() / "bad_xfer").string()) == 3);
}

TEST_CASE("gradcheck subcommand reports failures via exit code") {
  CHECK(run("gradcheck --seed 2") == 0);
  CHECK(run("gradcheck --seed 2 --inject-conv-fault") == 1);
}
