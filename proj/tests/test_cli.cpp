#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "noon/io.hpp"

// Integration tests for the command-line front end. The binary path comes
// from the NOON_CLI environment variable (set by ctest).

namespace fs = std::filesystem;
using namespace noon;

namespace {

std::string cli_path() {
  const char* p = std::getenv("NOON_CLI");
  REQUIRE_MESSAGE(p != nullptr, "NOON_CLI must point at the noon binary");
  return p;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("scan: ideal single-photon run reaches near-unit visibility") {
  TempDir dir("noon_cli_scan");
  const int code =
      run("scan --n 1 --ell 1 --pair-rate 50000 --time 1 --reps 50 --window-ns 0"
          " --seed 2 --out " + dir.path.string());
  CHECK(code == 0);
  for (const auto& name :
       {"config.json", "scan.csv", "scan_meta.json", "fit.json", "fringe.csv"}) {
    CHECK_MESSAGE(fs::exists(dir.path / name), name);
  }
  const auto fit = io::read_json(dir.path / "fit.json");
  CHECK(fit.at("visibility").get<double>() >= 0.999);
  CHECK(fit.at("n_photons").get<int>() == 1);

  // the resolved config echoes every value used
  const auto cfg = io::read_json(dir.path / "config.json");
  CHECK(cfg.at("seed").get<std::uint64_t>() == 2);
  CHECK(cfg.at("scan").at("n_photons").get<int>() == 1);
  CHECK(cfg.at("source").at("pair_rate_hz").get<double>() == 50000.0);
  CHECK(cfg.at("loss").at("coincidence_window_ns").get<double>() == 0.0);
}

TEST_CASE("scan: dataset CSV round-trips through the reader") {
  TempDir dir("noon_cli_roundtrip");
  REQUIRE(run("scan --n 2 --ell 5 --reps 7 --no-subtract-accidentals --seed 4 --out " +
              dir.path.string()) == 0);
  const auto sidecar = io::read_json(dir.path / "scan_meta.json");
  const auto ds = io::read_scan_csv(dir.path / "scan.csv", sidecar);
  CHECK(ds.axis.size() == 48);
  CHECK(ds.counts.front().size() == 7);
  CHECK(ds.config.ell == 5);
  CHECK_FALSE(ds.accidentals_subtracted);
  for (const auto& reps : ds.counts) {
    for (double c : reps) CHECK(c >= 0.0);
  }
}

TEST_CASE("invalid configurations exit with code 2") {
  TempDir dir("noon_cli_bad");
  CHECK(run("scan --ell 0 --out " + dir.path.string()) == 2);
  CHECK(run("scan --n 3 --out " + dir.path.string()) == 2);
  CHECK(run("scan") == 2);  // --out is required
  CHECK(run("holo --ell 151 --out " + dir.path.string()) == 2);
  CHECK(run("frobnicate") == 2);
}

TEST_CASE("holo accepts the resolution boundary") {
  TempDir dir("noon_cli_holo150");
  CHECK(run("holo --ell 150 --kind oam+ --out " + dir.path.string()) == 0);
  CHECK(fs::exists(dir.path / "hologram.pgm"));
  const auto report = io::read_json(dir.path / "mub_report.json");
  CHECK(report.at("max_error_vs_hadamard").get<double>() < 1e-3);
}

TEST_CASE("hom: ideal dip fit reports near-unit visibility") {
  TempDir dir("noon_cli_hom");
  const int code = run(
      "hom --pair-rate 200000 --window-ns 0 --reps 50 --seed 6 --out " +
      dir.path.string());
  CHECK(code == 0);
  const auto dip = io::read_json(dir.path / "dipfit.json");
  CHECK(dip.at("visibility").get<double>() >= 0.99);
  CHECK(std::abs(dip.at("center_fs").get<double>()) <= 100.0);
}

TEST_CASE("noon-verify succeeds") { CHECK(run("noon-verify") == 0); }
