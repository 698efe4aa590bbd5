#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DGEST_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("solve smoke test writes a summary row") {
    TempDir dir("dgest_cli_solve");
    const int rc = run_cli("solve --preset heat_decay --p 1 --levels 1 --base-nx 2 "
                           "--dt 2e-3 --t-final 0.01 --out " + dir.path.string());
    CHECK(rc == 0);
    const std::string csv = slurp(dir.path / "summary.csv");
    CHECK(csv.find("preset,") == 0);
    CHECK(csv.find("heat_decay") != std::string::npos);
}

TEST_CASE("configuration errors exit with code 2") {
    TempDir dir("dgest_cli_cfg");
    CHECK(run_cli("solve --preset heat_decay --c-sigma 0.5 --out " + dir.path.string()) == 2);
    CHECK(run_cli("solve --preset not_a_problem --out " + dir.path.string()) == 2);
    CHECK(run_cli("solve --preset heat_decay --theta 2 --out " + dir.path.string()) == 2);
    CHECK(run_cli("nonsense") == 2);
}

TEST_CASE("config file values are applied and flags override them") {
    TempDir dir("dgest_cli_file");
    const fs::path cfg = dir.path / "run.conf";
    {
        std::ofstream out(cfg);
        out << "# tiny run\n"
            << "preset = heat_decay\n"
            << "p = 1\n"
            << "levels = 1\n"
            << "base_nx = 2\n"
            << "dt = 2e-3\n"
            << "t_final = 0.01\n"
            << "out = " << (dir.path / "a").string() << "\n";
    }
    CHECK(run_cli("solve --config " + cfg.string()) == 0);
    CHECK(fs::exists(dir.path / "a" / "summary.csv"));
    // flag overrides the file's output directory
    CHECK(run_cli("solve --config " + cfg.string() + " --out " + (dir.path / "b").string()) ==
          0);
    CHECK(fs::exists(dir.path / "b" / "summary.csv"));
    // unknown key is a config error
    {
        std::ofstream out(cfg, std::ios::app);
        out << "volume = 11\n";
    }
    CHECK(run_cli("solve --config " + cfg.string()) == 2);
}

TEST_CASE("study runs are reproducible byte for byte") {
    TempDir dir("dgest_cli_repro");
    const std::string common = "study --preset heat_decay --p 1 --levels 2 --base-nx 2 "
                               "--dt 2e-3 --t-final 0.01 --seed 99 --out ";
    CHECK(run_cli(common + (dir.path / "r1").string()) == 0);
    CHECK(run_cli(common + (dir.path / "r2").string()) == 0);
    const std::string a = slurp(dir.path / "r1" / "summary.csv");
    const std::string b = slurp(dir.path / "r2" / "summary.csv");
    CHECK(!a.empty());
    CHECK(a == b);
    CHECK(fs::exists(dir.path / "r1" / "convergence.svg"));
    CHECK(slurp(dir.path / "r1" / "convergence.svg") ==
          slurp(dir.path / "r2" / "convergence.svg"));
}

TEST_CASE("tampered penalty fails the verification bundle with exit 1") {
    TempDir dir("dgest_cli_verify_neg");
    CHECK(run_cli("verify --c-sigma 1.01 --out " + dir.path.string()) == 1);
    const std::string report = slurp(dir.path / "verify.txt");
    CHECK(report.find("FAIL coercivity") != std::string::npos);
    CHECK(report.find("RESULT: FAIL") != std::string::npos);
}

TEST_CASE("snapshot and mesh dumps are written when requested") {
    TempDir dir("dgest_cli_dump");
    const int rc = run_cli("solve --preset heat_decay --p 1 --levels 1 --base-nx 2 "
                           "--dt 5e-3 --t-final 0.01 --dump-snapshots --dump-mesh --out " +
                           dir.path.string());
    CHECK(rc == 0);
    CHECK(fs::exists(dir.path / "snapshot_00000.csv"));
    CHECK(fs::exists(dir.path / "snapshot_00002.csv"));
    const std::string csv = slurp(dir.path / "snapshot_00000.csv");
    CHECK(csv.rfind("element,xi,eta,x,y,value", 0) == 0);
    const std::string mesh = slurp(dir.path / "mesh.txt");
    CHECK(mesh.rfind("v 0 0", 0) == 0);
    CHECK(mesh.find("e 0 1 4 3") != std::string::npos);  // 2x2 cells, first element
}
