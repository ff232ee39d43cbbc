// End-to-end tests of the command-line tool. argv[1] is the path to the
// binary; with argv[2] == "determinism" only the bench byte-identity check
// (acceptance criterion: repeated seeded runs) is executed.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_cli;

void check(bool ok, const std::string& what) {
    std::printf("%s: %s\n", ok ? "ok" : "FAIL", what.c_str());
    if (!ok) ++g_failures;
}

int run(const std::string& args) {
    std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("sfofr_cli_" + tag + "_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

const char* kSimConfig = R"({
  "schema_version": 1,
  "simulation": {"n_train": 10, "grid_size": 21, "eta": 0.3, "seed": 7, "noise_sd": 0.02}
})";

const char* kFitConfig = R"({
  "schema_version": 1,
  "fit": {"k_y": 6, "k_x": 6, "lambda_rho": 0.01, "lambda_beta": 0.01},
  "fixed_lambda": true,
  "bootstrap": {"b": 19, "alpha": 0.2}
})";

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

void test_simulate() {
    TempDir dir("sim");
    write_file(dir.sub("cfg.json"), kSimConfig);

    // Missing output directory is created automatically.
    std::string out = dir.sub("out/a");
    check(run("simulate --config " + dir.sub("cfg.json") + " --out-dir " + out) == 0,
          "simulate exits 0 and creates the output directory");
    for (const char* f : {"y.csv", "x.csv", "w.csv", "beta_true.csv", "rho_true.csv"})
        check(fs::exists(fs::path(out) / f), std::string("simulate wrote ") + f);

    // Documented shapes: curve files have a grid row plus n rows; w is n x n.
    check(count_lines(slurp(fs::path(out) / "y.csv")) == 11, "y.csv has grid row + 10 curves");
    check(count_lines(slurp(fs::path(out) / "w.csv")) == 10, "w.csv has 10 rows");
    check(count_lines(slurp(fs::path(out) / "beta_true.csv")) == 22,
          "beta_true.csv has header + 21 rows");

    // Same seed twice: byte-identical files.
    std::string out2 = dir.sub("out/b");
    check(run("simulate --config " + dir.sub("cfg.json") + " --out-dir " + out2) == 0,
          "second simulate run exits 0");
    for (const char* f : {"y.csv", "x.csv", "w.csv"})
        check(slurp(fs::path(out) / f) == slurp(fs::path(out2) / f),
              std::string("same-seed simulate reproduces ") + f);

    // A different seed changes the data.
    std::string out3 = dir.sub("out/c");
    check(run("simulate --config " + dir.sub("cfg.json") + " --seed 8 --out-dir " + out3) == 0,
          "seed-override simulate exits 0");
    check(slurp(fs::path(out) / "y.csv") != slurp(fs::path(out3) / "y.csv"),
          "different seed changes y.csv");
}

void test_fit_bootstrap_moran() {
    TempDir dir("fit");
    write_file(dir.sub("sim_cfg.json"), kSimConfig);
    write_file(dir.sub("fit_cfg.json"), kFitConfig);
    std::string data = dir.sub("data");
    check(run("simulate --config " + dir.sub("sim_cfg.json") + " --out-dir " + data) == 0,
          "simulate for fit input");

    std::string common = " --y " + data + "/y.csv --x " + data + "/x.csv --w " + data + "/w.csv";
    std::string fit_out = dir.sub("fit_out");
    check(run("fit --config " + dir.sub("fit_cfg.json") + common + " --out-dir " + fit_out) == 0,
          "fit exits 0");
    for (const char* f :
         {"beta_surface.csv", "rho_surface.csv", "theta.json", "fitted.csv", "residuals.csv"})
        check(fs::exists(fs::path(fit_out) / f), std::string("fit wrote ") + f);

    // Bootstrap from the fit artifacts, with truth surfaces for a coverage report.
    std::string boot_out = dir.sub("boot_out");
    std::string boot_cmd = "bootstrap --config " + dir.sub("fit_cfg.json") + common +
                           " --fit-dir " + fit_out + " --truth-beta " + data +
                           "/beta_true.csv --truth-rho " + data + "/rho_true.csv --seed 5" +
                           " --out-dir " + boot_out;
    check(run(boot_cmd) == 0, "bootstrap exits 0");
    for (const char* f : {"beta_lower.csv", "beta_upper.csv", "rho_lower.csv", "rho_upper.csv",
                          "coverage.json"})
        check(fs::exists(fs::path(boot_out) / f), std::string("bootstrap wrote ") + f);

    // Fixed seed reproducibility of the bands.
    std::string boot_out2 = dir.sub("boot_out2");
    std::string boot_cmd2 = "bootstrap --config " + dir.sub("fit_cfg.json") + common +
                            " --fit-dir " + fit_out + " --seed 5 --out-dir " + boot_out2;
    check(run(boot_cmd2) == 0, "second bootstrap exits 0");
    check(slurp(fs::path(boot_out) / "beta_lower.csv") ==
              slurp(fs::path(boot_out2) / "beta_lower.csv"),
          "same-seed bootstrap reproduces beta_lower.csv");

    // Moran on identical curves: I == 1 everywhere.
    std::string y_text = slurp(fs::path(data) / "y.csv");
    std::istringstream lines(y_text);
    std::string grid_row, first_curve;
    std::getline(lines, grid_row);
    std::getline(lines, first_curve);
    std::ostringstream same;
    same << grid_row << '\n';
    for (int i = 0; i < 10; ++i) same << first_curve << '\n';
    write_file(dir.sub("same.csv"), same.str());
    std::string moran_out = dir.sub("moran_out");
    check(run("moran --y " + dir.sub("same.csv") + " --w " + data + "/w.csv --no-center" +
              " --out-dir " + moran_out) == 0,
          "moran exits 0");
    std::istringstream moran(slurp(fs::path(moran_out) / "moran.csv"));
    std::string header, line;
    std::getline(moran, header);
    check(header == "t,moran_i", "moran.csv header");
    bool all_one = true;
    int rows = 0;
    while (std::getline(moran, line)) {
        ++rows;
        double v = std::strtod(line.substr(line.find(',') + 1).c_str(), nullptr);
        if (std::abs(v - 1.0) > 1e-9) all_one = false;
    }
    check(rows == 21 && all_one, "identical curves give I(t) == 1");

    // W with a nonzero diagonal is a schema violation -> exit 2.
    std::string w_text = slurp(fs::path(data) / "w.csv");
    std::string bad_w = "1" + w_text.substr(1);  // first diagonal entry nonzero
    write_file(dir.sub("bad_w.csv"), bad_w);
    int code = run("fit --config " + dir.sub("fit_cfg.json") + " --y " + data + "/y.csv --x " +
                   data + "/x.csv --w " + dir.sub("bad_w.csv") + " --out-dir " + dir.sub("x1"));
    check(code == 2, "nonzero-diagonal W rejected with exit code 2, got " + std::to_string(code));

    // Missing input file -> IO failure, exit 4.
    code = run("fit --config " + dir.sub("fit_cfg.json") + " --y " + dir.sub("absent.csv") +
               " --x " + data + "/x.csv --w " + data + "/w.csv --out-dir " + dir.sub("x2"));
    check(code == 4, "missing curve file exits 4, got " + std::to_string(code));

    // Unknown flag -> usage error, exit 2.
    code = run("fit --frobnicate");
    check(code == 2, "unknown flag exits 2, got " + std::to_string(code));
}

void test_bench_determinism() {
    TempDir dir("bench");
    write_file(dir.sub("cfg.json"), R"({
  "schema_version": 1,
  "fit": {"k_y": 6, "k_x": 6},
  "lambda_grid": {"rho": [0.001, 0.1], "beta": [0.001, 0.1]},
  "simulation": {"n_train": 25, "n_test": 25, "grid_size": 41, "eta": 0.2,
                 "seed": 9, "replications": 3, "noise_sd": 0.02}
})");
    std::string a = dir.sub("a"), b = dir.sub("b");
    check(run("bench --config " + dir.sub("cfg.json") + " --out-dir " + a) == 0,
          "bench run 1 exits 0");
    check(run("bench --config " + dir.sub("cfg.json") + " --out-dir " + b) == 0,
          "bench run 2 exits 0");
    check(fs::exists(fs::path(a) / "timing.txt"), "bench wrote timing.txt");
    std::string ma = slurp(fs::path(a) / "metrics.csv");
    check(!ma.empty() && ma == slurp(fs::path(b) / "metrics.csv"),
          "same-seed bench produces byte-identical metrics.csv");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <path-to-cli> [determinism]\n";
        return 2;
    }
    g_cli = argv[1];
    bool determinism_only = argc > 2 && std::string(argv[2]) == "determinism";
    if (determinism_only) {
        test_bench_determinism();
    } else {
        test_simulate();
        test_fit_bootstrap_moran();
    }
    if (g_failures > 0) {
        std::printf("%d check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all checks passed\n");
    return 0;
}
