#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <ccgeo/io.hpp>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path capture = fs::temp_directory_path() / ("ccgeo_cli_out_" +
                                                    std::to_string(counter++) + ".txt");
    std::string cmd = std::string(CCGEO_CLI_PATH) + " " + args + " > " + capture.string() +
                      " 2>&1";
    int raw = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WEXITSTATUS(raw);
    res.output = ccgeo::read_file(capture.string());
    fs::remove(capture);
    return res;
}

fs::path fresh_dir(const std::string& tag) {
    fs::path d = fs::temp_directory_path() / ("ccgeo_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("list-structures prints 7 rows") {
    auto res = run_cli("list-structures");
    CHECK(res.exit_code == 0);
    int rows = 0;
    std::istringstream is(res.output);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 7);

    auto js = run_cli("--json list-structures");
    CHECK(js.exit_code == 0);
    auto doc = json::parse(js.output);
    CHECK(doc.size() == 7);
    CHECK(doc[0].contains("regularity"));
}

TEST_CASE("unknown flag is a usage error") {
    CHECK(run_cli("list-structures --bogus").exit_code == 2);
    CHECK(run_cli("no-such-command").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);  // missing subcommand
}

TEST_CASE("extremal on heisenberg writes the trajectory") {
    auto out = fresh_dir("extremal");
    auto res = run_cli("--structure heisenberg --out " + out.string() +
                       " extremal --q0 0,0,0 --lam0 1,0,0 --T 1 --steps 1000");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("drift") != std::string::npos);
    std::string csv = ccgeo::read_file((out / "trajectory.csv").string());
    int rows = -1;  // header
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 1001);
    auto manifest = json::parse(ccgeo::read_file((out / "manifest.json").string()));
    CHECK(manifest["command"] == "extremal");
    CHECK(manifest.contains("resolved_config"));
    CHECK(manifest.contains("version"));
    CHECK(manifest.contains("timestamp"));
}

TEST_CASE("extremal euclidean reaches (1,0)") {
    auto out = fresh_dir("extremal_e2");
    auto res = run_cli("--json --structure euclidean2 --out " + out.string() +
                       " extremal --q0 0,0 --lam0 1,0 --T 1 --steps 100");
    CHECK(res.exit_code == 0);
    auto doc = json::parse(res.output);
    CHECK(doc["final_q"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(doc["final_q"][1].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("extremal refuses C0 structures with exit 1") {
    auto res = run_cli("--structure grushin extremal --q0 0,0 --lam0 1,0");
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("C0") != std::string::npos);
}

TEST_CASE("missing structure is a configuration error") {
    CHECK(run_cli("extremal --q0 0,0").exit_code == 2);
    CHECK(run_cli("--structure nosuchthing distance --p 0,0 --q 1,0").exit_code == 2);
}

TEST_CASE("calibrate then verify round-trips through files") {
    auto out = fresh_dir("calibrate");
    auto res = run_cli("--structure euclidean2 --out " + out.string() +
                       " calibrate --point 0,0 --eps 0.3");
    CHECK(res.exit_code == 0);
    REQUIRE(fs::exists(out / "calibration.json"));

    auto ver = run_cli("verify --file " + (out / "calibration.json").string());
    CHECK(ver.exit_code == 0);
    CHECK(ver.output.find("margin 1") != std::string::npos);

    // Corrupted file: exit 1 with a schema message.
    ccgeo::atomic_write((out / "broken.json").string(), "{\"type\": \"calibration_field\"");
    auto bad = run_cli("verify --file " + (out / "broken.json").string());
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("JSON") != std::string::npos);
}

TEST_CASE("verify a stored heisenberg calibration") {
    auto out = fresh_dir("calibrate_heis");
    auto res = run_cli("--structure heisenberg --out " + out.string() +
                       " calibrate --point 0,0,0 --eps 0.2");
    CHECK(res.exit_code == 0);
    auto ver = run_cli("--json verify --file " + (out / "calibration.json").string() +
                       " --samples 2000");
    CHECK(ver.exit_code == 0);
    auto doc = json::parse(ver.output);
    CHECK(doc["margin_s"].get<double>() <= 1.0 + 1e-6);
    CHECK(doc["pass"].get<bool>());
}

TEST_CASE("quasi-calibrate stores slacks") {
    auto out = fresh_dir("quasi");
    auto res = run_cli("--json --structure grushin --out " + out.string() +
                       " quasi-calibrate --point 0,0");
    CHECK(res.exit_code == 0);
    auto doc = json::parse(res.output);
    CHECK(doc["pivot"] == 1);
    CHECK(doc["eps1"].get<double>() <= 0.05);
    auto ver = run_cli("verify --file " + (out / "quasicalibration.json").string());
    CHECK(ver.exit_code == 0);
}

TEST_CASE("distance sandwich on the euclidean plane") {
    auto res = run_cli("--json --structure euclidean2 distance --p 0,0 --q 3,4");
    CHECK(res.exit_code == 0);
    auto doc = json::parse(res.output);
    CHECK(doc["status"] == "finite");
    CHECK(doc["upper"].get<double>() >= 4.999);
    CHECK(doc["upper"].get<double>() <= 5.001);
}

TEST_CASE("distance certifies separation across z") {
    auto res = run_cli("--json --structure flat_nonbracket distance --p 0,0,0 --q 0.3,0.1,0.4");
    CHECK(res.exit_code == 0);
    auto doc = json::parse(res.output);
    CHECK(doc["status"] == "infty_certified");
    CHECK(doc["upper"].is_null());
}

TEST_CASE("diameter sweep on heisenberg passes its targets") {
    auto out = fresh_dir("diam_heis");
    auto res = run_cli("--structure heisenberg --out " + out.string() +
                       " diameter --point 0,0,0 --radii 0.05,0.025");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("ratio") != std::string::npos);
    std::string csv = ccgeo::read_file((out / "sweep.csv").string());
    CHECK(csv.rfind("structure,regime,q,r,delta,lower,upper,ratio,budget", 0) == 0);
    REQUIRE(fs::exists(out / "reports.json"));
}

TEST_CASE("diameter sweep on grushin prints slacks") {
    auto res = run_cli("--structure grushin diameter --point 0,0 --radii 0.05,0.025");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("eps1") != std::string::npos);
}

TEST_CASE("delta >= r is a configuration error") {
    auto res = run_cli("--structure heisenberg diameter --point 0,0,0 --radii 0.05 "
                       "--delta-fraction 1.5");
    CHECK(res.exit_code == 2);
}

TEST_CASE("unmet ratio targets exit 1 naming the row") {
    auto res = run_cli("--structure heisenberg diameter --point 0,0,0 --radii 0.05 "
                       "--target-ratio 0.99999");
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("row") != std::string::npos);
}

TEST_CASE("config file supplies parameters and flags override") {
    auto out = fresh_dir("config");
    json cfg;
    cfg["structure"] = "euclidean2";
    cfg["extremal"] = {{"q0", {0.0, 0.0}}, {"lam0", {0.0, 1.0}}, {"T", 0.5}, {"steps", 50}};
    ccgeo::atomic_write((out / "run.json").string(), cfg.dump(1));
    auto res = run_cli("--json --config " + (out / "run.json").string() + " extremal");
    CHECK(res.exit_code == 0);
    auto doc = json::parse(res.output);
    CHECK(doc["rows"] == 51);
    CHECK(doc["final_q"][1].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
    // CLI flag overrides the config section.
    auto res2 = run_cli("--json --config " + (out / "run.json").string() +
                        " extremal --lam0 1,0");
    auto doc2 = json::parse(res2.output);
    CHECK(doc2["final_q"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("reruns are byte-identical apart from the manifest timestamp") {
    auto out1 = fresh_dir("det1");
    auto out2 = fresh_dir("det2");
    const std::string args =
        " diameter --point 0,0,0 --radii 0.05,0.025 --cloud-points 2";
    auto r1 = run_cli("--structure heisenberg --seed 5 --out " + out1.string() + args);
    auto r2 = run_cli("--structure heisenberg --seed 5 --out " + out2.string() + args);
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r2.exit_code == 0);
    CHECK(r1.output == r2.output);
    CHECK(ccgeo::read_file((out1 / "sweep.csv").string()) ==
          ccgeo::read_file((out2 / "sweep.csv").string()));
    CHECK(ccgeo::read_file((out1 / "reports.json").string()) ==
          ccgeo::read_file((out2 / "reports.json").string()));
    auto m1 = json::parse(ccgeo::read_file((out1 / "manifest.json").string()));
    auto m2 = json::parse(ccgeo::read_file((out2 / "manifest.json").string()));
    m1.erase("timestamp");
    m2.erase("timestamp");
    CHECK(m1 == m2);
    // Different seed shifts the cloud sample.
    auto out3 = fresh_dir("det3");
    auto r3 = run_cli("--structure heisenberg --seed 6 --out " + out3.string() + args);
    REQUIRE(r3.exit_code == 0);
    CHECK(ccgeo::read_file((out1 / "sweep.csv").string()) !=
          ccgeo::read_file((out3 / "sweep.csv").string()));
}
