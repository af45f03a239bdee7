#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hallkit/cli.hpp"

namespace fs = std::filesystem;
using namespace hallkit;

namespace {

const std::string kData = HALLKIT_DATA_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "hallkit");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir()
{
    const fs::path d = fs::temp_directory_path() / "hallkit_cli_test";
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_data_rows(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line;
    int rows = -1;  // column header
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    return rows;
}

}  // namespace

TEST_CASE("chern command")
{
    const Run r = run_cli({"chern", "--model", kData + "/haldane.json", "--grid", "24"});
    CHECK(r.code == 0);
    CHECK(r.out.find("chern = -1\n") != std::string::npos);
    const Run d = run_cli({"chern", "--model", kData + "/haldane.json", "--grid", "24", "--gauge", "displaced"});
    CHECK(d.out.find("chern = -1\n") != std::string::npos);
}

TEST_CASE("phase diagram")
{
    const Run r = run_cli({"phase-diagram", "--t2", "0.1", "--phi-steps", "41", "--w-steps", "41"});
    REQUIRE(r.code == 0);
    CHECK(count_data_rows(r.out) == 1681);
    CHECK(r.out.find("phi,W,m_plus,m_minus,chern_analytic,chern_numeric,gap") != std::string::npos);
    CHECK(r.out.rfind("# hallkit phase-diagram", 0) == 0);

    const Run j = run_cli({"phase-diagram", "--phi-steps", "3", "--w-steps", "2", "--format", "json"});
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["rows"].size() == 6);
    CHECK(doc["columns"][0] == "phi");
}

TEST_CASE("deterministic output")
{
    const std::vector<std::string> args = {"phase-diagram", "--phi-steps", "9", "--w-steps", "9", "--k-grid", "12"};
    const Run a = run_cli(args);
    std::vector<std::string> threaded = args;
    threaded.insert(threaded.end(), {"--threads", "3"});
    const Run b = run_cli(threaded);
    CHECK(a.code == 0);
    // the echoed thread count is the only difference
    auto strip = [](const std::string& s) {
        std::istringstream in(s);
        std::string line, outs;
        while (std::getline(in, line))
            if (line.find("threads") == std::string::npos) outs += line + "\n";
        return outs;
    };
    CHECK(strip(a.out) == strip(b.out));
    CHECK(run_cli(args).out == a.out);

    const std::vector<std::string> ed = {"ward-check", "--model", kData + "/haldane_hubbard.json", "--L", "2",
                                         "--beta", "4", "--n-freq", "2"};
    const Run e1 = run_cli(ed), e2 = run_cli(ed);
    CHECK(e1.code == 0);
    CHECK(e1.out == e2.out);
}

TEST_CASE("JSON mirrors CSV")
{
    const fs::path d = scratch_dir();
    const fs::path csv = d / "bands.csv", json = d / "bands.json";
    const std::string model = kData + "/haldane.json";
    REQUIRE(run_cli({"bands", "--model", model, "--grid", "4", "--out", csv.string()}).code == 0);
    REQUIRE(run_cli({"bands", "--model", model, "--grid", "4", "--out", json.string(), "--format", "json"}).code ==
            0);
    const auto doc = nlohmann::json::parse(slurp(json));
    const std::string text = slurp(csv);
    CHECK(count_data_rows(text) == int(doc["rows"].size()));
    // first data row, cell by cell
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
    }
    std::getline(in, line);
    std::istringstream cells(line);
    std::string cell;
    for (size_t c = 0; std::getline(cells, cell, ','); ++c) CHECK(std::stod(cell) == doc["rows"][0][doc["columns"][c].get<std::string>()].get<double>());
    CHECK_FALSE(fs::exists(d / "bands.csv.partial"));
}

TEST_CASE("exit codes")
{
    const std::string model = kData + "/haldane.json";
    CHECK(run_cli({"chern", "--model", model, "--bogus"}).code == cli::validation_error);
    CHECK(run_cli({"nonexistent"}).code == cli::validation_error);
    CHECK(run_cli({"chern", "--model", "/no/such/file.json"}).code == cli::validation_error);
    CHECK(run_cli({"chern", "--model", model, "--format", "xml"}).code == cli::validation_error);
    // every band filled
    CHECK(run_cli({"chern", "--model", model, "--mu", "10"}).out.find("chern = 0") != std::string::npos);
    const Run g = run_cli({"ed-sigma", "--model", model, "--L", "5"});
    CHECK(g.code == cli::guard_refusal);
    CHECK(g.err.find("refused") != std::string::npos);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("failed runs leave no output file")
{
    const fs::path d = scratch_dir();
    const fs::path out = d / "refused.csv";
    fs::remove(out);
    const Run r =
        run_cli({"ed-sigma", "--model", kData + "/haldane.json", "--L", "5", "--out", out.string()});
    CHECK(r.code == cli::guard_refusal);
    CHECK_FALSE(fs::exists(out));
    CHECK_FALSE(fs::exists(d / "refused.csv.partial"));
    const Run w = run_cli({"bands", "--model", kData + "/haldane.json", "--out", (d / "missing" / "x.csv").string()});
    CHECK(w.code == cli::validation_error);
    CHECK_FALSE(fs::exists(d / "missing" / "x.csv.partial"));
}

TEST_CASE("policy overrides")
{
    const fs::path d = scratch_dir();
    const fs::path pol = d / "policy.json";
    {
        std::ofstream(pol) << R"({"max_modes": 4})";
    }
    const Run r = run_cli({"ed-sigma", "--model", kData + "/haldane.json", "--L", "2", "--policy", pol.string()});
    CHECK(r.code == cli::guard_refusal);
    {
        std::ofstream(pol) << R"({"no_such_field": 1})";
    }
    CHECK(run_cli({"chern", "--model", kData + "/haldane.json", "--policy", pol.string()}).code ==
          cli::validation_error);

    const NumericPolicy p = cli::policy_from_json(nlohmann::json{{"gap_threshold", 1e-3}, {"full_dim_max", 10}});
    CHECK(p.gap_threshold == 1e-3);
    CHECK(p.full_dim_max == 10);
    CHECK_THROWS_AS(cli::policy_from_json(nlohmann::json{{"solver_tol", -1.0}}), ValidationError);
    CHECK_THROWS_AS(cli::policy_from_json(nlohmann::json{{"max_modes", 2.5}}), ValidationError);
    const auto back = cli::policy_from_json(cli::policy_to_json(default_policy()));
    CHECK(back.max_modes == default_policy().max_modes);
    CHECK(back.solver_tol == default_policy().solver_tol);
}

TEST_CASE("number formatting")
{
    CHECK(cli::format_double(0.1) == "0.10000000000000001");
    CHECK(cli::format_double(-1.0) == "-1");
    CHECK(std::stod(cli::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("ED commands")
{
    const std::string hh = kData + "/haldane_hubbard.json";
    const Run s = run_cli({"sum-rule", "--model", hh, "--L", "2", "--beta", "10"});
    CHECK(s.code == 0);
    CHECK(s.out.rfind("deviation = ", 0) == 0);
    const Run w = run_cli({"wick-rotation", "--model", hh, "--L", "2", "--omegas", "0.1,0.5"});
    CHECK(w.code == 0);
    const Run u = run_cli({"universality", "--model", hh, "--U-list", "0,0.1", "--L-list", "2"});
    CHECK(u.code == 0);
    CHECK(count_data_rows(u.out) == 2);
    const Run f = run_cli({"free-sigma", "--model", kData + "/haldane.json", "--grid", "48"});
    CHECK(f.code == 0);
    const Run g = run_cli({"gap", "--model", kData + "/haldane.json", "--grid", "24"});
    CHECK(g.code == 0);
}
