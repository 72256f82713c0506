#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun run(const std::string& args)
{
    const std::string cmd = std::string(ISAFP_CLI) + " " + args + " 2>&1";
    CliRun r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const std::string kCamera = std::string(ISAFP_TEST_DATA) + "/camera.png";

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir = fs::temp_directory_path()
              / ("isafp_cli_" + std::to_string(::getpid()) + "_"
                 + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    // Small 3×3 scene that reconstructs in well under a second.
    CliRun simulate_small(const std::string& out, const std::string& extra = "")
    {
        return run("simulate --target " + kCamera + " --n 64 --radius 6 --grid 3x3 --kmax 8 --out " + out + " "
                   + extra);
    }

    fs::path dir;
};

}  // namespace

TEST_F(Cli, SimulateSingleRecord)
{
    const CliRun r = run("simulate --target " + kCamera + " --n 64 --radius 6 --grid 1x1 --out " + path("one"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("records          1"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("overlap          n/a"), std::string::npos) << r.out;
}

TEST_F(Cli, SimulateDefaultScene)
{
    const CliRun r = run("simulate --target " + kCamera + " --out " + path("ds"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("records          121"), std::string::npos) << r.out;
    // Neighbour spacing 12 px with r = 16.
    EXPECT_NE(r.out.find("overlap          0.541"), std::string::npos) << r.out;
}

TEST_F(Cli, OversizedRadiusIsValidationError)
{
    const CliRun r = run("simulate --target " + kCamera + " --radius 200 --out " + path("bad"));
    EXPECT_EQ(r.code, 1) << r.out;
    EXPECT_NE(r.out.find("radius"), std::string::npos) << r.out;
    EXPECT_FALSE(fs::exists(path("bad")));
}

TEST_F(Cli, ConflictingAngleOptions)
{
    const CliRun r = run("simulate --target " + kCamera + " --kmax 8 --theta-max 1e-7 --out " + path("bad"));
    EXPECT_EQ(r.code, 1) << r.out;
}

TEST_F(Cli, ZeroIterationsRejected)
{
    ASSERT_EQ(simulate_small(path("ds")).code, 0);
    const CliRun r = run("reconstruct " + path("ds") + " --iters 0 --out " + path("res"));
    EXPECT_EQ(r.code, 1) << r.out;
    EXPECT_NE(r.out.find("iterations"), std::string::npos) << r.out;
}

TEST_F(Cli, ReconstructEvaluatePlot)
{
    ASSERT_EQ(simulate_small(path("ds")).code, 0);
    const CliRun rec = run("reconstruct " + path("ds") + " --iters 20 --out " + path("res"));
    ASSERT_EQ(rec.code, 0) << rec.out;
    EXPECT_NE(rec.out.find("initializer      classical"), std::string::npos) << rec.out;
    EXPECT_NE(rec.out.find("k corrected"), std::string::npos) << rec.out;

    const CliRun ev = run("evaluate " + path("res") + " --dataset " + path("ds") + " --json --out " + path("eval.json"));
    ASSERT_EQ(ev.code, 0) << ev.out;
    const auto doc = nlohmann::json::parse(slurp(path("eval.json")));
    EXPECT_LT(doc.at("amplitude_rmse").get<double>(), 0.2);
    EXPECT_EQ(nlohmann::json::parse(ev.out), doc);

    const CliRun self = run("evaluate " + path("res") + " --truth-result " + path("res"));
    ASSERT_EQ(self.code, 0) << self.out;
    EXPECT_NE(self.out.find("amplitude_rmse     0\n"), std::string::npos) << self.out;
    EXPECT_NE(self.out.find("k_rmse             0\n"), std::string::npos) << self.out;

    const CliRun pl = run("plot " + path("res") + " --dataset " + path("ds") + " --out " + path("png"));
    ASSERT_EQ(pl.code, 0) << pl.out;
    for (const char* f : {"amplitude.png", "phase.png", "kspace.png"}) EXPECT_TRUE(fs::exists(dir / "png" / f)) << f;
    const CliRun plain = run("plot " + path("res") + " --no-truth");
    ASSERT_EQ(plain.code, 0) << plain.out;
    EXPECT_TRUE(fs::exists(dir / "res" / "kspace.png"));
}

TEST_F(Cli, EvaluateArgumentErrors)
{
    ASSERT_EQ(simulate_small(path("ds")).code, 0);
    ASSERT_EQ(run("reconstruct " + path("ds") + " --iters 2 --out " + path("res")).code, 0);
    EXPECT_EQ(run("evaluate " + path("res")).code, 1);
    fs::create_directories(path("empty"));
    EXPECT_EQ(run("evaluate " + path("empty") + " --dataset " + path("ds")).code, 2);
    EXPECT_EQ(run("reconstruct " + path("nowhere") + " --out " + path("r2")).code, 2);
}

TEST_F(Cli, ExternalPredictions)
{
    ASSERT_EQ(simulate_small(path("ds")).code, 0);
    nlohmann::json preds = {{"source", "test"}, {"predictions", nlohmann::json::array()}};
    for (int j = 0; j < 9; ++j) preds["predictions"].push_back({{"index", j}, {"kx", 0.0}, {"ky", 0.0}});
    std::ofstream(path("p.json")) << preds.dump();
    const CliRun r = run("reconstruct " + path("ds") + " --iters 2 --init file:" + path("p.json") + " --out " + path("res"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("initializer      external"), std::string::npos) << r.out;

    preds["predictions"].erase(3);
    std::ofstream(path("q.json")) << preds.dump();
    const CliRun bad = run("reconstruct " + path("ds") + " --init file:" + path("q.json") + " --out " + path("r2"));
    EXPECT_EQ(bad.code, 1) << bad.out;
    EXPECT_NE(bad.out.find("missing indices: [3]"), std::string::npos) << bad.out;
    EXPECT_EQ(run("reconstruct " + path("ds") + " --init file:" + path("none.json") + " --out " + path("r3")).code, 2);
}

TEST_F(Cli, Deterministic)
{
    ASSERT_EQ(simulate_small(path("a"), "--noise poisson:1000 --seed 3").code, 0);
    ASSERT_EQ(simulate_small(path("b"), "--noise poisson:1000 --seed 3").code, 0);
    ASSERT_EQ(run("reconstruct " + path("a") + " --iters 12 --out " + path("ra")).code, 0);
    ASSERT_EQ(run("reconstruct " + path("b") + " --iters 12 --out " + path("rb")).code, 0);
    for (const auto& [x, y] : {std::pair{"a", "b"}, std::pair{"ra", "rb"}}) {
        for (const auto& e : fs::directory_iterator(dir / x)) {
            const fs::path other = dir / y / e.path().filename();
            ASSERT_TRUE(fs::exists(other)) << other;
            std::string sa = slurp(e.path()), sb = slurp(other);
            if (e.path().extension() == ".json") {
                // Paths recorded in metadata differ by directory name.
                auto ja = nlohmann::json::parse(sa), jb = nlohmann::json::parse(sb);
                ja.erase("dataset");
                jb.erase("dataset");
                EXPECT_EQ(ja, jb) << e.path();
            } else {
                EXPECT_EQ(sa, sb) << e.path();
            }
        }
    }
}
