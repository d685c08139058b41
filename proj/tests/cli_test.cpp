// Copyright 2026 The qnmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qnm/cli.hpp"
#include "qnm/errors.hpp"
#include "qnm/json_io.hpp"

using namespace qnm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out, err;
};

Outcome run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Outcome o;
    o.code = run_cli(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class TempDir {
  public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("qnmlab_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path file(const std::string& name, const std::string& content = "") const {
        const fs::path p = path_ / name;
        if (!content.empty()) std::ofstream(p, std::ios::binary) << content;
        return p;
    }

  private:
    fs::path path_;
};

const char* kDemo = R"J({
  "command": "nmc-run",
  "code": {"b": 1, "ell": 14, "delta_num": 1, "delta_den": 7, "mode": "real"},
  "message": {"kind": "random_mixed", "rank": 2, "purify": true},
  "adversaries": ["identity", "pauli(Z:X)", "classical(xor:1,add:1)", "haar_random(4)"]
})J";

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Cli, VerifyAlgebraPasses) {
    const auto o = run({"verify-algebra", "--qubits", "1"});
    EXPECT_EQ(o.code, kExitOk) << o.err;
    EXPECT_EQ(lines(o.out).front(), "check,residual,tolerance,passed");
    EXPECT_EQ(o.out.find("false"), std::string::npos);
}

TEST(Cli, RateTableApproachesOneEleventh) {
    const auto o = run({"rate-table", "--deltas", "0.1,0.05,0.01,0.0001"});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    const auto rows = lines(o.out);
    ASSERT_EQ(rows.size(), 5u);
    double prev = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::vector<std::string> f;
        std::istringstream in(rows[i]);
        for (std::string c; std::getline(in, c, ',');) f.push_back(c);
        const double rate = std::stod(f.at(3));
        EXPECT_GT(rate, prev);
        EXPECT_LT(rate, 1.0 / 11.0);
        prev = rate;
    }
    EXPECT_NEAR(prev, 1.0 / 11.0, 1e-3);
    EXPECT_EQ(run({"rate-table", "--deltas", "0.7"}).code, kExitUsage);
}

TEST(Cli, NmcRunIsDeterministic) {
    TempDir dir;
    const auto cfg = dir.file("demo.json", kDemo);
    const std::string before = slurp(cfg);
    const auto a = dir.file("a.csv"), b = dir.file("b.csv");
    ASSERT_EQ(run({"nmc-run", "--config", cfg.string(), "--seed", "7", "--out", a.string()}).code, kExitOk);
    ASSERT_EQ(run({"nmc-run", "--config", cfg.string(), "--seed", "7", "--out", b.string(), "--threads", "3"}).code,
              kExitOk);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(slurp(cfg), before);
    const auto rows = lines(slurp(a));
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], "scheme,adversary,b,ell,delta,p_same,p_epr,p_A,epsilon_measured,wall_ms");
    EXPECT_EQ(rows[2].back(), ',');  // wall_ms left empty
    EXPECT_NE(rows[3].find("\"classical(xor:1,add:1)\""), std::string::npos);
    // A different seed changes the random message and therefore the row values.
    const auto c = dir.file("c.csv");
    ASSERT_EQ(run({"nmc-run", "--config", cfg.string(), "--seed", "8", "--out", c.string()}).code, kExitOk);
    EXPECT_EQ(lines(slurp(c))[1].substr(0, 20), rows[1].substr(0, 20));
}

TEST(Cli, TimingAndJsonLines) {
    TempDir dir;
    const auto cfg = dir.file("demo.json", kDemo);
    const auto j = dir.file("rows.jsonl");
    const auto o = run({"nmc-run", "--config", cfg.string(), "--seed", "1", "--record-timing", "--jsonl", j.string()});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    EXPECT_NE(lines(o.out)[1].back(), ',');
    const auto js = lines(slurp(j));
    ASSERT_EQ(js.size(), 4u);
    const auto row = Json::parse(js[1]);
    EXPECT_EQ(row.at("adversary"), "pauli(Z:X)");
    EXPECT_NEAR(row.at("p_same").get<double>(), 1.0, 1e-12);
    EXPECT_TRUE(row.contains("wall_ms"));
}

TEST(Cli, UsageAndConfigErrors) {
    TempDir dir;
    EXPECT_EQ(run({}).code, kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(run({"--help"}).code, kExitOk);
    EXPECT_EQ(run({"nmc-run"}).code, kExitUsage);  // seed missing
    EXPECT_EQ(run({"nmc-run", "--seed", "1", "--mode", "sideways"}).code, kExitUsage);
    EXPECT_EQ(run({"verify-algebra", "--qubits", "3"}).code, kExitUsage);
    const auto bad_key = dir.file("k.json", R"J({"command": "nmc-run", "seed": 1, "colour": "red"})J");
    EXPECT_EQ(run({"nmc-run", "--config", bad_key.string()}).code, kExitUsage);
    const auto bad_adv = dir.file("a.json", R"J({"command": "nmc-run", "seed": 1, "adversaries": ["teleport"]})J");
    const auto o = run({"nmc-run", "--config", bad_adv.string()});
    EXPECT_EQ(o.code, kExitUsage);
    EXPECT_NE(o.err.find("unknown split-state adversary"), std::string::npos);
    const auto wrong = dir.file("w.json", R"J({"command": "lrss-run"})J");
    EXPECT_EQ(run({"nmc-run", "--seed", "1", "--config", wrong.string()}).code, kExitUsage);
    const auto broken = dir.file("b.json", "{ not json");
    EXPECT_EQ(run({"nmc-run", "--seed", "1", "--config", broken.string()}).code, kExitUsage);
}

TEST(Cli, CheckFailureExitsWithTwo) {
    TempDir dir;
    const auto cfg = dir.file("bound.json", R"J({"command": "nmc-run", "seed": 3, "epsilon_bound": 0.1,
        "adversaries": ["identity", "pauli(Z:X)"]})J");
    const auto o = run({"nmc-run", "--config", cfg.string()});
    EXPECT_EQ(o.code, kExitCheckFailed);
    EXPECT_NE(o.err.find("pauli(Z:X)"), std::string::npos);
}

TEST(Cli, NmssRunAndStrictParams) {
    const auto o = run({"nmss-run", "--seed", "2"});
    EXPECT_EQ(o.code, kExitOk) << o.err;
    EXPECT_EQ(lines(o.out).size(), 4u);
    EXPECT_NE(o.err.find("warning"), std::string::npos);
    EXPECT_EQ(run({"nmss-run", "--seed", "2", "--strict-params"}).code, kExitUsage);
}

TEST(Cli, LrssRunReportsExactDistances) {
    const auto o = run({"lrss-run"});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    const auto rows = lines(o.out);
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0], "scheme,adversary,b,N,p,T,secret,distance,wall_ms");
    EXPECT_EQ(rows[1], "lrss,constant,1,3,2,1,0,0.222222222222,");
}

TEST(Cli, CertifyExtractor) {
    TempDir dir;
    const auto ok = run({"certify-nmext"});
    EXPECT_EQ(ok.code, kExitOk) << ok.err;
    EXPECT_TRUE(Json::parse(ok.out).at("within_tolerance").get<bool>());
    const auto tight = dir.file("t.json", R"J({"command": "certify-nmext", "epsilon_bound": 0.001,
        "extractor": {"kind": "inner_product", "field_k": 1, "length": 4}})J");
    EXPECT_EQ(run({"certify-nmext", "--config", tight.string()}).code, kExitCheckFailed);
}

TEST(Config, RoundTripIsIdentity) {
    const std::vector<std::string> configs = {
        kDemo,
        R"J({"command": "nmss-run", "seed": 5, "nmss": {"t": 3, "p": 3, "code": {"b": 1, "ell": 3, "delta_num": 1,
            "delta_den": 3, "mode": "exact-uniform-clifford"}, "left_q": 5, "left_qudits": 1, "lr_N": 1,
            "ell_leak": 2.5, "epsilon": 0.5}, "adversaries": ["r_xor(1:8)"], "epsilon_bound": 0.75})J",
        R"J({"command": "lrss-run", "lrss": {"b": 1, "N": 3, "ell_leak": 1, "epsilon": 0.5, "p": 3},
            "unauthorized": [2], "secrets": [1]})J",
        R"J({"command": "certify-nmext", "extractor": {"kind": "poly_hash", "n": 6, "m": 2, "r": 1, "offset_u": 2}})J",
        R"J({"command": "verify-algebra"})J",
    };
    for (const auto& text : configs) {
        const RunConfig first = run_config_from_json(Json::parse(text));
        const Json serialized = to_json(first);
        const RunConfig second = run_config_from_json(serialized);
        EXPECT_TRUE(first == second) << text;
        EXPECT_EQ(to_json(second).dump(), serialized.dump());
    }
}

TEST(Config, RejectsBadValues) {
    EXPECT_THROW(run_config_from_json(Json::parse(R"J({"seed": 1})J")), ConfigError);
    EXPECT_THROW(run_config_from_json(Json::parse(R"J({"command": "nmc-run", "seed": -4})J")), ConfigError);
    EXPECT_THROW(run_config_from_json(Json::parse(R"J({"command": "nmc-run", "code": {"b": 1}})J")), ConfigError);
    EXPECT_THROW(run_config_from_json(Json::parse(
                     R"J({"command": "nmc-run", "code": {"b": 1, "ell": 10, "delta_num": 1, "delta_den": 5, "mode": "real"}})J")),
                 ConfigError);
    EXPECT_THROW(run_config_from_json(Json::parse(R"J({"command": "x", "message": {"kind": "basis", "shape": 2}})J")),
                 ConfigError);
}

TEST(Binary, ExitCodesAndByteIdenticalReruns) {
    const char* bin = std::getenv("QNMLAB_BIN");
    if (bin == nullptr) GTEST_SKIP() << "QNMLAB_BIN not set";
    TempDir dir;
    const auto cfg = dir.file("demo.json", kDemo);
    const auto a = dir.file("a.csv"), b = dir.file("b.csv");
    auto sh = [&](const std::string& args) {
        const int rc = std::system((std::string(bin) + " " + args + " > /dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    EXPECT_EQ(sh("verify-algebra --qubits 1"), 0);
    EXPECT_EQ(sh("nmc-run --config " + cfg.string() + " --seed 7 --out " + a.string()), 0);
    EXPECT_EQ(sh("nmc-run --config " + cfg.string() + " --seed 7 --out " + b.string()), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
    EXPECT_EQ(sh("nmc-run"), 1);
    EXPECT_EQ(sh("rate-table --deltas 0.01,0.05,0.1"), 0);
}
