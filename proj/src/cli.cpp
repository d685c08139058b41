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

#include "qnm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "qnm/adversary_zoo.hpp"
#include "qnm/algebra_checks.hpp"
#include "qnm/errors.hpp"
#include "qnm/extractors.hpp"
#include "qnm/json_io.hpp"
#include "qnm/nmc.hpp"
#include "qnm/nmss.hpp"
#include "qnm/secret_sharing.hpp"
#include "qnm/tamper_harness.hpp"

namespace qnm {

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string jsonl;
    unsigned threads = 1;
    std::string mode;
    bool strict = false;
    bool timing = false;
    unsigned qubits = 1;
    std::vector<double> deltas;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Quotes a CSV field when needed (adversary specs contain commas).
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

// Runs jobs on up to \p threads workers; results stay in job order.
template <typename R>
std::vector<R> parallel_map(std::size_t count, unsigned threads, const std::function<R(std::size_t)>& job) {
    std::vector<R> results(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                results[i] = job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

class Sink {
  public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw ConfigError("cannot open output '" + path + "'");
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

  private:
    std::ofstream file_;
    std::ostream* out_;
};

RunConfig config_for(const Options& opt, const std::string& command) {
    RunConfig cfg;
    if (!opt.config.empty()) {
        cfg = load_run_config(opt.config);
        if (cfg.command != command)
            throw ConfigError("config is for '" + cfg.command + "', not '" + command + "'");
    } else {
        cfg.command = command;
    }
    if (opt.seed) cfg.seed = opt.seed;
    return cfg;
}

std::uint64_t require_seed(const RunConfig& cfg) {
    if (!cfg.seed) throw ConfigError("a seed is required (--seed or \"seed\" in the config)");
    return *cfg.seed;
}

CodeParams with_mode(CodeParams p, const std::string& mode) {
    if (mode.empty()) return p;
    return CodeParams::make(p.b, p.ell, p.delta_num, p.delta_den, parse_code_mode(mode));
}

struct Row {
    ExperimentResult res;
    double wall_ms = 0.0;
    bool checks_ok = true;
    std::string failure;
};

Json row_json(const std::string& scheme, const Row& row, const CodeParams& code) {
    return Json{{"scheme", scheme},
                {"adversary", row.res.adversary},
                {"b", code.b},
                {"ell", code.ell},
                {"delta", code.delta()},
                {"p_same", row.res.simulator.p_same},
                {"p_epr", row.res.simulator.p_epr},
                {"p_A", row.res.simulator.p_A},
                {"epsilon_measured", row.res.epsilon},
                {"checks_passed", row.checks_ok}};
}

int emit_experiment(const std::string& scheme, const std::vector<Row>& rows, const CodeParams& code,
                    const Options& opt, std::ostream& out, std::ostream& err) {
    Sink sink(opt.out, out);
    auto& s = sink.stream();
    s << "scheme,adversary,b,ell,delta,p_same,p_epr,p_A,epsilon_measured,wall_ms\n";
    int status = kExitOk;
    for (const auto& r : rows) {
        s << scheme << ',' << csv_field(r.res.adversary) << ',' << code.b << ',' << code.ell << ','
          << num(code.delta()) << ',' << num(r.res.simulator.p_same) << ',' << num(r.res.simulator.p_epr) << ','
          << num(r.res.simulator.p_A) << ',' << num(r.res.epsilon) << ',' << (opt.timing ? num(r.wall_ms) : "")
          << '\n';
        if (!r.checks_ok) {
            err << "check failed for " << r.res.adversary << ": " << r.failure << '\n';
            status = kExitCheckFailed;
        }
    }
    if (!opt.jsonl.empty()) {
        Sink js(opt.jsonl, out);
        for (const auto& r : rows) {
            Json j = row_json(scheme, r, code);
            if (opt.timing) j["wall_ms"] = r.wall_ms;
            js.stream() << j.dump() << '\n';
        }
    }
    return status;
}

// Checks shared by both experiment kinds.
void common_checks(Row& row, const DensityOperator& sigma, const std::optional<double>& bound) {
    const auto& sim = row.res.simulator;
    const auto& eta = row.res.final_state;
    auto fail = [&](const std::string& why) {
        row.checks_ok = false;
        if (!row.failure.empty()) row.failure += "; ";
        row.failure += why;
    };
    if (std::abs(eta.matrix.trace().real() - 1.0) > 1e-9) fail("final state is not normalized");
    if (sim.p_A < -1e-12 || sim.p_A > 1.0 + 1e-12) fail("p_A outside [0, 1]");
    if (std::abs(sim.gamma.trace().real() - 1.0) > 1e-9) fail("gamma is not normalized");
    if (sigma.layout().contains("Mh")) {
        const Matrix diff = marginal(eta, {"Mh"}).matrix - marginal(sigma.op(), {"Mh"}).matrix;
        if (diff.cwiseAbs().maxCoeff() > 1e-10) fail("purification marginal changed");
    }
    if (bound && row.res.epsilon > *bound + 1e-12) fail("epsilon " + num(row.res.epsilon) + " above bound");
}

template <typename F>
Row timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Row r;
    r.res = f();
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

int cmd_verify_algebra(const Options& opt, std::ostream& out, std::ostream& err) {
    const auto checks = verify_algebra(opt.qubits, opt.seed.value_or(1));
    Sink sink(opt.out, out);
    sink.stream() << "check,residual,tolerance,passed\n";
    int status = kExitOk;
    for (const auto& c : checks) {
        sink.stream() << c.name << ',' << num(c.residual) << ',' << num(c.tolerance) << ','
                      << (c.passed ? "true" : "false") << '\n';
        if (!c.passed) {
            err << "algebra check failed: " << c.name << '\n';
            status = kExitCheckFailed;
        }
    }
    return status;
}

int cmd_rate_table(const Options& opt, std::ostream& out, std::ostream&) {
    std::vector<double> deltas = opt.deltas;
    if (deltas.empty()) deltas = {0.01, 0.05, 0.1};
    std::vector<RateRow> rows;
    try {
        rows = rate_table(deltas);
    } catch (const InvalidParams& e) {
        throw ConfigError(e.what());
    }
    Sink sink(opt.out, out);
    sink.stream() << "delta,n_over_ell,b_max_over_ell,rate,limit\n";
    for (const auto& r : rows)
        sink.stream() << num(r.delta) << ',' << num(r.n_over_ell) << ',' << num(r.b_max_over_ell) << ','
                      << num(r.rate) << ',' << num(1.0 / 11.0) << '\n';
    return kExitOk;
}

int cmd_nmc_run(const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig cfg = config_for(opt, "nmc-run");
    const std::uint64_t seed = require_seed(cfg);
    const CodeParams code = with_mode(cfg.code.value_or(CodeParams::desk(CodeMode::ExactUniformClifford)), opt.mode);
    code.validate();
    Rng rng(seed);
    const DensityOperator sigma = make_message(cfg.message, code.message_dim(), rng);
    const auto names = cfg.adversaries.empty() ? split_zoo_names(code) : cfg.adversaries;
    std::vector<SplitAdversary> advs;
    for (const auto& n : names) advs.push_back(make_split_adversary(n, code));
    const auto rows = parallel_map<Row>(advs.size(), opt.threads, [&](std::size_t i) {
        Row r = timed([&] { return nm_check(advs[i], sigma, "M", code); });
        common_checks(r, sigma, cfg.epsilon_bound);
        return r;
    });
    return emit_experiment("nmc", rows, code, opt, out, err);
}

int cmd_nmss_run(const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig cfg = config_for(opt, "nmss-run");
    const std::uint64_t seed = require_seed(cfg);
    NmssParams prm = cfg.nmss.value_or(NmssParams::desk());
    prm.code = with_mode(prm.code, opt.mode);
    for (const auto& w : prm.validate(opt.strict)) err << "warning: " << w << '\n';
    Rng rng(seed);
    const DensityOperator sigma = make_message(cfg.message, prm.code.message_dim(), rng);
    const std::vector<std::string> names =
        cfg.adversaries.empty() ? std::vector<std::string>{"identity", "pauli_left(1:1)", "r_xor(1:8)"}
                                : cfg.adversaries;
    std::vector<ThresholdAdversary> advs;
    for (const auto& n : names) advs.push_back(make_threshold_adversary(n, prm));
    const auto rows = parallel_map<Row>(advs.size(), opt.threads, [&](std::size_t i) {
        Row r = timed([&] { return run_nmss_experiment(advs[i], sigma, "M", prm); });
        common_checks(r, sigma, cfg.epsilon_bound);
        if (names[i] == "identity" && r.res.epsilon > 1e-7) {
            r.checks_ok = false;
            r.failure = "identity adversary changed the message";
        }
        return r;
    });
    return emit_experiment("nmss", rows, prm.code, opt, out, err);
}

int cmd_lrss_run(const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig cfg = config_for(opt, "lrss-run");
    const LrssParams prm = cfg.lrss.value_or(LrssParams{});
    const auto bound = validate_lrss(prm, opt.strict);
    if (!bound.satisfied) err << "warning: share-size inequality not met (" << num(bound.lhs) << " < " << num(bound.rhs) << ")\n";
    const std::vector<unsigned> T = cfg.unauthorized.empty() ? std::vector<unsigned>{1} : cfg.unauthorized;
    const std::vector<std::string> names =
        cfg.adversaries.empty() ? std::vector<std::string>{"constant", "parity", "teleport"} : cfg.adversaries;
    std::vector<std::uint32_t> secrets = cfg.secrets;
    if (secrets.empty())
        for (std::uint32_t s = 0; s < (1u << prm.b); ++s) secrets.push_back(s);

    struct LRow {
        std::string adversary;
        std::uint32_t secret = 0;
        double distance = 0.0, wall_ms = 0.0;
    };
    std::vector<std::pair<std::size_t, std::uint32_t>> jobs;
    std::vector<LeakageAdversary> advs;
    for (std::size_t a = 0; a < names.size(); ++a) {
        advs.push_back(make_leakage_adversary(names[a], T, prm));
        for (auto s : secrets) jobs.emplace_back(a, s);
    }
    const auto rows = parallel_map<LRow>(jobs.size(), opt.threads, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        LRow r{names[jobs[i].first], jobs[i].second, 0.0, 0.0};
        r.distance = run_leakage_experiment(advs[jobs[i].first], jobs[i].second, prm).distance;
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return r;
    });
    std::string tset;
    for (auto t : T) tset += (tset.empty() ? "" : " ") + std::to_string(t);
    Sink sink(opt.out, out);
    sink.stream() << "scheme,adversary,b,N,p,T,secret,distance,wall_ms\n";
    int status = kExitOk;
    for (const auto& r : rows) {
        sink.stream() << "lrss," << csv_field(r.adversary) << ',' << prm.b << ',' << prm.N << ',' << prm.p << ','
                      << tset << ',' << r.secret << ',' << num(r.distance) << ',' << (opt.timing ? num(r.wall_ms) : "")
                      << '\n';
        if (r.distance > 2.0 + 1e-9 || (cfg.epsilon_bound && r.distance > *cfg.epsilon_bound + 1e-12)) {
            err << "check failed for " << r.adversary << " (secret " << r.secret << ")\n";
            status = kExitCheckFailed;
        }
    }
    return status;
}

int cmd_certify_nmext(const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig cfg = config_for(opt, "certify-nmext");
    const NmExtDescriptor d = make_extractor(cfg.extractor.value_or(ExtractorSpec{}));
    const double tol = cfg.epsilon_bound.value_or(1.0);
    const CertificationReport rep = nmext_certify_classical(d, tol);
    Json j{{"extractor", d.name},
           {"n", d.n},
           {"m", d.m},
           {"r", d.r},
           {"family", rep.family},
           {"pairs_tested", rep.pairs_tested},
           {"strong_x", rep.strong_x},
           {"strong_y", rep.strong_y},
           {"worst_item2", rep.worst_item2},
           {"certified_epsilon", rep.certified_epsilon},
           {"tolerance", rep.tolerance},
           {"within_tolerance", rep.within_tolerance}};
    Sink sink(opt.out, out);
    sink.stream() << j.dump(2) << '\n';
    if (!rep.within_tolerance) {
        err << "certified epsilon " << num(rep.certified_epsilon) << " exceeds tolerance " << num(tol) << '\n';
        return kExitCheckFailed;
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact small-instance laboratory for split-state non-malleable codes and secret sharing"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool config) {
        if (config) sub->add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "64-bit seed");
        sub->add_option("--out", opt.out, "write the report to this file instead of stdout");
        sub->add_option("--threads", opt.threads, "maximum worker threads")->check(CLI::Range(1u, 256u));
        sub->add_flag("--strict-params", opt.strict, "reject parameters that miss the share-size inequalities");
        sub->add_flag("--record-timing", opt.timing, "fill the wall_ms column");
    };
    auto* va = app.add_subcommand("verify-algebra", "exhaustive twirl and one-design identities");
    add_common(va, false);
    va->add_option("--qubits", opt.qubits, "number of qubits (1 or 2)")->check(CLI::Range(1u, 2u));
    auto* rt = app.add_subcommand("rate-table", "rate arithmetic of the split-state code");
    add_common(rt, false);
    rt->add_option("--deltas", opt.deltas, "comma-separated delta values")->delimiter(',');
    auto* nmc = app.add_subcommand("nmc-run", "split-state tampering experiments");
    add_common(nmc, true);
    auto* nmss = app.add_subcommand("nmss-run", "threshold tampering experiments on the NMSS scheme");
    add_common(nmss, true);
    auto* lrss = app.add_subcommand("lrss-run", "leakage experiments on the 2-of-p LRSS scheme");
    add_common(lrss, true);
    auto* cert = app.add_subcommand("certify-nmext", "classical certification of a tabulated extractor");
    add_common(cert, true);
    for (auto* sub : {nmc, nmss})
        sub->add_option("--mode", opt.mode, "real, ideal-key or exact-uniform-clifford")
            ->check(CLI::IsMember({"real", "ideal-key", "exact-uniform-clifford"}));
    for (auto* sub : {nmc, nmss}) sub->add_option("--jsonl", opt.jsonl, "also write JSON lines to this file");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, r;
        const int code = app.exit(e, o, r);
        out << o.str();
        err << r.str();
        return code == 0 ? kExitOk : kExitUsage;
    }
    for (auto* sub : app.get_subcommands())
        if (sub->count("--seed") > 0) opt.seed = seed;

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "verify-algebra") return cmd_verify_algebra(opt, out, err);
        if (name == "rate-table") return cmd_rate_table(opt, out, err);
        if (name == "nmc-run") return cmd_nmc_run(opt, out, err);
        if (name == "nmss-run") return cmd_nmss_run(opt, out, err);
        if (name == "lrss-run") return cmd_lrss_run(opt, out, err);
        if (name == "certify-nmext") return cmd_certify_nmext(opt, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidParams& e) {
        err << "invalid parameters: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SizeLimitExceeded& e) {
        err << "size limit: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
    err << "unknown command\n";
    return kExitUsage;
}

}  // namespace qnm
