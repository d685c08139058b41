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

#include "qnm/json_io.hpp"

#include <fstream>
#include <set>

#include "qnm/errors.hpp"

namespace qnm {

namespace {

void allow_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get(const Json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("key '" + key + "' in " + where + " has the wrong type");
    }
}

template <typename T>
T get_or(const Json& j, const std::string& key, const T& fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

unsigned get_unsigned(const Json& j, const std::string& key, const std::string& where) {
    const auto& v = j.contains(key) ? j.at(key) : Json();
    if (!v.is_number_unsigned()) throw ConfigError("key '" + key + "' in " + where + " must be a non-negative integer");
    return v.get<unsigned>();
}

}  // namespace

DensityOperator make_message(const MessageSpec& spec, std::size_t d, Rng& rng) {
    const RegisterLayout layout{{"M", d}};
    DensityOperator sigma = DensityOperator::maximally_mixed(layout);
    if (spec.kind == "maximally_mixed") {
    } else if (spec.kind == "random_pure") {
        const Vector v = haar_state(d, rng);
        sigma = DensityOperator(v * v.adjoint(), layout);
    } else if (spec.kind == "random_mixed") {
        if (spec.rank == 0 || spec.rank > d) throw ConfigError("message rank out of range");
        sigma = DensityOperator(random_density(d, spec.rank, rng), layout);
    } else if (spec.kind == "basis") {
        if (spec.index >= d) throw ConfigError("basis index out of range");
        sigma = DensityOperator::basis_state(layout, spec.index);
    } else {
        throw ConfigError("unknown message kind '" + spec.kind + "'");
    }
    if (!spec.purify) return sigma;
    return canonical_purification(sigma, "Mh").density();
}

NmExtDescriptor make_extractor(const ExtractorSpec& spec) {
    try {
        if (spec.kind == "inner_product") return NmExtDescriptor::inner_product(spec.field_k, spec.length);
        if (spec.kind == "poly_hash")
            return NmExtDescriptor::poly_hash(spec.n, spec.m, spec.r, spec.offset_u, spec.offset_v);
    } catch (const InvalidParams& e) {
        throw ConfigError(std::string("invalid extractor: ") + e.what());
    }
    if (spec.kind == "toy_search") return search_toy_descriptor(spec.n, spec.m, spec.r);
    throw ConfigError("unknown extractor kind '" + spec.kind + "'");
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

Json to_json(const CodeParams& p) {
    return Json{{"b", p.b},
                {"ell", p.ell},
                {"delta_num", p.delta_num},
                {"delta_den", p.delta_den},
                {"mode", to_string(p.mode())}};
}

Json to_json(const NmssParams& p) {
    return Json{{"t", p.t},
                {"p", p.p},
                {"code", to_json(p.code)},
                {"left_q", p.left_q},
                {"left_qudits", p.left_qudits},
                {"lr_N", p.lr_N},
                {"ell_leak", p.ell_leak},
                {"epsilon", p.epsilon}};
}

Json to_json(const LrssParams& p) {
    return Json{{"b", p.b}, {"N", p.N}, {"ell_leak", p.ell_leak}, {"epsilon", p.epsilon}, {"p", p.p}};
}

Json to_json(const MessageSpec& m) {
    return Json{{"kind", m.kind}, {"rank", m.rank}, {"index", m.index}, {"purify", m.purify}};
}

Json to_json(const ExtractorSpec& e) {
    if (e.kind == "inner_product") return Json{{"kind", e.kind}, {"field_k", e.field_k}, {"length", e.length}};
    Json j{{"kind", e.kind}, {"n", e.n}, {"m", e.m}, {"r", e.r}};
    if (e.kind == "poly_hash") {
        j["offset_u"] = e.offset_u;
        j["offset_v"] = e.offset_v;
    }
    return j;
}

Json to_json(const RunConfig& c) {
    Json j;
    j["command"] = c.command;
    if (c.seed) j["seed"] = *c.seed;
    if (c.code) j["code"] = to_json(*c.code);
    if (c.nmss) j["nmss"] = to_json(*c.nmss);
    if (c.lrss) j["lrss"] = to_json(*c.lrss);
    j["message"] = to_json(c.message);
    j["adversaries"] = c.adversaries;
    j["unauthorized"] = c.unauthorized;
    j["secrets"] = c.secrets;
    if (c.epsilon_bound) j["epsilon_bound"] = *c.epsilon_bound;
    if (c.extractor) j["extractor"] = to_json(*c.extractor);
    return j;
}

CodeParams code_params_from_json(const Json& j) {
    const std::string w = "code";
    allow_keys(j, {"b", "ell", "delta_num", "delta_den", "mode"}, w);
    const auto mode = parse_code_mode(get<std::string>(j, "mode", w));
    const unsigned b = get_unsigned(j, "b", w), ell = get_unsigned(j, "ell", w);
    const unsigned dn = get_unsigned(j, "delta_num", w), dd = get_unsigned(j, "delta_den", w);
    try {
        CodeParams p = CodeParams::make(b, ell, dn, dd, mode);
        p.validate();
        return p;
    } catch (const InvalidParams& e) {
        throw ConfigError(std::string("invalid code parameters: ") + e.what());
    }
}

NmssParams nmss_params_from_json(const Json& j) {
    const std::string w = "nmss";
    allow_keys(j, {"t", "p", "code", "left_q", "left_qudits", "lr_N", "ell_leak", "epsilon"}, w);
    NmssParams p;
    p.t = get_unsigned(j, "t", w);
    p.p = get_unsigned(j, "p", w);
    p.code = code_params_from_json(get<Json>(j, "code", w));
    p.left_q = get_unsigned(j, "left_q", w);
    p.left_qudits = get_unsigned(j, "left_qudits", w);
    p.lr_N = get_unsigned(j, "lr_N", w);
    p.ell_leak = get<double>(j, "ell_leak", w);
    p.epsilon = get<double>(j, "epsilon", w);
    return p;
}

LrssParams lrss_params_from_json(const Json& j) {
    const std::string w = "lrss";
    allow_keys(j, {"b", "N", "ell_leak", "epsilon", "p"}, w);
    LrssParams p;
    p.b = get_unsigned(j, "b", w);
    p.N = get_unsigned(j, "N", w);
    p.ell_leak = get<double>(j, "ell_leak", w);
    p.epsilon = get<double>(j, "epsilon", w);
    p.p = get_unsigned(j, "p", w);
    return p;
}

MessageSpec message_from_json(const Json& j) {
    const std::string w = "message";
    allow_keys(j, {"kind", "rank", "index", "purify"}, w);
    MessageSpec m;
    m.kind = get_or<std::string>(j, "kind", m.kind, w);
    m.rank = get_or<std::size_t>(j, "rank", m.rank, w);
    m.index = get_or<std::size_t>(j, "index", m.index, w);
    m.purify = get_or<bool>(j, "purify", m.purify, w);
    return m;
}

ExtractorSpec extractor_from_json(const Json& j) {
    const std::string w = "extractor";
    ExtractorSpec e;
    e.kind = get<std::string>(j, "kind", w);
    if (e.kind == "inner_product") {
        allow_keys(j, {"kind", "field_k", "length"}, w);
        e.field_k = get_unsigned(j, "field_k", w);
        e.length = get_unsigned(j, "length", w);
    } else if (e.kind == "poly_hash" || e.kind == "toy_search") {
        if (e.kind == "poly_hash") {
            allow_keys(j, {"kind", "n", "m", "r", "offset_u", "offset_v"}, w);
            e.offset_u = j.contains("offset_u") ? get_unsigned(j, "offset_u", w) : 0;
            e.offset_v = j.contains("offset_v") ? get_unsigned(j, "offset_v", w) : 0;
        } else {
            allow_keys(j, {"kind", "n", "m", "r"}, w);
        }
        e.n = get_unsigned(j, "n", w);
        e.m = get_unsigned(j, "m", w);
        e.r = get_unsigned(j, "r", w);
    } else {
        throw ConfigError("unknown extractor kind '" + e.kind + "'");
    }
    return e;
}

RunConfig run_config_from_json(const Json& j) {
    const std::string w = "config";
    allow_keys(j,
               {"command", "seed", "code", "nmss", "lrss", "message", "adversaries", "unauthorized", "secrets",
                "epsilon_bound", "extractor"},
               w);
    RunConfig c;
    c.command = get<std::string>(j, "command", w);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("code")) c.code = code_params_from_json(j.at("code"));
    if (j.contains("nmss")) c.nmss = nmss_params_from_json(j.at("nmss"));
    if (j.contains("lrss")) c.lrss = lrss_params_from_json(j.at("lrss"));
    if (j.contains("message")) c.message = message_from_json(j.at("message"));
    c.adversaries = get_or<std::vector<std::string>>(j, "adversaries", {}, w);
    c.unauthorized = get_or<std::vector<unsigned>>(j, "unauthorized", {}, w);
    c.secrets = get_or<std::vector<std::uint32_t>>(j, "secrets", {}, w);
    if (j.contains("epsilon_bound")) c.epsilon_bound = get<double>(j, "epsilon_bound", w);
    if (j.contains("extractor")) c.extractor = extractor_from_json(j.at("extractor"));
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

}  // namespace qnm
