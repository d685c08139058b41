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

#ifndef QNM_JSON_IO_HPP
#define QNM_JSON_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qnm/extractors.hpp"
#include "qnm/nmc.hpp"
#include "qnm/nmss.hpp"
#include "qnm/qmatrix.hpp"
#include "qnm/rng.hpp"
#include "qnm/secret_sharing.hpp"

namespace qnm {

using Json = nlohmann::ordered_json;

/// Test message for an experiment. Kinds: maximally_mixed, random_pure,
/// random_mixed (with rank) and basis (with index). With purify set the
/// message is replaced by its canonical purification on (M, Mh).
struct MessageSpec {
    std::string kind = "maximally_mixed";
    std::size_t rank = 1;
    std::size_t index = 0;
    bool purify = true;

    bool operator==(const MessageSpec&) const = default;
};

/// Builds the message on register "M" of dimension d; random kinds draw from rng.
DensityOperator make_message(const MessageSpec& spec, std::size_t d, Rng& rng);

/// Extractor to certify. Kinds: inner_product (field_k, length), poly_hash
/// (n, m, r, offset_u, offset_v) and toy_search (n, m, r).
struct ExtractorSpec {
    std::string kind = "inner_product";
    unsigned field_k = 1, length = 4;
    unsigned n = 0, m = 0, r = 0, offset_u = 0, offset_v = 0;

    bool operator==(const ExtractorSpec&) const = default;
};

NmExtDescriptor make_extractor(const ExtractorSpec& spec);

struct RunConfig {
    std::string command;
    std::optional<std::uint64_t> seed;
    std::optional<CodeParams> code;
    std::optional<NmssParams> nmss;
    std::optional<LrssParams> lrss;
    MessageSpec message;
    std::vector<std::string> adversaries;
    std::vector<unsigned> unauthorized;
    std::vector<std::uint32_t> secrets;
    std::optional<double> epsilon_bound;
    std::optional<ExtractorSpec> extractor;
};

bool operator==(const RunConfig& a, const RunConfig& b);

Json to_json(const CodeParams& p);
Json to_json(const NmssParams& p);
Json to_json(const LrssParams& p);
Json to_json(const MessageSpec& m);
Json to_json(const ExtractorSpec& e);
Json to_json(const RunConfig& c);

/// Parsers reject unknown keys and wrong types with ConfigError.
CodeParams code_params_from_json(const Json& j);
NmssParams nmss_params_from_json(const Json& j);
LrssParams lrss_params_from_json(const Json& j);
MessageSpec message_from_json(const Json& j);
ExtractorSpec extractor_from_json(const Json& j);
RunConfig run_config_from_json(const Json& j);

RunConfig load_run_config(const std::string& path);

}  // namespace qnm

#endif  // QNM_JSON_IO_HPP
