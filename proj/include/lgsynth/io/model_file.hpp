#pragma once

#include "lgsynth/io/key_value.hpp"
#include "lgsynth/linear_graph.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace lgsynth::io {

/// Parsed contents of a model file, before graph validation.
///
///   S       = 2 2 3 4 4 4 4        # node each element leaves
///   T       = 1 3 1 1 1 1 1        # node each element enters
///   type    = 1 5 4 4 5 6 2        # element type codes
///   domain  = 4 4 4 2 2 2 2        # energy domain codes
///   params  = 1e5 100 ...          # one value per element
///   labels  = P_s R GY GY b K m    # optional, defaults to e1 e2 ...
///   outputs = 7:across 6:through   # element id (1-based) and variable
struct ModelFile {
    std::vector<std::size_t> source;
    std::vector<std::size_t> target;
    std::vector<int> type_codes;
    std::vector<int> domain_codes;
    std::vector<double> params;
    std::vector<std::string> labels;
    std::vector<lg::OutputRequest> outputs;
};

inline ModelFile parse_model_file(std::string_view text) {
    const KeyValues kv = parse_key_values(text);
    if (kv.empty()) throw ParseError("model file is empty");

    auto required = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(std::string("model file is missing '") + key + "'");
        return it->second;
    };
    for (const auto& [key, value] : kv) {
        static const std::vector<std::string> known{"s", "t", "type", "domain", "params", "labels", "outputs"};
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ParseError("unknown model key '" + key + "'");
    }

    ModelFile m;
    for (const auto& tok : split_list(required("s"))) m.source.push_back(parse_integer<std::size_t>(tok, "S"));
    for (const auto& tok : split_list(required("t"))) m.target.push_back(parse_integer<std::size_t>(tok, "T"));
    for (const auto& tok : split_list(required("type"))) m.type_codes.push_back(parse_integer<int>(tok, "type"));
    for (const auto& tok : split_list(required("domain"))) m.domain_codes.push_back(parse_integer<int>(tok, "domain"));
    for (const auto& tok : split_list(required("params"))) m.params.push_back(parse_double(tok, "params"));
    if (const auto it = kv.find("labels"); it != kv.end()) {
        m.labels = split_list(it->second);
    } else {
        for (std::size_t i = 0; i < m.source.size(); ++i) m.labels.push_back("e" + std::to_string(i + 1));
    }
    if (const auto it = kv.find("outputs"); it != kv.end()) {
        for (const auto& tok : split_list(it->second)) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw ParseError("output '" + tok + "' must look like <id>:across");
            const auto id = parse_integer<std::size_t>(std::string_view(tok).substr(0, colon), "outputs");
            const std::string var = lower(std::string_view(tok).substr(colon + 1));
            if (var != "across" && var != "through")
                throw ParseError("output variable must be 'across' or 'through', got '" + var + "'");
            m.outputs.push_back({id, var == "across" ? lg::Variable::Across : lg::Variable::Through});
        }
    }
    return m;
}

/// Validates and builds the graph; lg-core errors propagate as ModelError.
inline lg::LinearGraph to_graph(const ModelFile& m) {
    return lg::build_graph(m.source, m.target, m.type_codes, m.domain_codes, m.params, m.labels, m.outputs);
}

}  // namespace lgsynth::io
