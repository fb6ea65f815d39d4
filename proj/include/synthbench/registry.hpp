#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bridge.hpp"
#include "error.hpp"
#include "gmm.hpp"
#include "smote.hpp"
#include "synthesizer.hpp"

namespace synthbench {

inline const std::vector<std::string>& builtin_synthesizers() {
    static const std::vector<std::string> names{"traincopy", "marginals", "smote", "ucsmote", "gmmtoy"};
    return names;
}

/// Registry lookup. "bridge:<command>" runs <command> through /bin/sh as a
/// protocol child.
inline std::unique_ptr<Synthesizer> make_synthesizer(std::string_view name) {
    if (name == "traincopy") return std::make_unique<TrainCopy>();
    if (name == "marginals") return std::make_unique<Marginals>();
    if (name == "smote") return std::make_unique<Smote>(true);
    if (name == "ucsmote") return std::make_unique<Smote>(false);
    if (name == "gmmtoy") return std::make_unique<GmmToy>();
    constexpr std::string_view prefix = "bridge:";
    if (name.starts_with(prefix)) {
        auto command = name.substr(prefix.size());
        if (command.empty()) throw GeneratorError("bridge: empty command");
        return std::make_unique<BridgeSynthesizer>(std::string(command));
    }
    std::string known;
    for (const auto& n : builtin_synthesizers()) known += (known.empty() ? "" : ", ") + n;
    throw GeneratorError("unknown model '" + std::string(name) + "' (known: " + known + ", bridge:<command>)");
}

/// File-system friendly label of a model name ("bridge:python m.py" -> "bridge_python_m_py").
inline std::string model_label(std::string_view name) {
    std::string out;
    for (char c : name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
    return out;
}

}  // namespace synthbench
