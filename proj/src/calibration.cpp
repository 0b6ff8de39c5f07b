#include "perchsim/calibration.hpp"

namespace perchsim {

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Paper: return "paper";
        case Provenance::Fitted: return "fitted";
        case Provenance::Default: return "default";
    }
    return "default";
}

Provenance provenance_from_name(const std::string& name) {
    if (name == "paper") return Provenance::Paper;
    if (name == "fitted") return Provenance::Fitted;
    if (name == "default") return Provenance::Default;
    throw std::invalid_argument("unknown provenance: " + name);
}

nlohmann::json CalibrationSet::to_json() const {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, p] : params_) {
        params[name] = {
            {"value", p.value},
            {"unit", p.unit},
            {"provenance", provenance_name(p.provenance)},
        };
    }
    return {{"id", id_}, {"parameters", params}};
}

CalibrationSet CalibrationSet::from_json(const nlohmann::json& j) {
    CalibrationSet out(j.at("id").get<std::string>());
    for (const auto& [name, p] : j.at("parameters").items()) {
        out.set(name, p.at("value").get<double>(), p.at("unit").get<std::string>(),
                provenance_from_name(p.at("provenance").get<std::string>()));
    }
    return out;
}

} // namespace perchsim
