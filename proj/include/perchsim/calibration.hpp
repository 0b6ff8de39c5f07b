#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace perchsim {

// Where a calibration value comes from: quoted in the paper, fitted to the
// paper's measurements during calibration, or a documented default.
enum class Provenance { Paper, Fitted, Default };

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

struct CalibrationParam {
    double value = 0.0;
    std::string unit;
    Provenance provenance = Provenance::Default;

    bool operator==(const CalibrationParam&) const = default;
};

// Named scalar parameter set consumed by the statics and impact models.
// Serialization round-trips bit-exactly (shortest round-trip doubles).
class CalibrationSet {
  public:
    CalibrationSet() = default;
    explicit CalibrationSet(std::string id) : id_(std::move(id)) {}

    const std::string& id() const { return id_; }
    void set_id(std::string id) { id_ = std::move(id); }

    void set(const std::string& name, double value, const std::string& unit,
             Provenance prov) {
        params_[name] = CalibrationParam{value, unit, prov};
    }

    bool contains(const std::string& name) const {
        return params_.count(name) != 0;
    }

    double value(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) {
            throw std::out_of_range("calibration parameter missing: " + name);
        }
        return it->second.value;
    }

    const CalibrationParam& param(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) {
            throw std::out_of_range("calibration parameter missing: " + name);
        }
        return it->second;
    }

    // Override existing entries; unknown names are an error so typos in
    // scenario files cannot silently invent parameters.
    void override_value(const std::string& name, double value) {
        auto it = params_.find(name);
        if (it == params_.end()) {
            throw std::out_of_range("unknown calibration parameter: " + name);
        }
        it->second.value = value;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(params_.size());
        for (const auto& [k, v] : params_) out.push_back(k);
        return out;
    }

    std::size_t size() const { return params_.size(); }

    nlohmann::json to_json() const;
    static CalibrationSet from_json(const nlohmann::json& j);

    bool operator==(const CalibrationSet&) const = default;

  private:
    std::string id_;
    std::map<std::string, CalibrationParam> params_;
};

} // namespace perchsim
