#include "perchsim/core_model.hpp"

#include <cmath>

#include "perchsim/util.hpp"

namespace perchsim::core {

double PerchSpec::contact_width_m() const {
    if (const auto* c = std::get_if<CircleSection>(&cross_section)) {
        return c->diameter_m;
    }
    const auto& s = std::get<SquareSection>(cross_section);
    return s.orientation == SquareOrientation::Diamond ? s.width_m * std::sqrt(2.0)
                                                       : s.width_m;
}

std::vector<PerchSpec> perch_catalog() {
    // Friction class by material: PVC is slicker than sawn wood against the
    // anti-slip lining.
    const double mu_pvc = 0.85;
    const double mu_wood = 0.9;
    return {
        PerchSpec{CircleSection{0.050}, 0.0, mu_pvc, "pvc-d50"},
        PerchSpec{CircleSection{0.040}, 0.0, mu_pvc, "pvc-d40"},
        PerchSpec{CircleSection{0.040}, 0.0, mu_wood, "wood-d40"},
        PerchSpec{CircleSection{0.030}, 0.0, mu_wood, "wood-d30"},
        PerchSpec{SquareSection{0.030, SquareOrientation::Flat}, 0.0, mu_wood, "square-flat"},
        PerchSpec{SquareSection{0.030, SquareOrientation::Diamond}, 0.0, mu_wood, "square-diamond"},
    };
}

std::string normalize_perch_label(std::string_view name) {
    std::string lower = to_lower(trim(name));
    std::string out;
    out.reserve(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(lower[i]);
        // UTF-8 "ø" (0xc3 0xb8) reads as "d" so "wood ø40" matches "wood-d40".
        if (c == 0xc3 && i + 1 < lower.size() &&
            static_cast<unsigned char>(lower[i + 1]) == 0xb8) {
            out.push_back('d');
            ++i;
            continue;
        }
        if (c == ' ' || c == '_') {
            if (!out.empty() && out.back() != '-') out.push_back('-');
            continue;
        }
        out.push_back(static_cast<char>(c));
    }
    // "wood-square-diamond" and "square-diamond" both resolve.
    if (out.rfind("wood-square", 0) == 0) out = out.substr(5);
    return out;
}

std::optional<PerchSpec> catalog_perch(std::string_view name) {
    const std::string key = normalize_perch_label(name);
    for (const auto& p : perch_catalog()) {
        if (p.label == key) return p;
    }
    return std::nullopt;
}

std::vector<FieldIssue> validate(const MassProperties& m, const std::string& prefix) {
    std::vector<FieldIssue> issues;
    auto positive = [&](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            issues.push_back({prefix + "." + field, "must be a positive finite mass"});
        }
    };
    positive(m.m_vehicle_kg, "m_vehicle_kg");
    positive(m.m_battery_kg, "m_battery_kg");
    positive(m.m_gripper_kg, "m_gripper_kg");
    positive(m.m_board_kg, "m_board_kg");
    positive(m.m_total_kg, "m_total_kg");
    if (!(m.h_cg_m > 0.0) || !std::isfinite(m.h_cg_m)) {
        issues.push_back({prefix + ".h_cg_m", "must be a positive finite height"});
    }
    const double sum = m.m_vehicle_kg + m.m_battery_kg + m.m_gripper_kg + m.m_board_kg;
    if (std::fabs(sum - m.m_total_kg) > 1e-9) {
        issues.push_back({prefix + ".m_total_kg",
                          "component masses sum to " + format_double(sum) +
                              " kg, not " + format_double(m.m_total_kg) + " kg"});
    }
    return issues;
}

std::vector<FieldIssue> validate(const MassBudget& b, const std::string& prefix) {
    std::vector<FieldIssue> issues;
    const double sum = b.fraction_actuation + b.fraction_linkage + b.fraction_grippers;
    if (std::fabs(sum - 1.0) > 0.01) {
        issues.push_back({prefix, "fractions sum to " + format_double(sum) + ", not 1.0"});
    }
    return issues;
}

std::vector<FieldIssue> validate(const PerchSpec& p, const std::string& prefix) {
    std::vector<FieldIssue> issues;
    if (const auto* c = std::get_if<CircleSection>(&p.cross_section)) {
        if (!(c->diameter_m > 0.0 && c->diameter_m <= 0.1)) {
            issues.push_back({prefix + ".diameter_m", "supported diameters are (0, 0.1] m"});
        }
    } else {
        const auto& s = std::get<SquareSection>(p.cross_section);
        if (!(s.width_m > 0.0 && s.width_m <= 0.1)) {
            issues.push_back({prefix + ".width_m", "supported widths are (0, 0.1] m"});
        }
    }
    if (!(p.inclination_deg >= 0.0 && p.inclination_deg <= 20.0)) {
        issues.push_back({prefix + ".inclination_deg", "supported inclinations are [0, 20] deg"});
    }
    if (!(p.friction_coefficient > 0.0) || !std::isfinite(p.friction_coefficient)) {
        issues.push_back({prefix + ".friction_coefficient", "must be positive and finite"});
    }
    return issues;
}

} // namespace perchsim::core
