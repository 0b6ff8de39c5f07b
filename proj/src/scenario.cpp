#include "perchsim/scenario.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "perchsim/util.hpp"

namespace perchsim::scenario {

namespace {

// ---- structured-text parse tree -------------------------------------------

struct Value {
    enum Kind { Number, String, Bool } kind = Number;
    double number = 0.0;
    std::string text;
    bool boolean = false;
};

struct Node {
    std::map<std::string, Value> values;
    std::map<std::string, Node> children;
};

struct Token {
    enum Kind { Word, Quoted, Equals, Open, Close, End } kind = End;
    std::string text;
    std::size_t line = 0;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
                continue;
            }
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '{') { ++pos_; return {Token::Open, "{", line_}; }
            if (c == '}') { ++pos_; return {Token::Close, "}", line_}; }
            if (c == '=') { ++pos_; return {Token::Equals, "=", line_}; }
            if (c == '"') {
                ++pos_;
                std::string out;
                while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
                    out.push_back(src_[pos_++]);
                }
                if (pos_ < src_.size() && src_[pos_] == '"') ++pos_;
                return {Token::Quoted, out, line_};
            }
            std::string out;
            while (pos_ < src_.size() && !strchr(" \t\r\n#{}=\"", src_[pos_])) {
                out.push_back(src_[pos_++]);
            }
            return {Token::Word, out, line_};
        }
        return {Token::End, "", line_};
    }

  private:
    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

void parse_block(Lexer& lex, Node& node, std::vector<core::FieldIssue>& errors,
                 const std::string& path, int depth) {
    if (depth > 16) {
        errors.push_back({path, "nesting too deep"});
        return;
    }
    while (true) {
        Token name = lex.next();
        if (name.kind == Token::End) return;
        if (name.kind == Token::Close) return;
        if (name.kind != Token::Word && name.kind != Token::Quoted) {
            errors.push_back({path, "line " + std::to_string(name.line) +
                                        ": expected a key, got '" + name.text + "'"});
            continue;
        }
        Token sep = lex.next();
        const std::string child_path = path.empty() ? name.text : path + "." + name.text;
        if (sep.kind == Token::Open) {
            parse_block(lex, node.children[name.text], errors, child_path, depth + 1);
            continue;
        }
        if (sep.kind != Token::Equals) {
            errors.push_back({child_path, "line " + std::to_string(sep.line) +
                                              ": expected '=' or '{'"});
            continue;
        }
        Token val = lex.next();
        if (val.kind == Token::Quoted) {
            Value v;
            v.kind = Value::String;
            v.text = val.text;
            node.values[name.text] = v;
            continue;
        }
        if (val.kind == Token::Word) {
            Value v;
            const std::string lower = to_lower(val.text);
            if (lower == "true" || lower == "false") {
                v.kind = Value::Bool;
                v.boolean = (lower == "true");
            } else if (auto num = parse_double(val.text)) {
                v.kind = Value::Number;
                v.number = *num;
            } else {
                errors.push_back({child_path, "line " + std::to_string(val.line) +
                                                  ": malformed value '" + val.text + "'"});
                continue;
            }
            node.values[name.text] = v;
            continue;
        }
        errors.push_back({child_path,
                          "line " + std::to_string(val.line) + ": missing value"});
    }
}

// ---- field binding ----------------------------------------------------------

class Binder {
  public:
    Binder(const Node& node, const std::string& prefix,
           std::vector<core::FieldIssue>& errors)
        : node_(node), prefix_(prefix), errors_(errors) {}

    // Numeric field with unit-suffix alternates, e.g. {"_kg", 1.0}, {"_g", 1e-3}.
    bool number(const std::string& base,
                std::initializer_list<std::pair<const char*, double>> units,
                double& out) {
        for (const auto& [suffix, scale] : units) {
            const std::string key = base + suffix;
            auto it = node_.values.find(key);
            if (it == node_.values.end()) continue;
            consumed_.insert(key);
            if (it->second.kind != Value::Number) {
                errors_.push_back({prefix_ + "." + key, "expected a number"});
                return false;
            }
            out = it->second.number * scale;
            return true;
        }
        return false;
    }

    bool text(const std::string& key, std::string& out) {
        auto it = node_.values.find(key);
        if (it == node_.values.end()) return false;
        consumed_.insert(key);
        if (it->second.kind != Value::String) {
            errors_.push_back({prefix_ + "." + key, "expected a quoted string"});
            return false;
        }
        out = it->second.text;
        return true;
    }

    void report_unknown() {
        for (const auto& [key, v] : node_.values) {
            if (!consumed_.count(key)) {
                errors_.push_back({prefix_ + "." + key, "unknown key"});
            }
        }
    }

  private:
    const Node& node_;
    std::string prefix_;
    std::vector<core::FieldIssue>& errors_;
    std::set<std::string> consumed_;
};

const Node kEmptyNode{};

const Node& child_or_empty(const Node& root, const std::string& name) {
    auto it = root.children.find(name);
    return it == root.children.end() ? kEmptyNode : it->second;
}

} // namespace

ValidationResult validate_config(std::string_view text) {
    ValidationResult result;
    auto& errors = result.errors;

    Node root;
    {
        Lexer lex(text);
        parse_block(lex, root, errors, "", 0);
    }

    ScenarioConfig cfg;
    cfg.system = default_system();

    for (const auto& [section, _] : root.children) {
        if (section != "perch" && section != "approach" && section != "system" &&
            section != "mechanism" && section != "calibration") {
            errors.push_back({section, "unknown section"});
        }
    }
    for (const auto& [key, _] : root.values) {
        errors.push_back({key, "top-level values are not allowed; use a section"});
    }

    // --- system masses ---
    {
        Binder b(child_or_empty(root, "system"), "system", errors);
        auto& m = cfg.system.masses;
        bool touched = false;
        touched |= b.number("mass_vehicle", {{"_kg", 1.0}, {"_g", 1e-3}}, m.m_vehicle_kg);
        touched |= b.number("mass_battery", {{"_kg", 1.0}, {"_g", 1e-3}}, m.m_battery_kg);
        touched |= b.number("mass_gripper", {{"_kg", 1.0}, {"_g", 1e-3}}, m.m_gripper_kg);
        touched |= b.number("mass_board", {{"_kg", 1.0}, {"_g", 1e-3}}, m.m_board_kg);
        if (touched) {
            m.m_total_kg = m.m_vehicle_kg + m.m_battery_kg + m.m_gripper_kg + m.m_board_kg;
            result.notes.push_back("system masses overridden; total recomputed");
        }
        if (b.number("h_cg", {{"_m", 1.0}, {"_mm", 1e-3}}, m.h_cg_m)) {
            result.notes.push_back("h_cg overridden");
        }
        b.report_unknown();
    }

    // --- mechanism ---
    {
        Binder b(child_or_empty(root, "mechanism"), "mechanism", errors);
        auto& mech_spec = cfg.system.mechanism;
        b.number("servo_stall_torque", {{"_nm", 1.0}, {"_ncm", 1e-2}},
                 mech_spec.servo_stall_torque_nm);
        b.number("servo_voltage", {{"_v", 1.0}}, mech_spec.servo_voltage_v);
        b.number("gripper_length", {{"_m", 1.0}, {"_mm", 1e-3}}, mech_spec.gripper_length_m);
        b.number("gripper_open_half_angle", {{"_deg", 1.0}},
                 mech_spec.gripper_open_half_angle_deg);
        b.number("pivot_separation", {{"_m", 1.0}, {"_mm", 1e-3}},
                 mech_spec.pivot_separation_m);
        double closing = 0.0;
        if (b.number("closing_time", {{"_s", 1.0}, {"_ms", 1e-3}}, closing)) {
            mech_spec.closing_time_s = closing;
            cfg.system.calibration.override_value("mech.closing_time_s", closing);
        }
        double trig_force = 0.0;
        if (b.number("trigger_force", {{"_n", 1.0}}, trig_force)) {
            mech_spec.trigger.activation_force_n = trig_force;
            cfg.system.calibration.override_value("impact.trigger_force_n", trig_force);
        }
        b.report_unknown();
    }

    // --- perch ---
    {
        const Node& perch_node = child_or_empty(root, "perch");
        Binder b(perch_node, "perch", errors);
        std::string catalog_name;
        bool have_perch = false;
        if (b.text("catalog", catalog_name)) {
            if (auto p = core::catalog_perch(catalog_name)) {
                cfg.perch = *p;
                have_perch = true;
            } else {
                errors.push_back({"perch.catalog",
                                  "unknown catalog perch '" + catalog_name + "'"});
            }
        } else {
            std::string kind;
            if (b.text("cross_section", kind)) {
                const std::string k = to_lower(kind);
                if (k == "circle") {
                    double d = 0.04;
                    if (!b.number("diameter", {{"_m", 1.0}, {"_mm", 1e-3}}, d)) {
                        errors.push_back({"perch.diameter_m", "circle requires a diameter"});
                    }
                    cfg.perch.cross_section = core::CircleSection{d};
                    have_perch = true;
                } else if (k == "square") {
                    double w = 0.03;
                    if (!b.number("width", {{"_m", 1.0}, {"_mm", 1e-3}}, w)) {
                        errors.push_back({"perch.width_m", "square requires a width"});
                    }
                    std::string ori = "flat";
                    b.text("orientation", ori);
                    core::SquareOrientation o = to_lower(ori) == "diamond"
                                                    ? core::SquareOrientation::Diamond
                                                    : core::SquareOrientation::Flat;
                    cfg.perch.cross_section = core::SquareSection{w, o};
                    have_perch = true;
                } else {
                    errors.push_back({"perch.cross_section",
                                      "expected \"circle\" or \"square\""});
                }
                std::string label;
                if (b.text("label", label)) cfg.perch.label = label;
                else cfg.perch.label = "custom";
                double mu = 0.0;
                if (b.number("friction_coefficient", {{"", 1.0}}, mu)) {
                    cfg.perch.friction_coefficient = mu;
                } else {
                    cfg.perch.friction_coefficient =
                        cfg.system.calibration.value("core.friction_default");
                    result.notes.push_back(
                        "perch.friction_coefficient defaulted to " +
                        format_double(cfg.perch.friction_coefficient));
                }
            }
        }
        if (!have_perch && errors.empty()) {
            cfg.perch = core::catalog_perch("wood-d40").value();
            result.notes.push_back("perch defaulted to catalog wood-d40");
        }
        b.number("inclination", {{"_deg", 1.0}}, cfg.perch.inclination_deg);
        double mu_catalog = 0.0;
        if (have_perch && !catalog_name.empty() &&
            b.number("friction_coefficient", {{"", 1.0}}, mu_catalog)) {
            cfg.perch.friction_coefficient = mu_catalog;
        }
        b.report_unknown();
    }

    // --- approach ---
    {
        const Node& node = child_or_empty(root, "approach");
        Binder b(node, "approach", errors);
        auto& a = cfg.approach;
        double v = 0.0;
        double h = 0.0;
        const bool have_v = b.number("impact_velocity", {{"_mps", 1.0}}, v);
        const bool have_h = b.number("drop_height", {{"_m", 1.0}, {"_mm", 1e-3}}, h);
        if (have_v) a.impact_velocity_mps = v;
        if (have_h) a.drop_height_m = h;
        if (!have_v && !have_h) {
            a.impact_velocity_mps = 0.82;
            result.notes.push_back("approach defaulted to a 0.82 m/s impact");
        }
        b.number("lateral_offset", {{"_m", 1.0}, {"_mm", 1e-3}}, a.lateral_offset_m);
        b.number("disturbance", {{"", 1.0}}, a.disturbance);
        double seed = 0.0;
        if (b.number("seed", {{"", 1.0}}, seed)) {
            a.seed = static_cast<std::uint64_t>(seed);
        }
        b.report_unknown();
    }
    cfg.approach.perch = cfg.perch;

    // --- calibration overrides ---
    {
        const Node& node = child_or_empty(root, "calibration");
        for (const auto& [key, v] : node.values) {
            if (v.kind != Value::Number) {
                errors.push_back({"calibration." + key, "expected a number"});
                continue;
            }
            try {
                cfg.system.calibration.override_value(key, v.number);
                cfg.calibration_overrides[key] = v.number;
            } catch (const std::out_of_range&) {
                errors.push_back({"calibration." + key, "unknown calibration parameter"});
            }
        }
        if (!cfg.calibration_overrides.empty()) {
            cfg.system.calibration.set_id(cfg.system.calibration.id() + "+overrides");
        }
    }

    // Keep the mechanism's trigger and closing time in sync with calibration
    // overrides; the calibration set is the single source for these values.
    cfg.system.mechanism.trigger.activation_force_n =
        cfg.system.calibration.value("impact.trigger_force_n");
    cfg.system.mechanism.trigger.fork_stiffness_n_per_m =
        cfg.system.calibration.value("impact.fork_stiffness_n_per_m");
    cfg.system.mechanism.trigger.fork_damping_ns_per_m =
        cfg.system.calibration.value("impact.fork_damping_ns_per_m");
    cfg.system.mechanism.closing_time_s =
        cfg.system.calibration.value("mech.closing_time_s");

    // --- invariants ---
    for (auto&& issue : core::validate(cfg.system.masses)) errors.push_back(issue);
    for (auto&& issue : core::validate(cfg.system.budget, "budget")) errors.push_back(issue);
    for (auto&& issue : core::validate(cfg.perch, "perch")) errors.push_back(issue);
    for (auto&& issue : mech::validate(cfg.system.mechanism)) errors.push_back(issue);
    for (auto&& issue : impact::validate(cfg.approach)) errors.push_back(issue);

    if (errors.empty()) result.config = std::move(cfg);
    return result;
}

ValidationResult load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ValidationResult r;
        r.errors.push_back({path, "cannot open file"});
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return validate_config(ss.str());
}

std::string to_text(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "perch {\n";
    if (const auto* c = std::get_if<core::CircleSection>(&cfg.perch.cross_section)) {
        os << "  cross_section = \"circle\"\n";
        os << "  diameter_m = " << format_double(c->diameter_m) << "\n";
    } else {
        const auto& sq = std::get<core::SquareSection>(cfg.perch.cross_section);
        os << "  cross_section = \"square\"\n";
        os << "  width_m = " << format_double(sq.width_m) << "\n";
        os << "  orientation = \""
           << (sq.orientation == core::SquareOrientation::Diamond ? "diamond" : "flat")
           << "\"\n";
    }
    os << "  label = \"" << cfg.perch.label << "\"\n";
    os << "  friction_coefficient = " << format_double(cfg.perch.friction_coefficient)
       << "\n";
    os << "  inclination_deg = " << format_double(cfg.perch.inclination_deg) << "\n";
    os << "}\n";

    os << "approach {\n";
    if (cfg.approach.impact_velocity_mps) {
        os << "  impact_velocity_mps = " << format_double(*cfg.approach.impact_velocity_mps)
           << "\n";
    } else if (cfg.approach.drop_height_m) {
        os << "  drop_height_m = " << format_double(*cfg.approach.drop_height_m) << "\n";
    }
    os << "  lateral_offset_m = " << format_double(cfg.approach.lateral_offset_m) << "\n";
    os << "  disturbance = " << format_double(cfg.approach.disturbance) << "\n";
    os << "  seed = " << cfg.approach.seed << "\n";
    os << "}\n";

    const auto& m = cfg.system.masses;
    os << "system {\n";
    os << "  mass_vehicle_kg = " << format_double(m.m_vehicle_kg) << "\n";
    os << "  mass_battery_kg = " << format_double(m.m_battery_kg) << "\n";
    os << "  mass_gripper_kg = " << format_double(m.m_gripper_kg) << "\n";
    os << "  mass_board_kg = " << format_double(m.m_board_kg) << "\n";
    os << "  h_cg_m = " << format_double(m.h_cg_m) << "\n";
    os << "}\n";

    const auto& mech_spec = cfg.system.mechanism;
    os << "mechanism {\n";
    os << "  servo_stall_torque_nm = " << format_double(mech_spec.servo_stall_torque_nm)
       << "\n";
    os << "  servo_voltage_v = " << format_double(mech_spec.servo_voltage_v) << "\n";
    os << "  gripper_length_m = " << format_double(mech_spec.gripper_length_m) << "\n";
    os << "  gripper_open_half_angle_deg = "
       << format_double(mech_spec.gripper_open_half_angle_deg) << "\n";
    os << "  pivot_separation_m = " << format_double(mech_spec.pivot_separation_m) << "\n";
    os << "  closing_time_s = " << format_double(mech_spec.closing_time_s) << "\n";
    os << "  trigger_force_n = " << format_double(mech_spec.trigger.activation_force_n)
       << "\n";
    os << "}\n";

    if (!cfg.calibration_overrides.empty()) {
        os << "calibration {\n";
        for (const auto& [k, v] : cfg.calibration_overrides) {
            os << "  \"" << k << "\" = " << format_double(v) << "\n";
        }
        os << "}\n";
    }
    return os.str();
}

nlohmann::json echo_json(const ScenarioConfig& cfg) {
    nlohmann::json perch;
    if (const auto* c = std::get_if<core::CircleSection>(&cfg.perch.cross_section)) {
        perch["cross_section"] = {{"kind", "circle"}, {"diameter_m", c->diameter_m}};
    } else {
        const auto& s = std::get<core::SquareSection>(cfg.perch.cross_section);
        perch["cross_section"] = {
            {"kind", "square"},
            {"width_m", s.width_m},
            {"orientation",
             s.orientation == core::SquareOrientation::Diamond ? "diamond" : "flat"}};
    }
    perch["inclination_deg"] = cfg.perch.inclination_deg;
    perch["friction_coefficient"] = cfg.perch.friction_coefficient;
    perch["label"] = cfg.perch.label;

    nlohmann::json approach;
    approach["impact_velocity_mps"] = cfg.approach.impact_velocity_mps
                                          ? nlohmann::json(*cfg.approach.impact_velocity_mps)
                                          : nlohmann::json(nullptr);
    approach["drop_height_m"] = cfg.approach.drop_height_m
                                    ? nlohmann::json(*cfg.approach.drop_height_m)
                                    : nlohmann::json(nullptr);
    approach["lateral_offset_m"] = cfg.approach.lateral_offset_m;
    approach["disturbance"] = cfg.approach.disturbance;
    approach["seed"] = cfg.approach.seed;

    const auto& m = cfg.system.masses;
    const auto& mech_spec = cfg.system.mechanism;
    nlohmann::json mechanism = {
        {"bar_top_m", mech_spec.bar_top_m},
        {"bar_outer_m", mech_spec.bar_outer_m},
        {"bar_middle_m", mech_spec.bar_middle_m},
        {"gripper_length_m", mech_spec.gripper_length_m},
        {"gripper_open_half_angle_deg", mech_spec.gripper_open_half_angle_deg},
        {"pivot_separation_m", mech_spec.pivot_separation_m},
        {"servo_stall_torque_nm", mech_spec.servo_stall_torque_nm},
        {"servo_voltage_v", mech_spec.servo_voltage_v},
        {"lever_close_m", mech_spec.lever_close_m},
        {"lever_reset_m", mech_spec.lever_reset_m},
        {"lever_open_m", mech_spec.lever_open_m},
        {"closing_time_s", mech_spec.closing_time_s},
        {"ratchet",
         {{"tooth_count", mech_spec.ratchet.tooth_count},
          {"sector_deg", mech_spec.ratchet.sector_deg},
          {"root_diameter_m", mech_spec.ratchet.root_diameter_m},
          {"flank_angle_deg", mech_spec.ratchet.flank_angle_deg},
          {"fillet_radius_m", mech_spec.ratchet.fillet_radius_m}}},
        {"trigger",
         {{"activation_force_n", mech_spec.trigger.activation_force_n},
          {"legacy_activation_force_n", mech_spec.trigger.legacy_activation_force_n},
          {"fork_stiffness_n_per_m", mech_spec.trigger.fork_stiffness_n_per_m},
          {"fork_damping_ns_per_m", mech_spec.trigger.fork_damping_ns_per_m},
          {"fork_travel_limit_m", mech_spec.trigger.fork_travel_limit_m}}},
    };

    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& [k, v] : cfg.calibration_overrides) overrides[k] = v;

    return {
        {"approach", approach},
        {"calibration", {{"id", cfg.system.calibration.id()},
                         {"overrides", overrides}}},
        {"mechanism", mechanism},
        {"perch", perch},
        {"system",
         {{"masses",
           {{"m_vehicle_kg", m.m_vehicle_kg},
            {"m_battery_kg", m.m_battery_kg},
            {"m_gripper_kg", m.m_gripper_kg},
            {"m_board_kg", m.m_board_kg},
            {"m_total_kg", m.m_total_kg},
            {"h_cg_m", m.h_cg_m}}},
          {"budget",
           {{"fraction_actuation", cfg.system.budget.fraction_actuation},
            {"fraction_linkage", cfg.system.budget.fraction_linkage},
            {"fraction_grippers", cfg.system.budget.fraction_grippers}}}}},
    };
}

} // namespace perchsim::scenario
