#include "slhjb/config.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace slhjb {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Rule expression grammar:  expr := term (('*'|'/') term)*
//                           term := factor ('^' factor)?
//                           factor := integer | 'k' | 'N' | '(' expr ')'
// ---------------------------------------------------------------------------

struct RuleExpr::Node {
    enum class Kind { constant, var_k, var_n, mul, div, pow } kind;
    std::int64_t value = 0;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

class ExprParser {
public:
    explicit ExprParser(const std::string& text) : text_(text) {}

    std::shared_ptr<const RuleExpr::Node> parse() {
        auto node = expr();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected trailing characters");
        return node;
    }

private:
    using NodePtr = std::shared_ptr<const RuleExpr::Node>;
    using Node = RuleExpr::Node;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::invalid_config,
                    "rule formula '" + text_ + "': " + what + " at position " +
                        std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr make(Node::Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr,
                 std::int64_t value = 0) {
        auto n = std::make_shared<Node>();
        n->kind = kind;
        n->value = value;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        return n;
    }

    NodePtr expr() {
        auto lhs = term();
        while (true) {
            if (consume('*'))
                lhs = make(Node::Kind::mul, lhs, term());
            else if (consume('/'))
                lhs = make(Node::Kind::div, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        auto base = factor();
        if (consume('^'))
            return make(Node::Kind::pow, base, factor());
        return base;
    }

    NodePtr factor() {
        skip_ws();
        if (pos_ >= text_.size())
            fail("expected a value");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = expr();
            if (!consume(')'))
                fail("expected ')'");
            return inner;
        }
        if (c == 'k') {
            ++pos_;
            return make(Node::Kind::var_k);
        }
        if (c == 'N') {
            ++pos_;
            return make(Node::Kind::var_n);
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::int64_t v = 0;
            while (pos_ < text_.size() &&
                   std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                v = v * 10 + (text_[pos_] - '0');
                ++pos_;
            }
            return make(Node::Kind::constant, nullptr, nullptr, v);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

std::int64_t eval_node(const RuleExpr::Node& node, std::int64_t k, std::int64_t n) {
    using Kind = RuleExpr::Node::Kind;
    switch (node.kind) {
        case Kind::constant:
            return node.value;
        case Kind::var_k:
            return k;
        case Kind::var_n:
            return n;
        case Kind::mul:
            return eval_node(*node.lhs, k, n) * eval_node(*node.rhs, k, n);
        case Kind::div: {
            std::int64_t denom = eval_node(*node.rhs, k, n);
            if (denom == 0)
                throw Error(ErrorCode::invalid_config, "rule formula divides by zero");
            std::int64_t num = eval_node(*node.lhs, k, n);
            // round to nearest for non-divisible combinations
            return (2 * num + denom) / (2 * denom);
        }
        case Kind::pow: {
            std::int64_t base = eval_node(*node.lhs, k, n);
            std::int64_t exp = eval_node(*node.rhs, k, n);
            if (exp < 0)
                throw Error(ErrorCode::invalid_config, "rule formula has negative power");
            std::int64_t out = 1;
            for (std::int64_t i = 0; i < exp; ++i)
                out *= base;
            return out;
        }
    }
    return 0;
}

}  // namespace

RuleExpr RuleExpr::parse(const std::string& text) {
    RuleExpr out;
    out.root_ = ExprParser(text).parse();
    out.text_ = text;
    return out;
}

std::int64_t RuleExpr::eval(std::int64_t k, std::int64_t n) const {
    if (!root_)
        throw Error(ErrorCode::invalid_config, "empty rule formula");
    return eval_node(*root_, k, n);
}

// ---------------------------------------------------------------------------
// JSON config parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::invalid_config, path + ": " + what);
}

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            field_error(path + "." + key, "unknown key");
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key))
        field_error(path + "." + key, "missing required field");
    if (!obj[key].is_number())
        field_error(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

ModelConfig parse_model(const json& j, const std::string& path) {
    if (!j.is_object())
        field_error(path, "expected an object");
    require_keys(j, path, {"name", "r_l", "r_b", "sigma", "T", "payoff"});
    ModelConfig m;
    m.name = j.value("name", "");
    if (m.name != "bergman")
        field_error(path + ".name", "unknown model '" + m.name + "'");
    m.r_l = get_number(j, path, "r_l");
    m.r_b = get_number(j, path, "r_b");
    m.sigma = get_number(j, path, "sigma");
    m.T = get_number(j, path, "T");

    if (!j.contains("payoff") || !j["payoff"].is_object())
        field_error(path + ".payoff", "missing payoff block");
    const json& p = j["payoff"];
    const std::string type = p.value("type", "");
    if (type == "call") {
        require_keys(p, path + ".payoff", {"type", "K"});
        m.payoff = CallPayoff{get_number(p, path + ".payoff", "K")};
    } else if (type == "butterfly") {
        require_keys(p, path + ".payoff", {"type", "K1", "K2"});
        m.payoff = ButterflyPayoff{get_number(p, path + ".payoff", "K1"),
                                   get_number(p, path + ".payoff", "K2")};
    } else {
        field_error(path + ".payoff.type", "expected 'call' or 'butterfly'");
    }
    return m;
}

SchemeConfig parse_scheme(const json& j, const std::string& path) {
    SchemeConfig s;
    if (j.is_null())
        return s;
    if (!j.is_object())
        field_error(path, "expected an object");
    require_keys(j, path,
                 {"gh_order", "gh-order", "interp", "stepper", "domain",
                  "extrapolation", "N_rule", "J_rule", "k_range"});

    const char* order_key = j.contains("gh-order") ? "gh-order" : "gh_order";
    if (j.contains(order_key)) {
        if (!j[order_key].is_number_integer())
            field_error(path + "." + order_key, "expected an integer");
        s.gh_order = j[order_key].get<int>();
        if (s.gh_order < 2 || s.gh_order > 64)
            field_error(path + "." + order_key, "order must be in [2, 64]");
    }
    if (j.contains("interp")) {
        const std::string v = j["interp"].get<std::string>();
        if (v == "linear")
            s.interp = InterpKind::linear;
        else if (v == "pchip")
            s.interp = InterpKind::pchip;
        else
            field_error(path + ".interp", "expected 'linear' or 'pchip'");
    }
    if (j.contains("stepper")) {
        const std::string v = j["stepper"].get<std::string>();
        if (v == "euler")
            s.stepper = StepperKind::euler;
        else if (v == "weak2")
            s.stepper = StepperKind::weak2;
        else
            field_error(path + ".stepper", "expected 'euler' or 'weak2'");
    }
    if (j.contains("domain")) {
        const json& d = j["domain"];
        if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number())
            field_error(path + ".domain", "expected [lo, hi]");
        s.domain = {d[0].get<double>(), d[1].get<double>()};
        if (!(s.domain->first < s.domain->second))
            field_error(path + ".domain", "requires lo < hi");
    }
    if (j.contains("extrapolation")) {
        const std::string v = j["extrapolation"].get<std::string>();
        if (v == "clamp")
            s.extrapolation = Extrapolation::clamp;
        else if (v == "linear")
            s.extrapolation = Extrapolation::linear;
        else if (v == "payoff")
            s.extrapolation = Extrapolation::payoff_asymptotic;
        else
            field_error(path + ".extrapolation", "expected 'clamp'|'linear'|'payoff'");
    }
    if (j.contains("N_rule"))
        s.n_rule = RuleExpr::parse(j["N_rule"].get<std::string>());
    if (j.contains("J_rule"))
        s.j_rule = RuleExpr::parse(j["J_rule"].get<std::string>());
    if (j.contains("k_range")) {
        const json& r = j["k_range"];
        if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() ||
            !r[1].is_number_integer())
            field_error(path + ".k_range", "expected [k_min, k_max]");
        s.k_min = r[0].get<int>();
        s.k_max = r[1].get<int>();
        if (s.k_min < 0 || s.k_max < s.k_min)
            field_error(path + ".k_range", "requires 0 <= k_min <= k_max");
    }
    return s;
}

MeasurementConfig parse_measurement(const json& j, const std::string& path) {
    MeasurementConfig m;
    if (j.is_null())
        return m;
    if (!j.is_object())
        field_error(path, "expected an object");
    require_keys(j, path, {"intervals", "reference"});
    if (j.contains("intervals")) {
        if (!j["intervals"].is_array() || j["intervals"].empty())
            field_error(path + ".intervals", "expected a non-empty array");
        double prev_lo = -std::numeric_limits<double>::infinity();
        for (const auto& iv : j["intervals"]) {
            if (!iv.is_array() || iv.size() != 2)
                field_error(path + ".intervals", "each interval is [lo, hi]");
            Interval out{iv[0].get<double>(), iv[1].get<double>()};
            if (!(out.lo < out.hi))
                field_error(path + ".intervals", "requires lo < hi");
            if (!(out.lo >= prev_lo))
                field_error(path + ".intervals", "intervals must be ordered by lo");
            prev_lo = out.lo;
            m.intervals.push_back(out);
        }
    }
    if (j.contains("reference")) {
        const std::string v = j["reference"].get<std::string>();
        if (v == "exact")
            m.reference = ReferenceKind::exact;
        else if (v == "self-difference" || v == "self_difference")
            m.reference = ReferenceKind::self_difference;
        else
            field_error(path + ".reference", "expected 'exact' or 'self-difference'");
    }
    return m;
}

}  // namespace

StudyConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::invalid_config, std::string("parse error: ") + e.what());
    }
    if (!j.is_object())
        field_error("config", "expected a top-level object");
    require_keys(j, "config", {"model", "scheme", "measurement", "output"});
    if (!j.contains("model"))
        field_error("config.model", "missing required block");

    StudyConfig cfg;
    cfg.model = parse_model(j["model"], "model");
    cfg.scheme = parse_scheme(j.value("scheme", json()), "scheme");
    cfg.measurement = parse_measurement(j.value("measurement", json()), "measurement");
    if (j.contains("output"))
        cfg.output = j["output"].get<std::string>();
    return cfg;
}

StudyConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::io, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ControlProblem problem_from_config(const ModelConfig& model) {
    return bergman_problem(model.r_l, model.r_b, model.sigma, model.payoff, model.T);
}

std::pair<double, double> default_domain(const ModelConfig& model) {
    if (const auto* call = std::get_if<CallPayoff>(&model.payoff))
        return {std::log(call->strike / 100.0), std::log(12.0 * call->strike)};
    const auto& bf = std::get<ButterflyPayoff>(model.payoff);
    return {std::log(bf.k1 / 100.0), std::log(4.0 * bf.k2)};
}

}  // namespace slhjb
