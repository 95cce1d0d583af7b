#ifndef SLHJB_CONFIG_HPP
#define SLHJB_CONFIG_HPP

/// Study configuration: model/scheme/measurement blocks parsed from a JSON
/// key/value tree, plus the small integer expression grammar used for the
/// refinement rules N(k) and J(k) (e.g. "2^4*2^k", "N^2/4").

#include "slhjb/control_problem.hpp"
#include "slhjb/solver.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace slhjb {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Parsed arithmetic over integers with variables k and N.
class RuleExpr {
public:
    struct Node;

    RuleExpr() = default;
    static RuleExpr parse(const std::string& text);

    std::int64_t eval(std::int64_t k, std::int64_t n = 0) const;
    const std::string& text() const noexcept { return text_; }
    bool empty() const noexcept { return text_.empty(); }

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

struct ModelConfig {
    std::string name;  // "bergman"
    double r_l = 0.0;
    double r_b = 0.0;
    double sigma = 0.0;
    double T = 0.0;
    BergmanPayoff payoff = CallPayoff{100.0};
};

enum class ReferenceKind { exact, self_difference };

struct SchemeConfig {
    int gh_order = 2;
    InterpKind interp = InterpKind::linear;
    StepperKind stepper = StepperKind::euler;
    std::optional<std::pair<double, double>> domain;  // log-price box override
    std::optional<Extrapolation> extrapolation;
    RuleExpr n_rule;
    RuleExpr j_rule;
    int k_min = 1;
    int k_max = 1;
};

struct MeasurementConfig {
    std::vector<Interval> intervals;
    ReferenceKind reference = ReferenceKind::exact;
};

struct StudyConfig {
    ModelConfig model;
    SchemeConfig scheme;
    MeasurementConfig measurement;
    std::string output;
};

/// Parse and validate a JSON study config; unknown keys, malformed rule
/// formulas and range violations raise invalid-config errors naming the
/// offending field.
StudyConfig parse_config(const std::string& text);
StudyConfig load_config(const std::string& path);

ControlProblem problem_from_config(const ModelConfig& model);

/// Default log-price domain for the option-pricing models: wide enough that
/// boundary effects on interior measurement intervals are negligible.
std::pair<double, double> default_domain(const ModelConfig& model);

}  // namespace slhjb

#endif  // SLHJB_CONFIG_HPP
