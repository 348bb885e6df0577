#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "parisi/error.hpp"
#include "parisi/quadrature.hpp"

namespace parisi {

/// Law of the external field h: either a constant or a Gaussian.
struct FieldSpec {
    enum class Kind { constant, gaussian };

    Kind kind = Kind::constant;
    double mean = 0.0;
    double sd = 0.0;

    static FieldSpec constant(double h) { return {Kind::constant, h, 0.0}; }

    static FieldSpec gaussian(double mean, double sd) {
        if (!(sd >= 0.0)) throw InvalidArgument("field standard deviation must be >= 0");
        return {Kind::gaussian, mean, sd};
    }

    double second_moment() const { return mean * mean + sd * sd; }

    /// The chaos root u_t needs E h^2 > 0.
    bool chaos_hypotheses_met() const { return second_moment() > 0.0; }

    std::string describe() const {
        if (kind == Kind::constant) return "constant(h=" + std::to_string(mean) + ")";
        return "gaussian(mean=" + std::to_string(mean) + ", sd=" + std::to_string(sd) + ")";
    }

    /// Quadrature nodes (h, weight) for E_h.
    std::vector<std::pair<double, double>> nodes(const GaussHermiteRule& rule) const {
        if (kind == Kind::constant || sd == 0.0) return {{mean, 1.0}};
        std::vector<std::pair<double, double>> out;
        out.reserve(rule.size());
        for (std::size_t i = 0; i < rule.size(); ++i)
            out.emplace_back(mean + sd * rule.nodes[i], rule.weights[i]);
        return out;
    }

    template <class F>
    double expect(const GaussHermiteRule& rule, F&& f) const {
        double sum = 0.0;
        for (auto [h, w] : nodes(rule)) sum += w * f(h);
        return sum;
    }
};

}  // namespace parisi
