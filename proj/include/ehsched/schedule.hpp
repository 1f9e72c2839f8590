#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ehs {

/// Step-size / exploration schedules, evaluated at slot n >= 0.
///   harmonic:    scale / (scale + n)           (Robbins-Monro)
///   constant:    scale
///   exponential: max(floor, scale^n)
class Schedule {
public:
    enum class Kind { harmonic, constant, exponential };

    static Schedule harmonic(double n0) { return Schedule(Kind::harmonic, n0, 0.0); }
    static Schedule constant(double value) { return Schedule(Kind::constant, value, 0.0); }
    static Schedule exponential(double decay, double floor) { return Schedule(Kind::exponential, decay, floor); }

    double operator()(long n) const {
        switch (kind_) {
        case Kind::harmonic: return scale_ / (scale_ + static_cast<double>(n));
        case Kind::constant: return scale_;
        case Kind::exponential: return std::max(floor_, std::pow(scale_, static_cast<double>(n)));
        }
        return 0.0;
    }

    Kind kind() const { return kind_; }
    double scale() const { return scale_; }
    double floor() const { return floor_; }

    std::string name() const {
        switch (kind_) {
        case Kind::harmonic: return "harmonic";
        case Kind::constant: return "constant";
        case Kind::exponential: return "exponential";
        }
        return "?";
    }

    static Kind parse_kind(const std::string& s) {
        if (s == "harmonic") return Kind::harmonic;
        if (s == "constant") return Kind::constant;
        if (s == "exponential") return Kind::exponential;
        throw std::invalid_argument("unknown schedule '" + s + "' (harmonic|constant|exponential)");
    }

    static Schedule make(Kind k, double scale, double floor) { return Schedule(k, scale, floor); }

private:
    Schedule(Kind k, double scale, double floor) : kind_(k), scale_(scale), floor_(floor) {
        bool ok = true;
        switch (k) {
        case Kind::harmonic: ok = scale > 0.0; break;
        case Kind::constant: ok = scale >= 0.0 && scale <= 1.0; break;
        case Kind::exponential: ok = scale > 0.0 && scale <= 1.0 && floor >= 0.0 && floor <= 1.0; break;
        }
        if (!ok) throw std::invalid_argument("schedule parameters out of range for " + name());
    }

    Kind kind_;
    double scale_;
    double floor_;
};

} // namespace ehs
