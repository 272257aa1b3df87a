#include "cnma/label.hpp"

#include "cnma/errors.hpp"

#include <algorithm>
#include <set>

namespace cnma {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

TreatmentLabel::TreatmentLabel(std::vector<std::string> units) {
    if (units.empty())
        throw ValidationError("treatment must contain at least one unit");
    std::set<std::string> seen;
    for (auto& u : units) {
        u = trim(u);
        if (u.empty())
            throw ValidationError("treatment contains an empty unit label");
        if (u.find('+') != std::string::npos || u.find(':') != std::string::npos)
            throw ValidationError("unit label '" + u + "' may not contain '+' or ':'");
        seen.insert(u);
    }
    units_.assign(seen.begin(), seen.end());
    for (std::size_t i = 0; i < units_.size(); ++i) {
        if (i) key_ += '+';
        key_ += units_[i];
    }
}

TreatmentLabel TreatmentLabel::parse(std::string_view text) {
    std::vector<std::string> units;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find('+', start);
        if (pos == std::string_view::npos) {
            units.emplace_back(text.substr(start));
            break;
        }
        units.emplace_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return TreatmentLabel(std::move(units));
}

std::string TreatmentLabel::display() const {
    std::string out;
    for (std::size_t i = 0; i < units_.size(); ++i) {
        if (i) out += " + ";
        out += units_[i];
    }
    return out;
}

bool TreatmentLabel::contains(const std::string& unit) const {
    return std::binary_search(units_.begin(), units_.end(), unit);
}

bool TreatmentLabel::contains_all(const std::vector<std::string>& units) const {
    return std::all_of(units.begin(), units.end(),
                       [&](const std::string& u) { return contains(u); });
}

bool TreatmentLabel::operator<(const TreatmentLabel& o) const {
    if (units_.size() != o.units_.size())
        return units_.size() < o.units_.size();
    return units_ < o.units_;
}

} // namespace cnma
