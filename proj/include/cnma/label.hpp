#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cnma {

// A treatment is an unordered set of unit labels ("A", "Ben", "Face-to-face
// CBT", ...).  Multi-unit treatments are written with '+' separators; the set
// semantics make "B+A" and "A + B" the same treatment.
class TreatmentLabel {
  public:
    TreatmentLabel() = default;
    explicit TreatmentLabel(std::vector<std::string> units);

    // Parses "A + B" into {A, B}.  Trims whitespace around every unit.
    // Throws ValidationError on empty units or units containing '+' or ':'.
    static TreatmentLabel parse(std::string_view text);

    const std::vector<std::string>& units() const { return units_; }
    std::size_t size() const { return units_.size(); }

    // Canonical identity: sorted units joined by '+'.
    const std::string& key() const { return key_; }
    // Human-readable form: sorted units joined by " + ".
    std::string display() const;

    bool contains(const std::string& unit) const;
    bool contains_all(const std::vector<std::string>& units) const;

    bool operator==(const TreatmentLabel& o) const { return key_ == o.key_; }
    bool operator!=(const TreatmentLabel& o) const { return key_ != o.key_; }
    // Orders by (number of units, sorted unit list); used for the treatment
    // column order of the design matrices.
    bool operator<(const TreatmentLabel& o) const;

  private:
    std::vector<std::string> units_; // sorted, unique
    std::string key_;
};

} // namespace cnma
