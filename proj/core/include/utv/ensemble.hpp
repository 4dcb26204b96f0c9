#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "utv/dataset.hpp"
#include "utv/types.hpp"

namespace utv {

// The four behavior classes that can appear in a rule conjunction.
enum class ComponentClass : std::uint8_t { SF = 0, SFS = 1, SMPF = 2, SMPSF = 3 };

inline constexpr std::array<ComponentClass, 4> kAllComponents = {
    ComponentClass::SF, ComponentClass::SFS, ComponentClass::SMPF,
    ComponentClass::SMPSF};

const char* component_name(ComponentClass c);

// One of the 30 rule shapes: a profile side (gender only, or gender + age)
// and a non-empty subset of the four behavior classes.
struct ClassMask {
    bool use_age = false;
    std::uint8_t components = 0;  // bit (int)ComponentClass

    bool has(ComponentClass c) const { return components & (1u << static_cast<int>(c)); }
    int component_count() const;
    std::vector<ComponentClass> component_list() const;
    std::string components_label() const;  // e.g. "SF&SFS"

    friend bool operator==(const ClassMask&, const ClassMask&) = default;
};

// The 30 masks in table order: rows 1-15 are the gender-only subsets ordered
// by (size, lexicographic over SF < SFS < SMPF < SMPSF), rows 16-30 repeat
// the same subsets with the age predicate added.
const std::vector<ClassMask>& rule_masks();
const ClassMask& mask_for_row(int row_index);  // 1-based

enum class BaseClassKind : std::uint8_t { SUP, SF, SFS, SMPF, SMPSF };

struct BaseClass {
    BaseClassKind kind = BaseClassKind::SUP;
    UserId target = 0;
    std::vector<UserId> members;  // ascending, never contains target

    bool contains(UserId u) const;
};

struct FuzzyRule {
    int row_index = 0;  // 1-based table row
    ClassMask mask;
    std::vector<UserId> members;  // ascending
    double precision = 0.0;
};

struct EnsembleSelection {
    UserId target = 0;
    std::vector<FuzzyRule> top3;  // precision descending, <= 3 entries
};

// Read-only bundle of the tables the class builders consume.
struct DatasetView {
    const RatingTable* ratings = nullptr;
    const UserProfileTable* profiles = nullptr;  // may be empty (no demographics)
    const MovieCatalog* movies = nullptr;
    const InterestProfileTable* interests = nullptr;
    const PopularityTable* popularity = nullptr;
};

struct EnsembleOptions {
    std::size_t min_shared = 1;          // SF class: liked-set overlap threshold
    bool selection_means_rated = false;  // literal "selected" for SMPF/SMPSF
};

// --- base classes ---------------------------------------------------------

// Users sharing the target's gender (and age bin when use_age). When the
// target has no profile the class degenerates to all rated users and the
// age predicate is a no-op.
BaseClass base_class_sup(UserId target, const DatasetView& view, bool use_age);

// Eq-2 style similarity score, kept as a diagnostic: sum over co-rated items
// of (r_ui * r_vi)^2 factored as r_ui^2 * r_vi^2.
double sf_similarity(UserId u, UserId v, const RatingTable& ratings);

// Users whose liked sets overlap the target's by at least min_shared movies.
BaseClass base_class_sf(UserId target, const DatasetView& view,
                        std::size_t min_shared = 1);

// Users with a liked movie sharing a genre with any of the target's liked
// movies.
BaseClass base_class_sfs(UserId target, const DatasetView& view);

// Users who liked (or, with selection_means_rated, rated) one of the most
// popular movies.
BaseClass base_class_smpf(UserId target, const DatasetView& view,
                          bool selection_means_rated = false);

// Users who liked (or rated) a movie carrying one of the most popular genres.
BaseClass base_class_smpsf(UserId target, const DatasetView& view,
                           bool selection_means_rated = false);

// --- rules ----------------------------------------------------------------

// Intersection of the matching SUP side with every component class in the
// mask. Precision is left at 0.
FuzzyRule combined_class(UserId target, const ClassMask& mask,
                         const BaseClass& sup, const std::array<BaseClass, 4>& bases);

// Jaccard precision of the member pool against the target: with I_t the
// items rated by the target and I_C the items rated by at least one member,
// TP = |I_t intersect I_C| and FP = |I_t union I_C| - TP, so the value is
// |I_t intersect I_C| / |I_t union I_C|. Zero when the union is empty.
double class_precision(UserId target, const std::vector<UserId>& members,
                       const RatingTable& ratings);

// All 30 rules in table order, members and precision filled in.
std::vector<FuzzyRule> enumerate_fuzzy_rules(UserId target, const DatasetView& view,
                                             const EnsembleOptions& options = {});

// Top three rules by (precision desc, row index asc) among rules with
// non-empty member sets. Throws DomainError when fewer than three rules
// have members.
EnsembleSelection select_ensemble(UserId target, const std::vector<FuzzyRule>& rules);

// Same, but pads a short selection with the gender-only SF rule (row 1)
// instead of throwing; appends a note per padded slot.
EnsembleSelection select_ensemble_with_fallback(UserId target,
                                                const std::vector<FuzzyRule>& rules,
                                                std::vector<std::string>* warnings = nullptr);

// --- exports --------------------------------------------------------------

// CSV: row_index,use_age,components,member_count,precision (4 decimals).
void export_rules_csv(const std::vector<FuzzyRule>& rules, std::ostream& out);

// Deterministic DOT rendering of the rule tree: root, gender level, age
// level for rows 16-30, one leaf per rule. The selected leaves are colored
// and their incoming edges labeled with ranks 1..3.
void export_rule_tree(const std::vector<FuzzyRule>& rules,
                      const EnsembleSelection& selection, UserId target,
                      const UserProfileTable& profiles, std::ostream& out);

}  // namespace utv
