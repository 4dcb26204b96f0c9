#include "utv/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include "utv/errors.hpp"

namespace utv {
namespace {

std::vector<UserId> sorted_intersection(const std::vector<UserId>& a,
                                        const std::vector<UserId>& b) {
    std::vector<UserId> out;
    out.reserve(std::min(a.size(), b.size()));
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
}

// Liked set, or the full rated set under the literal "selected" reading.
std::vector<MovieId> selection_set(const InterestProfile& p, bool selection_means_rated) {
    if (!selection_means_rated) return p.liked;
    std::vector<MovieId> all;
    all.reserve(p.liked.size() + p.not_liked.size());
    std::merge(p.liked.begin(), p.liked.end(), p.not_liked.begin(), p.not_liked.end(),
               std::back_inserter(all));
    return all;
}

std::string format_precision(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", p);
    return buf;
}

}  // namespace

const char* component_name(ComponentClass c) {
    switch (c) {
        case ComponentClass::SF: return "SF";
        case ComponentClass::SFS: return "SFS";
        case ComponentClass::SMPF: return "SMPF";
        default: return "SMPSF";
    }
}

int ClassMask::component_count() const {
    int n = 0;
    for (ComponentClass c : kAllComponents)
        if (has(c)) ++n;
    return n;
}

std::vector<ComponentClass> ClassMask::component_list() const {
    std::vector<ComponentClass> out;
    for (ComponentClass c : kAllComponents)
        if (has(c)) out.push_back(c);
    return out;
}

std::string ClassMask::components_label() const {
    std::string out;
    for (ComponentClass c : component_list()) {
        if (!out.empty()) out += '&';
        out += component_name(c);
    }
    return out;
}

const std::vector<ClassMask>& rule_masks() {
    static const std::vector<ClassMask> masks = [] {
        // Subsets ordered by size, then lexicographically by component list
        // (SF < SFS < SMPF < SMPSF). Note this differs from plain ascending
        // bit patterns: {SF,SMPSF} precedes {SFS,SMPF}.
        std::vector<std::uint8_t> subsets;
        for (std::uint8_t bits = 1; bits < 16; ++bits) subsets.push_back(bits);
        auto index_list = [](std::uint8_t bits) {
            std::vector<int> ix;
            for (int i = 0; i < 4; ++i)
                if (bits & (1u << i)) ix.push_back(i);
            return ix;
        };
        std::sort(subsets.begin(), subsets.end(),
                  [&](std::uint8_t a, std::uint8_t b) {
                      int na = std::popcount(static_cast<unsigned>(a));
                      int nb = std::popcount(static_cast<unsigned>(b));
                      if (na != nb) return na < nb;
                      return index_list(a) < index_list(b);
                  });
        std::vector<ClassMask> out;
        out.reserve(30);
        for (bool use_age : {false, true}) {
            for (std::uint8_t bits : subsets) out.push_back({use_age, bits});
        }
        return out;
    }();
    return masks;
}

const ClassMask& mask_for_row(int row_index) {
    if (row_index < 1 || row_index > 30) {
        throw DomainError("rule row index out of range: " + std::to_string(row_index));
    }
    return rule_masks()[static_cast<std::size_t>(row_index - 1)];
}

bool BaseClass::contains(UserId u) const {
    return std::binary_search(members.begin(), members.end(), u);
}

// --- base classes ---------------------------------------------------------

BaseClass base_class_sup(UserId target, const DatasetView& view, bool use_age) {
    BaseClass out;
    out.kind = BaseClassKind::SUP;
    out.target = target;
    const UserProfile* tp =
        view.profiles ? view.profiles->find(target) : nullptr;
    if (!tp) {
        // No demographics: everyone qualifies, age adds nothing.
        for (UserId u : view.ratings->user_ids())
            if (u != target) out.members.push_back(u);
        return out;
    }
    for (const UserProfile& p : view.profiles->all()) {
        if (p.user_id == target) continue;
        if (p.gender != tp->gender) continue;
        if (use_age && p.age_bin != tp->age_bin) continue;
        out.members.push_back(p.user_id);
    }
    return out;
}

double sf_similarity(UserId u, UserId v, const RatingTable& ratings) {
    if (u == v) throw DomainError("sf_similarity requires distinct users");
    const auto* iu = ratings.find_user(u);
    const auto* iv = ratings.find_user(v);
    if (!iu || !iv) return 0.0;
    double total = 0.0;
    for (std::uint32_t a : *iu) {
        const RatingRecord& ra = ratings.records()[a];
        if (auto rv = ratings.rating_of(v, ra.movie_id)) {
            double x = static_cast<double>(ra.rating);
            double y = static_cast<double>(*rv);
            total += x * x * y * y;
        }
    }
    return total;
}

BaseClass base_class_sf(UserId target, const DatasetView& view, std::size_t min_shared) {
    BaseClass out;
    out.kind = BaseClassKind::SF;
    out.target = target;
    const InterestProfile* tp = view.interests->find(target);
    if (!tp) throw NotFoundError("no interest profile for user " + std::to_string(target));
    for (const InterestProfile& p : view.interests->all()) {
        if (p.user_id == target) continue;
        std::size_t shared = 0;
        std::size_t i = 0, j = 0;
        while (i < tp->liked.size() && j < p.liked.size() && shared < min_shared) {
            if (tp->liked[i] == p.liked[j]) { ++shared; ++i; ++j; }
            else if (tp->liked[i] < p.liked[j]) ++i;
            else ++j;
        }
        if (shared >= min_shared) out.members.push_back(p.user_id);
    }
    return out;
}

BaseClass base_class_sfs(UserId target, const DatasetView& view) {
    BaseClass out;
    out.kind = BaseClassKind::SFS;
    out.target = target;
    const InterestProfile* tp = view.interests->find(target);
    if (!tp || tp->liked.empty()) {
        throw NotFoundError("user " + std::to_string(target) + " has no liked movies");
    }
    std::vector<char> target_genres(view.movies->genre_count(), 0);
    for (MovieId m : tp->liked)
        for (std::uint32_t g : view.movies->genre_ids(m)) target_genres[g] = 1;

    for (const InterestProfile& p : view.interests->all()) {
        if (p.user_id == target) continue;
        bool hit = false;
        for (MovieId m : p.liked) {
            for (std::uint32_t g : view.movies->genre_ids(m)) {
                if (target_genres[g]) { hit = true; break; }
            }
            if (hit) break;
        }
        if (hit) out.members.push_back(p.user_id);
    }
    return out;
}

BaseClass base_class_smpf(UserId target, const DatasetView& view,
                          bool selection_means_rated) {
    BaseClass out;
    out.kind = BaseClassKind::SMPF;
    out.target = target;
    for (const InterestProfile& p : view.interests->all()) {
        if (p.user_id == target) continue;
        bool hit = false;
        for (MovieId m : selection_set(p, selection_means_rated)) {
            if (view.popularity->is_top_movie(m)) { hit = true; break; }
        }
        if (hit) out.members.push_back(p.user_id);
    }
    return out;
}

BaseClass base_class_smpsf(UserId target, const DatasetView& view,
                           bool selection_means_rated) {
    BaseClass out;
    out.kind = BaseClassKind::SMPSF;
    out.target = target;
    for (const InterestProfile& p : view.interests->all()) {
        if (p.user_id == target) continue;
        bool hit = false;
        for (MovieId m : selection_set(p, selection_means_rated)) {
            for (std::uint32_t g : view.movies->genre_ids(m)) {
                if (view.popularity->is_top_genre_id(g)) { hit = true; break; }
            }
            if (hit) break;
        }
        if (hit) out.members.push_back(p.user_id);
    }
    return out;
}

// --- rules ----------------------------------------------------------------

FuzzyRule combined_class(UserId, const ClassMask& mask, const BaseClass& sup,
                         const std::array<BaseClass, 4>& bases) {
    FuzzyRule rule;
    rule.mask = mask;
    rule.members = sup.members;
    for (ComponentClass c : mask.component_list()) {
        rule.members = sorted_intersection(rule.members,
                                           bases[static_cast<int>(c)].members);
        if (rule.members.empty()) break;
    }
    return rule;
}

double class_precision(UserId target, const std::vector<UserId>& members,
                       const RatingTable& ratings) {
    std::vector<MovieId> target_items = ratings.rated_movies(target);
    std::unordered_set<MovieId> pool_items;
    for (UserId u : members) {
        if (const auto* idx = ratings.find_user(u)) {
            for (std::uint32_t i : *idx) pool_items.insert(ratings.records()[i].movie_id);
        }
    }
    std::size_t tp = 0;
    for (MovieId m : target_items)
        if (pool_items.count(m)) ++tp;
    std::size_t union_size = pool_items.size() + target_items.size() - tp;
    if (union_size == 0) return 0.0;
    return static_cast<double>(tp) / static_cast<double>(union_size);
}

std::vector<FuzzyRule> enumerate_fuzzy_rules(UserId target, const DatasetView& view,
                                             const EnsembleOptions& options) {
    BaseClass sup_gender = base_class_sup(target, view, false);
    BaseClass sup_gender_age = base_class_sup(target, view, true);
    std::array<BaseClass, 4> bases = {
        base_class_sf(target, view, options.min_shared),
        base_class_sfs(target, view),
        base_class_smpf(target, view, options.selection_means_rated),
        base_class_smpsf(target, view, options.selection_means_rated),
    };

    std::vector<FuzzyRule> rules;
    rules.reserve(30);
    int row = 1;
    for (const ClassMask& mask : rule_masks()) {
        const BaseClass& sup = mask.use_age ? sup_gender_age : sup_gender;
        FuzzyRule rule = combined_class(target, mask, sup, bases);
        rule.row_index = row++;
        rule.precision = class_precision(target, rule.members, *view.ratings);
        rules.push_back(std::move(rule));
    }
    return rules;
}

namespace {

std::vector<const FuzzyRule*> ranked_nonempty(const std::vector<FuzzyRule>& rules) {
    std::vector<const FuzzyRule*> candidates;
    for (const FuzzyRule& r : rules)
        if (!r.members.empty()) candidates.push_back(&r);
    std::sort(candidates.begin(), candidates.end(),
              [](const FuzzyRule* a, const FuzzyRule* b) {
                  if (a->precision != b->precision) return a->precision > b->precision;
                  return a->row_index < b->row_index;
              });
    return candidates;
}

}  // namespace

EnsembleSelection select_ensemble(UserId target, const std::vector<FuzzyRule>& rules) {
    auto ranked = ranked_nonempty(rules);
    if (ranked.size() < 3) {
        throw DomainError("only " + std::to_string(ranked.size()) +
                          " rules have members for user " + std::to_string(target));
    }
    EnsembleSelection sel;
    sel.target = target;
    for (std::size_t i = 0; i < 3; ++i) sel.top3.push_back(*ranked[i]);
    return sel;
}

EnsembleSelection select_ensemble_with_fallback(UserId target,
                                                const std::vector<FuzzyRule>& rules,
                                                std::vector<std::string>* warnings) {
    auto ranked = ranked_nonempty(rules);
    EnsembleSelection sel;
    sel.target = target;
    for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) sel.top3.push_back(*ranked[i]);
    while (sel.top3.size() < 3) {
        // Pad with the gender-only SF rule (row 1).
        const FuzzyRule* row1 = nullptr;
        for (const FuzzyRule& r : rules)
            if (r.row_index == 1) row1 = &r;
        if (!row1) break;
        if (warnings) {
            warnings->push_back("user " + std::to_string(target) +
                                ": fewer than 3 non-empty rules, padding with row 1");
        }
        sel.top3.push_back(*row1);
    }
    return sel;
}

// --- exports --------------------------------------------------------------

void export_rules_csv(const std::vector<FuzzyRule>& rules, std::ostream& out) {
    out << "row_index,use_age,components,member_count,precision\n";
    for (const FuzzyRule& r : rules) {
        out << r.row_index << ',' << (r.mask.use_age ? 1 : 0) << ','
            << r.mask.components_label() << ',' << r.members.size() << ','
            << format_precision(r.precision) << '\n';
    }
}

void export_rule_tree(const std::vector<FuzzyRule>& rules,
                      const EnsembleSelection& selection, UserId target,
                      const UserProfileTable& profiles, std::ostream& out) {
    const UserProfile* tp = profiles.find(target);
    std::string gender_label = "Gender=n/a";
    std::string age_label = "Age=n/a";
    if (tp) {
        gender_label = std::string("Gender=") + (tp->gender == Gender::M ? "M" : "F");
        age_label = std::string("Age=") + age_bin_letter(tp->age_bin);
    }

    // rank per row, 1..3 for the selected leaves
    std::array<int, 31> rank_of_row{};
    const char* rank_color[4] = {"", "red", "violet", "blue"};
    for (std::size_t i = 0; i < selection.top3.size(); ++i) {
        int row = selection.top3[i].row_index;
        if (row >= 1 && row <= 30 && rank_of_row[row] == 0)
            rank_of_row[row] = static_cast<int>(i) + 1;
    }

    out << "digraph rule_tree {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box];\n";
    out << "  root [label=\"User " << target << "\"];\n";
    out << "  gender [label=\"" << gender_label << "\"];\n";
    out << "  age [label=\"" << age_label << "\"];\n";
    out << "  root -> gender;\n";
    out << "  gender -> age;\n";
    for (const FuzzyRule& r : rules) {
        int rank = (r.row_index >= 1 && r.row_index <= 30) ? rank_of_row[r.row_index] : 0;
        out << "  r" << r.row_index << " [label=\"" << r.mask.components_label()
            << "\\n" << format_precision(r.precision) << "\"";
        if (rank) out << " color=" << rank_color[rank] << " penwidth=2";
        out << "];\n";
        out << "  " << (r.mask.use_age ? "age" : "gender") << " -> r" << r.row_index;
        if (rank) {
            out << " [label=\"" << rank << "\" color=" << rank_color[rank]
                << " penwidth=2]";
        }
        out << ";\n";
    }
    out << "}\n";
}

}  // namespace utv
