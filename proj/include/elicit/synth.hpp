// Copyright 2026 The Elicit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Synthetic provider catalogs with planted structure.
//
// Each service type owns a handful of latent provider profiles. A profile
// fixes one mode per structured attribute, so the profiles are separated
// jointly while each single attribute only sees a few overlapping modes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "elicit/catalog.hpp"
#include "elicit/error.hpp"
#include "elicit/util.hpp"

namespace elicit {

struct SyntheticAttribute {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  double min = 0.0, max = 1.0, step = 1.0;  // numeric grid
  std::vector<std::string> levels;           // categorical levels, in rank order for ordinal
  bool set_valued = false;
  int extra_memberships = 0;  // additional labels spread over providers (set-valued only)
  int modes = 2;              // planted modes per type; 0 or 1 means unstructured
  int level = 1;              // 1: set by the profile, 2: set by the sub-profile within it

  std::size_t grid_size() const {
    if (kind != ColumnKind::numeric) return levels.size();
    return static_cast<std::size_t>(std::llround((max - min) / step)) + 1;
  }
  double grid_value(std::size_t i) const { return min + static_cast<double>(i) * step; }
};

inline std::vector<SyntheticAttribute> default_synthetic_attributes() {
  std::vector<SyntheticAttribute> a;
  a.push_back({"age", ColumnKind::numeric, 20, 56, 1, {}, false, 0, 2});
  a.push_back({"gender", ColumnKind::nominal, 0, 0, 1, {"woman", "man"}, false, 0, 2});
  a.push_back({"experience", ColumnKind::numeric, 0, 25, 1, {}, false, 0, 2});
  a.push_back({"education",
               ColumnKind::ordinal,
               0,
               0,
               1,
               {"junior_high", "high_school", "vocational", "bachelor", "master"},
               false,
               0,
               2});
  a.push_back({"service_area",
               ColumnKind::nominal,
               0,
               0,
               1,
               {"chaoyang", "haidian", "dongcheng", "xicheng", "fengtai", "shijingshan", "tongzhou", "changping"},
               true,
               800,
               2});
  a.push_back({"evaluation", ColumnKind::numeric, 1, 5, 1, {}, false, 0, 2});
  a.push_back({"price", ColumnKind::numeric, 1800, 4500, 100, {}, false, 0, 3});
  a.push_back({"language", ColumnKind::nominal, 0, 0, 1, {"mandarin", "english", "cantonese", "japanese"}, true, 408, 2});
  a.push_back({"live_in", ColumnKind::nominal, 0, 0, 1, {"yes", "no"}, false, 0, 2});
  return a;
}

inline std::vector<std::string> default_service_type_names() {
  return {"housekeeping", "nursery_teacher", "elder_care",    "maternity_nurse",  "hourly_cleaning", "cooking",
          "tutoring",     "patient_care",    "pet_care",      "gardening",        "laundry",         "moving",
          "babysitting",  "driving",         "appliance_repair", "home_caregiver"};
}

struct SyntheticCatalogSpec {
  std::uint64_t seed = 1;
  int service_types = 16;
  int providers = 827;
  int profiles_per_type = 7;
  int subprofiles = 1;  // per profile, driving the level-2 attributes
  int min_code_distance = 3;  // attributes on which any two profiles must differ
  double spread = 0.06;           // per-mode standard deviation, as a fraction of the range
  double category_fidelity = 0.9;
  bool ensure_coverage = true;    // every grid value and level appears at least once
  std::vector<SyntheticAttribute> attributes = default_synthetic_attributes();
  std::vector<std::string> type_names = default_service_type_names();

  void validate() const {
    if (service_types < 1) throw ConfigError("need at least one service type");
    if (providers < service_types) throw ConfigError("fewer providers than service types");
    if (profiles_per_type < 1) throw ConfigError("need at least one profile per type");
    if (subprofiles < 1) throw ConfigError("need at least one sub-profile per profile");
    if (profiles_per_type * subprofiles > providers / service_types)
      throw ConfigError("more profiles per type than providers of the smallest type");
    if (attributes.empty()) throw ConfigError("need at least one attribute");
    std::set<std::string> names;
    for (const auto& a : attributes) {
      if (!names.insert(a.name).second) throw ConfigError("duplicate attribute '" + a.name + "'");
      if (a.kind == ColumnKind::numeric) {
        if (!(a.step > 0.0) || !(a.max >= a.min)) throw ConfigError("bad numeric grid for '" + a.name + "'");
        if (a.set_valued) throw ConfigError("numeric attribute '" + a.name + "' cannot be set-valued");
      } else if (a.levels.empty()) {
        throw ConfigError("categorical attribute '" + a.name + "' has no levels");
      }
      if (a.level != 1 && a.level != 2) throw ConfigError("attribute '" + a.name + "' has a bad structure level");
      if (a.modes > static_cast<int>(a.grid_size()))
        throw ConfigError("attribute '" + a.name + "' has more modes than values");
      if (a.extra_memberships < 0 || (a.extra_memberships > 0 && (!a.set_valued || a.levels.size() < 2)))
        throw ConfigError("extra memberships need a set-valued attribute with two or more levels");
    }
  }
};

struct SyntheticCatalog {
  Catalog catalog;
  // Ground truth, parallel to catalog.records.
  std::vector<int> profile;
  std::vector<int> subprofile;
  std::map<std::string, std::vector<int>> planted_mode;  // per attribute; -1 when unstructured
};

namespace detail {

inline double numeric_mode_center(int mode, int modes) { return (mode + 0.5) / static_cast<double>(modes); }

inline std::size_t nearest_grid_index(const SyntheticAttribute& a, double pos) {
  pos = std::clamp(pos, 0.0, 1.0);
  double raw = a.min + pos * (a.max - a.min);
  auto i = static_cast<long long>(std::llround((raw - a.min) / a.step));
  return static_cast<std::size_t>(std::clamp<long long>(i, 0, static_cast<long long>(a.grid_size()) - 1));
}

// Levels acting as categorical modes, chosen once per type.
inline std::vector<std::size_t> pick_mode_levels(const SyntheticAttribute& a, Rng& rng) {
  std::vector<std::size_t> idx(a.levels.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (a.kind == ColumnKind::ordinal) {
    // Spread ordered modes over the scale instead of sampling them.
    std::vector<std::size_t> out;
    for (int m = 0; m < a.modes; ++m)
      out.push_back(static_cast<std::size_t>(std::llround(numeric_mode_center(m, a.modes) * (idx.size() - 1))));
    return out;
  }
  rng.shuffle(idx);
  idx.resize(static_cast<std::size_t>(a.modes));
  return idx;
}

}  // namespace detail

inline SyntheticCatalog generate_catalog(const SyntheticCatalogSpec& spec) {
  spec.validate();
  const auto n_attr = spec.attributes.size();
  SyntheticCatalog out;
  Catalog& cat = out.catalog;
  for (const auto& a : spec.attributes) {
    cat.attributes.push_back(a.name);
    cat.categorical.push_back(a.kind != ColumnKind::numeric);
    if (a.kind == ColumnKind::ordinal) cat.options.ordinal_orders[a.name] = a.levels;
  }

  // Grid indices per record and attribute; set-valued extras are kept apart.
  std::vector<std::vector<std::size_t>> cells;
  std::vector<std::vector<std::set<std::size_t>>> extras;

  const int types = spec.service_types;
  const int base = spec.providers / types, rem = spec.providers % types;
  int serial = 0;
  for (int t = 0; t < types; ++t) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(t) + 1));
    const std::string type_name = static_cast<std::size_t>(t) < spec.type_names.size()
                                      ? spec.type_names[static_cast<std::size_t>(t)]
                                      : "service_" + std::to_string(t + 1);
    const int count = base + (t < rem ? 1 : 0);
    const int k = spec.profiles_per_type;

    // Mode index of every (profile, sub-profile) cell on every structured
    // attribute. Level-1 modes are shared by the sub-profiles of a profile;
    // codes stay jointly distinct where the mode space allows it.
    const int sub = spec.subprofiles;
    const auto cells_per_type = static_cast<std::size_t>(k * sub);
    std::vector<std::vector<int>> code(cells_per_type, std::vector<int>(n_attr, -1));
    std::vector<std::vector<std::size_t>> mode_levels(n_attr);
    for (std::size_t a = 0; a < n_attr; ++a)
      if (spec.attributes[a].modes > 1 && spec.attributes[a].kind != ColumnKind::numeric)
        mode_levels[a] = detail::pick_mode_levels(spec.attributes[a], rng);
    auto draw = [&](std::vector<int>& c, int level) {
      for (std::size_t a = 0; a < n_attr; ++a) {
        const auto& attr = spec.attributes[a];
        if (attr.level != level) continue;
        c[a] = attr.modes > 1 ? static_cast<int>(rng.index(static_cast<std::size_t>(attr.modes))) : -1;
      }
    };
    auto hamming = [](const std::vector<int>& a, const std::vector<int>& b) {
      int d = 0;
      for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
      return d;
    };
    std::vector<std::vector<int>> profiles;
    std::set<std::vector<int>> seen_cells;
    for (int p = 0; p < k; ++p) {
      std::vector<int> top(n_attr, -1), best;
      int best_d = -1;
      for (int attempt = 0; attempt < 256 && best_d < spec.min_code_distance; ++attempt) {
        draw(top, 1);
        int d = static_cast<int>(n_attr) + 1;
        for (const auto& other : profiles) d = std::min(d, hamming(top, other));
        if (d > best_d) {
          best_d = d;
          best = top;
        }
      }
      top = best;
      profiles.push_back(top);
      for (int q = 0; q < sub; ++q) {
        auto& c = code[static_cast<std::size_t>(p * sub + q)];
        c = top;
        for (int attempt = 0; attempt < 64; ++attempt) {
          draw(c, 2);
          if (seen_cells.insert(c).second) break;
        }
      }
    }

    // Balanced cell membership in shuffled order.
    std::vector<int> member(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) member[static_cast<std::size_t>(j)] = j % (k * sub);
    rng.shuffle(member);

    for (int j = 0; j < count; ++j) {
      ProviderRecord rec;
      char id[16];
      std::snprintf(id, sizeof id, "p%04d", ++serial);
      rec.provider_id = id;
      rec.service_type = type_name;
      const int cell = member[static_cast<std::size_t>(j)];
      std::vector<std::size_t> row(n_attr);
      for (std::size_t a = 0; a < n_attr; ++a) {
        const auto& attr = spec.attributes[a];
        const int mode = code[static_cast<std::size_t>(cell)][a];
        out.planted_mode[attr.name].push_back(mode);
        if (attr.kind == ColumnKind::numeric) {
          double pos = mode < 0 ? rng.uniform() : detail::numeric_mode_center(mode, attr.modes) + spec.spread * rng.normal();
          row[a] = detail::nearest_grid_index(attr, pos);
        } else if (mode >= 0 && rng.uniform() < spec.category_fidelity) {
          row[a] = mode_levels[a][static_cast<std::size_t>(mode)];
        } else {
          row[a] = rng.index(attr.levels.size());
        }
      }
      out.profile.push_back(cell / sub);
      out.subprofile.push_back(cell % sub);
      cells.push_back(std::move(row));
      cat.records.push_back(std::move(rec));
    }
  }
  extras.assign(cells.size(), std::vector<std::set<std::size_t>>(n_attr));

  // Coverage: each missing value is taken over by a provider whose current
  // value is shared with someone else, nearest on the grid first.
  if (spec.ensure_coverage) {
    for (std::size_t a = 0; a < n_attr; ++a) {
      const auto& attr = spec.attributes[a];
      std::vector<int> freq(attr.grid_size(), 0);
      for (const auto& row : cells) ++freq[row[a]];
      for (std::size_t v = 0; v < freq.size(); ++v) {
        if (freq[v] > 0) continue;
        std::size_t best = cells.size();
        long long best_key = 0;
        for (std::size_t r = 0; r < cells.size(); ++r) {
          std::size_t u = cells[r][a];
          if (freq[u] < 2) continue;
          long long key = attr.kind == ColumnKind::numeric
                              ? std::llabs(static_cast<long long>(u) - static_cast<long long>(v))
                              : -freq[u];
          if (best == cells.size() || key < best_key) {
            best = r;
            best_key = key;
          }
        }
        if (best == cells.size()) continue;
        --freq[cells[best][a]];
        cells[best][a] = v;
        ++freq[v];
      }
    }
  }

  // Extra labels for set-valued attributes, one per chosen provider.
  for (std::size_t a = 0; a < n_attr; ++a) {
    const auto& attr = spec.attributes[a];
    if (!attr.set_valued || attr.extra_memberships == 0) continue;
    Rng rng(mix_seed(spec.seed, 0x5e7ull + a));
    std::vector<std::size_t> order(cells.size());
    for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
    rng.shuffle(order);
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(attr.extra_memberships), order.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t r = order[i];
      std::size_t pick = rng.index(attr.levels.size() - 1);
      if (pick >= cells[r][a]) ++pick;
      extras[r][a].insert(pick);
    }
  }

  for (std::size_t r = 0; r < cells.size(); ++r) {
    auto& rec = cat.records[r];
    for (std::size_t a = 0; a < n_attr; ++a) {
      const auto& attr = spec.attributes[a];
      if (attr.kind == ColumnKind::numeric) {
        rec.values.push_back(CellValue::of(attr.grid_value(cells[r][a])));
      } else {
        std::vector<std::string> labels{attr.levels[cells[r][a]]};
        for (std::size_t e : extras[r][a]) labels.push_back(attr.levels[e]);
        rec.values.push_back(CellValue::of(labels));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hand-built fixtures

namespace detail {

inline Catalog fixture_schema() {
  Catalog cat;
  for (const auto& a : default_synthetic_attributes()) {
    cat.attributes.push_back(a.name);
    cat.categorical.push_back(a.kind != ColumnKind::numeric);
    if (a.kind == ColumnKind::ordinal) cat.options.ordinal_orders[a.name] = a.levels;
  }
  return cat;
}

struct FixtureRow {
  double age;
  std::string gender;
  double experience;
  std::string education;
  std::string service_area;
  double evaluation;
  double price;
  std::string language;
  std::string live_in;
};

inline ProviderRecord fixture_record(const std::string& id, const std::string& type, const FixtureRow& f) {
  using L = std::vector<std::string>;
  ProviderRecord r;
  r.provider_id = id;
  r.service_type = type;
  r.values = {CellValue::of(f.age),        CellValue::of(L{f.gender}),       CellValue::of(f.experience),
              CellValue::of(L{f.education}), CellValue::of(L{f.service_area}), CellValue::of(f.evaluation),
              CellValue::of(f.price),      CellValue::of(L{f.language}),     CellValue::of(L{f.live_in})};
  return r;
}

inline double jitter_on_grid(Rng& rng, double v, double step, double lo, double hi, double sd) {
  return std::clamp(v + step * std::round(sd * rng.normal()), lo, hi);
}

}  // namespace detail

// Nursery-teacher catalog of 56 providers whose granule tree is a chain:
// each level peels one group of 8 off on its own attribute set (age, then
// experience, then education with service area, evaluation, language, and
// finally price for the last 16). The group peeled off one level up carries
// the extreme values of the next level's attributes, so a split only becomes
// prominent once its parent split is resolved.
inline Catalog pbce_fixture() {
  Catalog cat = detail::fixture_schema();
  Rng rng(11);
  int serial = 0;
  for (int g = 1; g <= 7; ++g) {  // groups 1-5 peel off in turn; 6 and 7 are the final pair
    for (int j = 0; j < 8; ++j) {
      detail::FixtureRow f{g == 1 ? 50.0 : 28.0,
                           "woman",
                           g == 2 ? 9.0 : 4.0,
                           g == 3 ? "bachelor" : "vocational",
                           g == 3 ? "fengtai" : "dongcheng",
                           g == 4 ? 5.0 : 4.0,
                           g == 7 ? 3000.0 : 2600.0,
                           g == 5 ? "japanese" : "english",
                           "yes"};
      const bool lo = j == 0, hi = j == 1;
      if (lo || hi) {
        if (g == 1) f.experience = lo ? 0 : 25;
        if (g == 2) {
          f.education = lo ? "master" : "junior_high";
          f.service_area = lo ? "changping" : "xicheng";
        }
        if (g == 3) f.evaluation = lo ? 5 : 1;
        if (g == 4) f.language = lo ? "mandarin" : "cantonese";
        if (g == 5) f.price = lo ? 1800 : 4500;
      }
      f.age = detail::jitter_on_grid(rng, f.age, 1, 20, 56, 0.5);
      f.experience = detail::jitter_on_grid(rng, f.experience, 1, 0, 25, 0.5);
      f.price = detail::jitter_on_grid(rng, f.price, 100, 1800, 4500, 0.5);
      char id[16];
      std::snprintf(id, sizeof id, "n%03d", ++serial);
      cat.records.push_back(detail::fixture_record(id, "nursery_teacher", f));
    }
  }
  return cat;
}

// Housekeeping catalog of 40 providers in four profiles that differ on age,
// gender, price and a few more attributes, each split again by experience; plus a small travel-agent type used
// to exercise domain switches.
inline Catalog housekeeping_fixture() {
  Catalog cat = detail::fixture_schema();
  Rng rng(7);
  struct Profile {
    double age;
    const char* gender;
    double price;
    const char* education;
    double evaluation;
    const char* live_in;
  };
  const Profile profiles[] = {{25, "woman", 2000, "high_school", 3, "no"},
                              {27, "man", 4000, "bachelor", 5, "yes"},
                              {48, "woman", 3800, "vocational", 5, "no"},
                              {50, "man", 2200, "junior_high", 3, "yes"}};
  const double experience[] = {2, 8};
  int serial = 0;
  for (const auto& p : profiles) {
    for (double e : experience) {
      for (int j = 0; j < 5; ++j) {
        detail::FixtureRow f{detail::jitter_on_grid(rng, p.age, 1, 20, 56, 1.0),
                             p.gender,
                             detail::jitter_on_grid(rng, e, 1, 0, 25, 0.5),
                             p.education,
                             "chaoyang",
                             p.evaluation,
                             detail::jitter_on_grid(rng, p.price, 100, 1800, 4500, 1.0),
                             "mandarin",
                             p.live_in};
        // Two seasoned providers stretch the experience scale at the root.
        if (j == 0 && e > 2 && (&p == &profiles[2] || &p == &profiles[3])) f.experience = 25;
        char id[16];
        std::snprintf(id, sizeof id, "h%03d", ++serial);
        cat.records.push_back(detail::fixture_record(id, "housekeeping", f));
      }
    }
  }
  for (int j = 0; j < 4; ++j) {
    detail::FixtureRow f{30.0 + 5 * j, j % 2 ? "man" : "woman", 3.0 + j, "bachelor", "haidian", 5, 3000.0 + 200 * j,
                         "english", "no"};
    char id[16];
    std::snprintf(id, sizeof id, "t%03d", j + 1);
    cat.records.push_back(detail::fixture_record(id, "travel_agent", f));
  }
  return cat;
}

}  // namespace elicit
