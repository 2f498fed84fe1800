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

// Tabular service catalog: parsing, knowledge-graph materialization, and the
// per-service-type normalized attribute matrix.
//
// Layout: a header row `provider_id,service_type,<attr_1>,...,<attr_k>`, then
// one provider per line. Numeric cells are plain decimals; categorical cells
// are double-quoted strings. A quoted cell may list several values separated
// by ';' (for example several service areas).

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "elicit/clustering.hpp"
#include "elicit/error.hpp"
#include "elicit/kg.hpp"
#include "elicit/util.hpp"

namespace elicit {

struct CsvField {
  std::string text;
  bool quoted = false;
};

// Splits one CSV line. Returns false on an unterminated quote.
inline bool parse_csv_line(std::string_view line, std::vector<CsvField>& out) {
  out.clear();
  CsvField cur;
  bool in_quotes = false;
  bool after_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.text.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        cur.text.push_back(c);
      }
      continue;
    }
    if (c == ',') {
      if (!cur.quoted) cur.text = trim(cur.text);
      out.push_back(std::move(cur));
      cur = {};
      after_quote = false;
    } else if (c == '"' && !after_quote && trim(cur.text).empty()) {
      cur.text.clear();
      cur.quoted = true;
      in_quotes = true;
    } else if (after_quote) {
      if (!std::isspace(static_cast<unsigned char>(c))) return false;
    } else {
      cur.text.push_back(c);
    }
  }
  if (in_quotes) return false;
  if (!cur.quoted) cur.text = trim(cur.text);
  out.push_back(std::move(cur));
  return true;
}

inline std::string quote_csv(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

struct CellValue {
  enum class Kind { missing, number, labels };
  Kind kind = Kind::missing;
  double number = 0.0;
  std::vector<std::string> labels;

  static CellValue of(double v) { return {Kind::number, v, {}}; }
  static CellValue of(std::vector<std::string> l) { return {Kind::labels, 0.0, std::move(l)}; }
  bool missing() const { return kind == Kind::missing; }

  // Display text: the number, or labels joined by ';'.
  std::string text() const {
    switch (kind) {
      case Kind::number: return format_number(number);
      case Kind::labels: return join(labels, ";");
      case Kind::missing: break;
    }
    return {};
  }
};

struct ProviderRecord {
  std::string provider_id;
  std::string service_type;
  std::vector<CellValue> values;  // parallel to Catalog::attributes
};

struct CatalogOptions {
  // Declared level order of ordered categorical attributes (rank codes).
  std::map<std::string, std::vector<std::string>> ordinal_orders;
};

struct Catalog {
  std::vector<std::string> attributes;
  std::vector<bool> categorical;
  std::vector<ProviderRecord> records;
  CatalogOptions options;

  std::vector<std::string> service_types() const {
    std::set<std::string> s;
    for (const auto& r : records) s.insert(r.service_type);
    return {s.begin(), s.end()};
  }

  std::vector<const ProviderRecord*> records_of(const std::string& type) const {
    std::vector<const ProviderRecord*> out;
    for (const auto& r : records)
      if (r.service_type == type) out.push_back(&r);
    return out;
  }

  const ProviderRecord* find(const std::string& provider_id) const {
    for (const auto& r : records)
      if (r.provider_id == provider_id) return &r;
    return nullptr;
  }

  std::size_t attribute_index(const std::string& name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
      if (attributes[i] == name) return i;
    throw NotFound("unknown attribute '" + name + "'");
  }
};

inline void write_catalog(const Catalog& cat, std::ostream& out) {
  out << "provider_id,service_type";
  for (const auto& a : cat.attributes) out << ',' << a;
  out << '\n';
  for (const auto& r : cat.records) {
    out << r.provider_id << ',' << r.service_type;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      out << ',';
      const auto& v = r.values[i];
      if (v.kind == CellValue::Kind::number) out << format_number(v.number);
      else if (v.kind == CellValue::Kind::labels) out << quote_csv(join(v.labels, ";"));
    }
    out << '\n';
  }
}

struct LoadedCatalog {
  Catalog catalog;
  ServiceKG kg;
  std::map<std::string, EntityId> provider_entities;
  std::size_t rejected = 0;
  std::vector<std::string> diagnostics;
};

// Appends the graph for one record: service -employ-> provider, and
// provider -attribute-> value for every listed value.
inline void add_record_to_graph(const Catalog& cat, const ProviderRecord& r, ServiceKG& kg,
                                std::map<std::string, EntityId>& services,
                                std::map<std::pair<std::string, std::string>, EntityId>& values,
                                std::map<std::string, EntityId>& providers) {
  auto svc = services.find(r.service_type);
  if (svc == services.end())
    svc = services.emplace(r.service_type, kg.add_entity(r.service_type, EntityKind::service, r.service_type))
              .first;
  EntityId provider = kg.add_entity(r.provider_id, EntityKind::provider, r.service_type);
  providers.emplace(r.provider_id, provider);
  kg.add_triple(svc->second, kEmployRelation, provider);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    const auto& cell = r.values[i];
    std::vector<std::string> texts;
    if (cell.kind == CellValue::Kind::number) texts.push_back(format_number(cell.number));
    else if (cell.kind == CellValue::Kind::labels) texts = cell.labels;
    for (const auto& text : texts) {
      auto key = std::make_pair(cat.attributes[i], text);
      auto it = values.find(key);
      if (it == values.end())
        it = values.emplace(key, kg.add_entity(text, EntityKind::attribute_value)).first;
      kg.add_triple(provider, cat.attributes[i], it->second);
    }
  }
}

inline ServiceKG build_graph(const Catalog& cat, std::map<std::string, EntityId>* providers_out = nullptr) {
  ServiceKG kg;
  std::map<std::string, EntityId> services;
  std::map<std::pair<std::string, std::string>, EntityId> values;
  std::map<std::string, EntityId> providers;
  for (const auto& r : cat.records) add_record_to_graph(cat, r, kg, services, values, providers);
  if (providers_out) *providers_out = std::move(providers);
  return kg;
}

// Parses a catalog. Malformed records are rejected individually and counted;
// an empty dataset is fatal.
inline LoadedCatalog load_catalog(std::istream& in, CatalogOptions options = {}) {
  LoadedCatalog out;
  Catalog& cat = out.catalog;
  cat.options = std::move(options);

  std::string line;
  std::vector<CsvField> fields;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<int> column_type;  // -1 unknown, 0 numeric, 1 categorical
  std::set<std::string> seen_ids;

  auto reject = [&](const std::string& why) {
    ++out.rejected;
    out.diagnostics.push_back("line " + std::to_string(line_no) + ": " + why);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!have_header) {
      if (!parse_csv_line(line, fields) || fields.size() < 3 || fields[0].text != "provider_id" ||
          fields[1].text != "service_type")
        throw FormatError("catalog header must start with provider_id,service_type and name >= 1 attribute");
      for (std::size_t i = 2; i < fields.size(); ++i) cat.attributes.push_back(fields[i].text);
      column_type.assign(cat.attributes.size(), -1);
      have_header = true;
      continue;
    }
    if (!parse_csv_line(line, fields)) {
      reject("unterminated quote");
      continue;
    }
    if (fields.size() != cat.attributes.size() + 2) {
      reject("expected " + std::to_string(cat.attributes.size() + 2) + " fields, got " +
             std::to_string(fields.size()));
      continue;
    }
    ProviderRecord rec;
    rec.provider_id = fields[0].text;
    rec.service_type = fields[1].text;
    if (rec.provider_id.empty() || rec.service_type.empty()) {
      reject("missing provider_id or service_type");
      continue;
    }
    if (seen_ids.count(rec.provider_id)) {
      reject("duplicate provider_id " + rec.provider_id);
      continue;
    }
    bool ok = true;
    std::size_t present = 0;
    std::vector<int> types = column_type;
    for (std::size_t i = 0; i < cat.attributes.size(); ++i) {
      const auto& f = fields[i + 2];
      if (!f.quoted && f.text.empty()) {
        rec.values.emplace_back();
        continue;
      }
      int kind = f.quoted ? 1 : 0;
      if (types[i] != -1 && types[i] != kind) {
        reject("attribute " + cat.attributes[i] + " mixes numeric and categorical cells");
        ok = false;
        break;
      }
      if (kind == 0) {
        auto v = parse_number(f.text);
        if (!v) {
          reject("attribute " + cat.attributes[i] + " is not a number: '" + f.text + "'");
          ok = false;
          break;
        }
        rec.values.push_back(CellValue::of(*v));
      } else {
        std::vector<std::string> labels;
        for (auto& part : split(f.text, ';')) {
          auto t = trim(part);
          if (!t.empty() && std::find(labels.begin(), labels.end(), t) == labels.end()) labels.push_back(t);
        }
        if (labels.empty()) {
          rec.values.emplace_back();
          continue;
        }
        rec.values.push_back(CellValue::of(std::move(labels)));
      }
      types[i] = kind;
      ++present;
    }
    if (!ok) continue;
    if (present == 0) {
      reject("record has no attribute values");
      continue;
    }
    column_type = types;
    seen_ids.insert(rec.provider_id);
    cat.records.push_back(std::move(rec));
  }
  if (!have_header || cat.records.empty()) throw FormatError("catalog contains no valid records");
  cat.categorical.resize(cat.attributes.size());
  for (std::size_t i = 0; i < cat.attributes.size(); ++i)
    cat.categorical[i] = column_type[i] == 1 || cat.options.ordinal_orders.count(cat.attributes[i]);
  out.kg = build_graph(cat, &out.provider_entities);
  return out;
}

inline LoadedCatalog load_catalog_file(const std::string& path, CatalogOptions options = {}) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open catalog '" + path + "'");
  return load_catalog(in, std::move(options));
}

// Normalized attribute matrix for one service type. Categorical cells use the
// first listed label; ordered categories take rank codes from the declared
// order, nominal ones take codes in sorted label order. Missing cells are
// imputed with the column mean.
inline AttributeMatrix attribute_matrix(const Catalog& cat, const std::string& service_type) {
  auto rows = cat.records_of(service_type);
  if (rows.empty()) throw NotFound("no providers of type '" + service_type + "'");
  AttributeMatrix m;
  m.values = Matrix(rows.size(), cat.attributes.size());
  for (const auto* r : rows) m.row_ids.push_back(r->provider_id);

  for (std::size_t a = 0; a < cat.attributes.size(); ++a) {
    ColumnMeta meta;
    meta.name = cat.attributes[a];
    std::vector<std::optional<double>> raw(rows.size());
    if (cat.categorical[a]) {
      auto ord = cat.options.ordinal_orders.find(meta.name);
      std::set<std::string> observed;
      for (const auto* r : rows)
        if (r->values[a].kind == CellValue::Kind::labels) observed.insert(r->values[a].labels.front());
      if (ord != cat.options.ordinal_orders.end()) {
        meta.kind = ColumnKind::ordinal;
        meta.categories = ord->second;
        for (const auto& l : observed)
          if (std::find(meta.categories.begin(), meta.categories.end(), l) == meta.categories.end())
            meta.categories.push_back(l);
      } else {
        meta.kind = ColumnKind::nominal;
        meta.categories.assign(observed.begin(), observed.end());
      }
      meta.min = 0.0;
      meta.max = meta.categories.empty() ? 0.0 : static_cast<double>(meta.categories.size() - 1);
      for (std::size_t j = 0; j < rows.size(); ++j)
        if (rows[j]->values[a].kind == CellValue::Kind::labels)
          raw[j] = static_cast<double>(meta.code_of(rows[j]->values[a].labels.front()));
    } else {
      meta.kind = ColumnKind::numeric;
      bool first = true;
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[j]->values[a].kind != CellValue::Kind::number) continue;
        double v = rows[j]->values[a].number;
        raw[j] = v;
        meta.min = first ? v : std::min(meta.min, v);
        meta.max = first ? v : std::max(meta.max, v);
        first = false;
      }
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (!raw[j]) continue;
      m.values(j, a) = meta.normalize(*raw[j]);
      sum += m.values(j, a);
      ++count;
    }
    double mean = count ? sum / static_cast<double>(count) : 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j)
      if (!raw[j]) m.values(j, a) = mean;
    m.columns.push_back(std::move(meta));
  }
  return m;
}

}  // namespace elicit
