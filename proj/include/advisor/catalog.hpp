#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "advisor/csv.hpp"

namespace advisor {

class CatalogError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Attribute {
    std::string name;
    std::vector<std::string> values;
    std::map<std::string, std::string> synonyms;  // surface token -> value id
    double prior_weight = 0.0;

    bool has_value(const std::string& v) const {
        return std::find(values.begin(), values.end(), v) != values.end();
    }
};

class AttributeSchema {
public:
    AttributeSchema() = default;

    explicit AttributeSchema(std::vector<Attribute> attrs) : attributes_(std::move(attrs)) {
        double total = 0.0;
        for (std::size_t i = 0; i < attributes_.size(); ++i) {
            const Attribute& a = attributes_[i];
            if (a.name.empty())
                throw CatalogError("schema: attribute #" + std::to_string(i) + " has no name");
            if (!index_.emplace(a.name, i).second)
                throw CatalogError("schema: duplicate attribute '" + a.name + "'");
            if (a.values.empty())
                throw CatalogError("schema: attribute '" + a.name + "' has an empty value domain");
            std::set<std::string> seen;
            for (const auto& v : a.values)
                if (!seen.insert(v).second)
                    throw CatalogError("schema: duplicate value '" + v + "' in attribute '" + a.name + "'");
            for (const auto& [token, v] : a.synonyms)
                if (!seen.count(v))
                    throw CatalogError("schema: synonym '" + token + "' of attribute '" + a.name +
                                       "' maps to unknown value '" + v + "'");
            if (!(a.prior_weight >= 0.0 && a.prior_weight <= 1.0))
                throw CatalogError("schema: prior_weight of '" + a.name + "' outside [0,1]");
            total += a.prior_weight;
        }
        if (!attributes_.empty() && std::abs(total - 1.0) > 1e-9)
            throw CatalogError("schema: prior weights sum to " + std::to_string(total) + ", expected 1");
    }

    const std::vector<Attribute>& attributes() const { return attributes_; }
    std::size_t size() const { return attributes_.size(); }

    std::optional<std::size_t> index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const Attribute& at(const std::string& name) const {
        auto idx = index_of(name);
        if (!idx) throw CatalogError("unknown attribute '" + name + "'");
        return attributes_[*idx];
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

private:
    std::vector<Attribute> attributes_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct DisplayInfo {
    std::string name;
    std::string address;
    std::string phone;
};

/// One catalog row. `values` is parallel to the schema's attribute order.
struct Item {
    std::string id;
    std::vector<std::string> values;
    DisplayInfo display;

    const std::string& value(std::size_t attr_index) const { return values.at(attr_index); }
};

/// Per attribute, the set of acceptable values (a disjunction).
using ConstraintSet = std::map<std::string, std::set<std::string>>;

class Catalog {
public:
    Catalog() = default;

    Catalog(AttributeSchema schema, std::vector<Item> items)
        : schema_(std::move(schema)), items_(std::move(items)) {
        for (std::size_t row = 0; row < items_.size(); ++row) {
            const Item& it = items_[row];
            const std::string where = "item row " + std::to_string(row + 1) + " (id '" + it.id + "')";
            if (it.id.empty()) throw CatalogError(where + ": empty id");
            if (it.values.size() != schema_.size())
                throw CatalogError(where + ": expected " + std::to_string(schema_.size()) + " attribute values");
            for (std::size_t a = 0; a < schema_.size(); ++a) {
                const Attribute& attr = schema_.attributes()[a];
                if (!attr.has_value(it.values[a]))
                    throw CatalogError(where + ": attribute '" + attr.name + "' has value '" + it.values[a] +
                                       "' outside its domain");
            }
            if (!index_.emplace(it.id, row).second) throw CatalogError(where + ": duplicate id");
        }
    }

    const AttributeSchema& schema() const { return schema_; }
    const std::vector<Item>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }

    const Item* find(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &items_[it->second];
    }

    std::vector<std::string> item_ids() const {
        std::vector<std::string> ids;
        ids.reserve(items_.size());
        for (const auto& it : items_) ids.push_back(it.id);
        return ids;
    }

    /// Throws CatalogError if the constraints name unknown attributes or values.
    void validate(const ConstraintSet& constraints) const {
        for (const auto& [name, allowed] : constraints) {
            const Attribute& attr = schema_.at(name);
            if (allowed.empty()) throw CatalogError("constraint on '" + name + "' allows no values");
            for (const auto& v : allowed)
                if (!attr.has_value(v))
                    throw CatalogError("constraint value '" + v + "' not in domain of '" + name + "'");
        }
    }

private:
    AttributeSchema schema_;
    std::vector<Item> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Loading

inline AttributeSchema parse_schema(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("attributes") || !doc["attributes"].is_array())
        throw CatalogError("schema: expected an object with an 'attributes' array");
    std::vector<Attribute> attrs;
    for (const auto& a : doc["attributes"]) {
        Attribute attr;
        try {
            attr.name = a.at("name").get<std::string>();
            attr.values = a.at("values").get<std::vector<std::string>>();
            if (a.contains("synonyms")) attr.synonyms = a["synonyms"].get<std::map<std::string, std::string>>();
            attr.prior_weight = a.at("prior_weight").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw CatalogError(std::string("schema: malformed attribute entry: ") + e.what());
        }
        attrs.push_back(std::move(attr));
    }
    return AttributeSchema(std::move(attrs));
}

inline AttributeSchema load_schema(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw CatalogError(std::string("schema: ") + e.what());
    }
    return parse_schema(doc);
}

inline std::vector<Item> load_items(std::istream& in, const AttributeSchema& schema) {
    static const std::vector<std::string> kDisplay = {"id", "name", "address", "phone"};
    std::vector<Item> items;
    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) return items;  // empty file: no rows

    std::map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!column.emplace(header[c], c).second)
            throw CatalogError("items header: duplicate column '" + header[c] + "'");
        const bool display = std::find(kDisplay.begin(), kDisplay.end(), header[c]) != kDisplay.end();
        if (!display && !schema.contains(header[c]))
            throw CatalogError("items header: unknown attribute '" + header[c] + "'");
    }
    for (const auto& d : kDisplay)
        if (!column.count(d)) throw CatalogError("items header: missing column '" + d + "'");
    std::vector<std::size_t> attr_col;
    for (const auto& a : schema.attributes()) {
        auto it = column.find(a.name);
        if (it == column.end()) throw CatalogError("items header: missing attribute column '" + a.name + "'");
        attr_col.push_back(it->second);
    }

    std::vector<std::string> row;
    std::set<std::string> ids;
    while (reader.next(row)) {
        const std::size_t line = reader.line();
        if (row.size() == 1 && row[0].empty()) continue;  // blank line
        const std::string where = "items line " + std::to_string(line);
        if (row.size() != header.size())
            throw CatalogError(where + ": malformed row, expected " + std::to_string(header.size()) +
                               " cells, got " + std::to_string(row.size()));
        Item item;
        item.id = row[column["id"]];
        item.display = {row[column["name"]], row[column["address"]], row[column["phone"]]};
        if (item.id.empty()) throw CatalogError(where + ": empty id");
        if (!ids.insert(item.id).second) throw CatalogError(where + ": duplicate id '" + item.id + "'");
        for (std::size_t a = 0; a < schema.size(); ++a) {
            const Attribute& attr = schema.attributes()[a];
            const std::string& v = row[attr_col[a]];
            if (!attr.has_value(v))
                throw CatalogError(where + ": attribute '" + attr.name + "' has value '" + v + "' outside its domain");
            item.values.push_back(v);
        }
        items.push_back(std::move(item));
    }
    return items;
}

inline Catalog load_catalog(std::istream& schema_source, std::istream& items_source) {
    AttributeSchema schema = load_schema(schema_source);
    std::vector<Item> items = load_items(items_source, schema);
    return Catalog(std::move(schema), std::move(items));
}

/// Loads `<dir>/schema.json` and `<dir>/items.csv`.
inline Catalog load_catalog_dir(const std::string& dir) {
    std::ifstream schema(dir + "/schema.json");
    if (!schema) throw CatalogError("cannot open " + dir + "/schema.json");
    std::ifstream items(dir + "/items.csv");
    if (!items) throw CatalogError("cannot open " + dir + "/items.csv");
    return load_catalog(schema, items);
}

// ---------------------------------------------------------------------------
// Queries

namespace detail {

struct ResolvedConstraint {
    std::size_t attr;
    const std::set<std::string>* allowed;
};

inline std::vector<ResolvedConstraint> resolve(const Catalog& catalog, const ConstraintSet& constraints,
                                               const std::string* skip = nullptr) {
    std::vector<ResolvedConstraint> out;
    for (const auto& [name, allowed] : constraints) {
        if (skip && name == *skip) continue;
        out.push_back({*catalog.schema().index_of(name), &allowed});
    }
    return out;
}

inline bool matches(const Item& item, const std::vector<ResolvedConstraint>& rc) {
    for (const auto& c : rc)
        if (!c.allowed->count(item.values[c.attr])) return false;
    return true;
}

}  // namespace detail

/// Items whose value for every constrained attribute is one of the allowed values.
inline std::vector<const Item*> query_exact(const Catalog& catalog, const ConstraintSet& constraints) {
    catalog.validate(constraints);
    const auto rc = detail::resolve(catalog, constraints);
    std::vector<const Item*> out;
    for (const auto& item : catalog.items())
        if (detail::matches(item, rc)) out.push_back(&item);
    return out;
}

/// For each constrained attribute, the exact-match count if that attribute alone were relaxed.
inline std::map<std::string, std::size_t> relax_preview_counts(const Catalog& catalog,
                                                               const ConstraintSet& constraints) {
    catalog.validate(constraints);
    std::map<std::string, std::size_t> counts;
    for (const auto& [name, allowed] : constraints) {
        const auto rc = detail::resolve(catalog, constraints, &name);
        std::size_t n = 0;
        for (const auto& item : catalog.items())
            if (detail::matches(item, rc)) ++n;
        counts[name] = n;
    }
    return counts;
}

/// Up to k distinct values of `attribute`: the most probable under `value_prefs` when given
/// (ties by value id), otherwise the first k in domain order.
inline std::vector<std::string> sample_values(const Catalog& catalog, const std::string& attribute, std::size_t k,
                                              const std::map<std::string, double>* value_prefs = nullptr) {
    if (k == 0) throw std::invalid_argument("sample_values: k must be positive");
    const Attribute& attr = catalog.schema().at(attribute);
    std::vector<std::string> values = attr.values;
    if (value_prefs) {
        auto prob = [&](const std::string& v) {
            auto it = value_prefs->find(v);
            return it == value_prefs->end() ? 0.0 : it->second;
        };
        std::stable_sort(values.begin(), values.end(), [&](const std::string& a, const std::string& b) {
            const double pa = prob(a), pb = prob(b);
            if (pa != pb) return pa > pb;
            return a < b;
        });
    }
    if (values.size() > k) values.resize(k);
    return values;
}

}  // namespace advisor
