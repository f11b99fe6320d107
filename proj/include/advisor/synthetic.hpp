#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advisor/catalog.hpp"
#include "advisor/csv.hpp"

namespace advisor {

/// The bundled restaurant schema: seven attributes, prior weights summing to one.
inline nlohmann::json restaurant_schema_json() {
    return nlohmann::json::parse(R"({
  "attributes": [
    {
      "name": "cuisine",
      "prior_weight": 0.25,
      "values": ["American", "Barbecue", "Brazilian", "Burgers", "Cajun", "Californian", "Chinese", "Ethiopian",
                 "French", "German", "Greek", "Indian", "Italian", "Japanese", "Korean", "Lebanese",
                 "Mediterranean", "Mexican", "Moroccan", "Nepalese", "Pakistani", "Persian", "Peruvian", "Pizza",
                 "Seafood", "Spanish", "Steakhouse", "Sushi", "Thai", "Vietnamese"],
      "synonyms": {"bbq": "Barbecue", "burger": "Burgers", "steak": "Steakhouse", "fish": "Seafood"}
    },
    {
      "name": "location",
      "prior_weight": 0.2,
      "values": ["Palo_Alto", "Menlo_Park", "Mountain_View", "Sunnyvale", "Cupertino", "San_Jose", "Santa_Clara",
                 "Los_Altos", "Redwood_City", "San_Mateo", "Burlingame", "Foster_City", "Belmont", "San_Carlos",
                 "Milpitas", "Fremont", "Campbell", "Los_Gatos", "Saratoga", "Atherton"]
    },
    {
      "name": "price",
      "prior_weight": 0.15,
      "values": ["one", "two", "three", "four", "five"],
      "synonyms": {"cheap": "one", "inexpensive": "one", "moderate": "three", "expensive": "four",
                   "splurge": "five"}
    },
    {
      "name": "rating",
      "prior_weight": 0.12,
      "values": ["one_star", "two_stars", "three_stars", "four_stars", "five_stars"]
    },
    {
      "name": "reservations",
      "prior_weight": 0.1,
      "values": ["required", "recommended", "not_accepted"],
      "synonyms": {"walk in": "not_accepted"}
    },
    {
      "name": "parking",
      "prior_weight": 0.1,
      "values": ["valet", "street", "lot", "garage"],
      "synonyms": {"parking lot": "lot", "street parking": "street"}
    },
    {
      "name": "payment",
      "prior_weight": 0.08,
      "values": ["cash_only", "credit_card", "amex"],
      "synonyms": {"cash": "cash_only", "credit": "credit_card", "american express": "amex"}
    }
  ]
})");
}

struct GeneratorParams {
    std::size_t n_items = 1900;
    std::uint64_t seed = 7;
    double skew = 0.8;  // Zipf exponent of per-attribute value popularity
};

/// Items drawn with skewed per-attribute value popularity, so some combinations are
/// common and others empty (which exercises relaxation). Deterministic in the seed.
inline std::vector<Item> generate_items(const AttributeSchema& schema, const GeneratorParams& gp) {
    static const char* kFirst[] = {"Golden", "Blue",  "Red",    "Little", "Happy",  "Royal", "Silver", "Green",
                                   "Lucky",  "Old",   "Sunny",  "Jade",   "Corner", "Village", "Garden", "Harbor"};
    static const char* kSecond[] = {"Lotus", "Dragon", "Olive", "Fig",   "Pepper", "Anchor", "Lantern", "Oak",
                                    "Basil", "Saffron", "Tiger", "Maple", "Bamboo", "Harvest", "Spoon",  "Table"};
    static const char* kThird[] = {"Kitchen", "Cafe", "Bistro", "House", "Grill", "Diner", "Eatery", "Tavern"};
    static const char* kStreets[] = {"University Ave", "El Camino Real", "Castro St", "Main St", "Santa Cruz Ave",
                                     "Murphy Ave", "Broadway", "California Ave", "Emerson St", "Ramona St",
                                     "Lincoln Ave", "Laurel St"};

    std::mt19937_64 rng(gp.seed);
    std::vector<std::discrete_distribution<std::size_t>> pickers;
    for (const auto& a : schema.attributes()) {
        std::vector<std::size_t> order(a.values.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<double> w(a.values.size());
        for (std::size_t rank = 0; rank < order.size(); ++rank)
            w[order[rank]] = 1.0 / std::pow(static_cast<double>(rank + 1), gp.skew);
        pickers.emplace_back(w.begin(), w.end());
    }
    const std::size_t location = schema.index_of("location").value_or(schema.size());

    std::uniform_int_distribution<int> pick16(0, 15), pick8(0, 7), pick_street(0, 11), number(10, 2999),
        phone(0, 9999);
    std::vector<Item> items;
    const int width = std::max<int>(4, static_cast<int>(std::to_string(gp.n_items).size()));
    for (std::size_t i = 0; i < gp.n_items; ++i) {
        Item it;
        std::ostringstream id;
        id << 'r' << std::setw(width) << std::setfill('0') << i + 1;
        it.id = id.str();
        for (std::size_t a = 0; a < schema.size(); ++a) it.values.push_back(schema.attributes()[a].values[pickers[a](rng)]);
        it.display.name = std::string(kFirst[pick16(rng)]) + " " + kSecond[pick16(rng)] + " " + kThird[pick8(rng)];
        std::string city = location < schema.size() ? it.values[location] : "Palo_Alto";
        for (char& c : city)
            if (c == '_') c = ' ';
        it.display.address = std::to_string(number(rng)) + " " + kStreets[pick_street(rng)] + ", " + city;
        std::ostringstream ph;
        ph << "(650) 555-" << std::setw(4) << std::setfill('0') << phone(rng);
        it.display.phone = ph.str();
        items.push_back(std::move(it));
    }
    return items;
}

inline void write_items_csv(std::ostream& out, const AttributeSchema& schema, const std::vector<Item>& items) {
    std::vector<std::string> header{"id", "name", "address", "phone"};
    for (const auto& a : schema.attributes()) header.push_back(a.name);
    write_csv_row(out, header);
    for (const auto& it : items) {
        std::vector<std::string> row{it.id, it.display.name, it.display.address, it.display.phone};
        row.insert(row.end(), it.values.begin(), it.values.end());
        write_csv_row(out, row);
    }
}

}  // namespace advisor
