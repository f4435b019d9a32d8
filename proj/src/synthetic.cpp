#include "slotfill/synthetic.hpp"

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "slotfill/errors.hpp"
#include "slotfill/rng.hpp"

namespace slotfill {

namespace {

struct Grammar {
  // Placeholder -> (slot type, candidate values).
  std::map<std::string, std::pair<std::string, std::vector<std::string>>> slots;
  std::vector<std::string> templates;
};

const std::vector<std::string> kCities = {
    "boston",    "denver",      "new york",  "san francisco", "los angeles", "dallas",
    "seattle",   "salt lake city", "atlanta", "pittsburgh",   "washington",  "st. louis",
    "las vegas", "miami",       "chicago",   "kansas city"};

Grammar compact_grammar() {
  Grammar g;
  const std::vector<std::string> cities = {"boston", "denver", "new york", "san francisco",
                                           "dallas", "salt lake city", "atlanta", "seattle"};
  g.slots["from"] = {"fromloc", cities};
  g.slots["to"] = {"toloc", cities};
  g.slots["date"] = {"date", {"today", "tomorrow", "monday", "next friday", "this weekend",
                              "the first of may"}};
  g.slots["airline"] = {"airline", {"delta", "united", "continental", "lufthansa"}};
  g.templates = {
      "show flights from {from} to {to} {date}",
      "i want to fly from {from} to {to}",
      "list {airline} flights from {from} to {to} on {date}",
      "what {airline} flights go to {to} from {from}",
      "flights to {to} from {from} {date}",
      "give me {airline} fares from {from} to {to}",
      "i need a flight {date} from {from} to {to} on {airline}",
      "which flights leave {from} {date} for {to}",
  };
  return g;
}

Grammar flights_grammar() {
  Grammar g;
  g.slots["from"] = {"fromloc.city_name", kCities};
  g.slots["to"] = {"toloc.city_name", kCities};
  g.slots["stop"] = {"stoploc.city_name", kCities};
  g.slots["day"] = {"depart_date.day_name",
                    {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"}};
  g.slots["rel"] = {"depart_date.date_relative", {"today", "tomorrow", "the day after tomorrow"}};
  g.slots["month"] = {"depart_date.month_name", {"january", "march", "june", "august", "december"}};
  g.slots["daynum"] = {"depart_date.day_number", {"first", "second", "fifth", "twelfth", "twenty first"}};
  g.slots["period"] = {"depart_time.period_of_day", {"morning", "afternoon", "evening", "early morning", "late night"}};
  g.slots["time"] = {"depart_time.time", {"5 pm", "8 am", "noon", "10 o'clock", "6 30 pm"}};
  g.slots["arrtime"] = {"arrive_time.time", {"5 pm", "9 am", "noon", "7 45 pm"}};
  g.slots["arrperiod"] = {"arrive_time.period_of_day", {"morning", "afternoon", "evening"}};
  g.slots["airline"] = {"airline_name", {"delta", "united", "american airlines", "us air", "continental", "alaska airlines"}};
  g.slots["class"] = {"class_type", {"first class", "economy", "business class", "coach"}};
  g.slots["trip"] = {"round_trip", {"round trip", "one way"}};
  g.slots["cost"] = {"cost_relative", {"cheapest", "lowest", "least expensive"}};
  g.slots["meal"] = {"meal_description", {"breakfast", "dinner", "lunch"}};
  g.slots["code"] = {"airline_code", {"ua", "dl", "aa", "co"}};
  g.slots["flightnum"] = {"flight_number", {"297", "1291", "83", "405", "21"}};
  g.slots["aircraft"] = {"aircraft_code", {"737", "m80", "d9s", "767"}};
  g.slots["transport"] = {"transport_type", {"limousine", "rental car", "taxi"}};
  g.templates = {
      "show me flights from {from} to {to} on {day}",
      "i want to fly from {from} to {to} {rel} {period}",
      "list {airline} flights from {from} to {to} leaving after {time}",
      "what are the {cost} fares from {from} to {to}",
      "i need a {trip} ticket to {to} from {from}",
      "show {class} flights to {to} from {from} on {month} {daynum}",
      "which flights from {from} to {to} stop in {stop}",
      "flights from {from} to {to} arriving before {arrtime}",
      "are there any {airline} flights {rel} from {from} to {to} with {meal}",
      "give me the {cost} {trip} fare from {from} to {to} on {airline}",
      "what {airline} flights leave {from} {day} {period} for {to}",
      "i would like a flight on {month} {daynum} from {from} to {to} in {class}",
      "does flight {code} {flightnum} from {from} to {to} serve {meal}",
      "what type of aircraft is used on the {time} flight from {from} to {to}",
      "is there {transport} service in {to}",
      "show flights between {from} and {to} that arrive in the {arrperiod}",
      "please list flights on {airline} from {from} to {to} via {stop} on {day}",
      "what flights use a {aircraft} from {from} to {to}",
      "how much does it cost to fly {class} from {from} to {to} {rel}",
      "find a {trip} flight leaving {from} at {time} going to {to}",
      "what ground transportation is available from the {from} airport",
      "on {day} i need to go from {from} to {to} in the {period}",
  };
  return g;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

ToyGrammar parse_grammar(std::string_view name) {
  if (name == "compact") return ToyGrammar::kCompact;
  if (name == "flights") return ToyGrammar::kFlights;
  throw ConfigError("unknown grammar '" + std::string(name) + "' (expected compact or flights)");
}

Corpus generate_corpus(ToyGrammar grammar, std::size_t sentences, std::uint64_t seed) {
  const Grammar g = grammar == ToyGrammar::kCompact ? compact_grammar() : flights_grammar();
  Rng rng = Rng(seed).stream("synthetic");
  Corpus corpus;
  corpus.reserve(sentences);
  std::size_t line = 1;
  for (std::size_t n = 0; n < sentences; ++n) {
    const std::string& tmpl = g.templates[rng.below(g.templates.size())];
    LabeledSentence s;
    s.line = line;
    std::string from_city;
    for (const std::string& piece : split_words(tmpl)) {
      if (piece.size() > 2 && piece.front() == '{' && piece.back() == '}') {
        const auto& [type, values] = g.slots.at(piece.substr(1, piece.size() - 2));
        std::string value = values[rng.below(values.size())];
        // Departure and arrival cities differ.
        if (piece == "{from}") from_city = value;
        while (piece == "{to}" && value == from_city) value = values[rng.below(values.size())];
        const auto words = split_words(value);
        for (std::size_t k = 0; k < words.size(); ++k) {
          s.sentence.tokens.push_back(words[k]);
          s.tags.tags.push_back((k == 0 ? "B-" : "I-") + type);
        }
      } else {
        s.sentence.tokens.push_back(piece);
        s.tags.tags.push_back("O");
      }
    }
    line += s.sentence.tokens.size() + 1;
    corpus.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace slotfill
