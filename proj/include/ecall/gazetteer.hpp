#pragma once

// Word lists backing the rule annotator. Lookups are on lowercase strings
// unless noted otherwise.

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace ecall::gazetteer {

using WordSet = std::unordered_set<std::string_view>;

inline const WordSet& first_names() {
  static const WordSet s = {
      "aaron", "adam", "alan", "albert", "alex", "alexander", "alice", "amy", "andrea", "andrew",
      "andy", "angela", "ann", "anna", "anne", "anthony", "ben", "benjamin", "beth", "bill",
      "bob", "brad", "brendan", "brent", "brett", "brian", "bruce", "carl", "carol", "caroline",
      "charles", "chris", "christina", "christine", "christopher", "chuck", "clay", "craig", "dan", "daniel",
      "dave", "david", "deborah", "dennis", "doug", "douglas", "ed", "edward", "elizabeth", "emily",
      "eric", "erik", "frank", "gary", "george", "greg", "gregory", "hannah", "harry", "heather",
      "henry", "ian", "jack", "jacob", "james", "jamie", "jane", "jason", "jay", "jeff",
      "jeffrey", "jennifer", "jessica", "jim", "joe", "john", "jon", "jonathan", "joseph", "josh",
      "julia", "julie", "justin", "karen", "kate", "katherine", "keith", "ken", "kevin", "kim",
      "larry", "laura", "lisa", "mark", "mary", "matt", "matthew", "megan", "michael", "michelle",
      "mike", "nancy", "nick", "nicholas", "patrick", "paul", "peter", "phil", "rachel", "ray",
      "rebecca", "richard", "rick", "rob", "robert", "ruth", "ryan", "sam", "samuel", "sandra",
      "sarah", "satya", "scott", "sean", "sheryl", "stephen", "steve", "steven", "sundar", "susan",
      "thomas", "tim", "timothy", "todd", "tom", "tony", "tyler", "victoria", "walter", "william",
  };
  return s;
}

inline const WordSet& person_titles() {
  static const WordSet s = {"mr.", "mrs.", "ms.", "dr.", "mr", "mrs", "ms", "dr"};
  return s;
}

inline const WordSet& org_suffixes() {
  static const WordSet s = {
      "inc",       "inc.",      "corp",       "corp.",     "corporation", "company",   "co.",
      "group",     "holdings",  "bank",       "partners",  "capital",     "securities", "llc",
      "ltd",       "ltd.",      "plc",        "technologies", "systems",  "airlines",  "motors",
      "energy",    "financial", "research",   "associates", "brothers",   "stanley",   "sachs",
      "bancorp",   "industries", "pharmaceuticals", "communications", "international", "trust",
  };
  return s;
}

/// Multi-word names are matched token by token against these (space joined).
inline const std::unordered_map<std::string_view, std::string_view>& places() {
  static const std::unordered_map<std::string_view, std::string_view> m = {
      {"u.s.", "GPE"},         {"us", "GPE"},          {"usa", "GPE"},          {"uk", "GPE"},
      {"u.k.", "GPE"},         {"america", "GPE"},     {"china", "GPE"},        {"japan", "GPE"},
      {"germany", "GPE"},      {"france", "GPE"},      {"india", "GPE"},        {"brazil", "GPE"},
      {"canada", "GPE"},       {"mexico", "GPE"},      {"russia", "GPE"},       {"korea", "GPE"},
      {"italy", "GPE"},        {"spain", "GPE"},       {"australia", "GPE"},    {"texas", "GPE"},
      {"california", "GPE"},   {"new york", "GPE"},    {"florida", "GPE"},      {"ohio", "GPE"},
      {"london", "GPE"},       {"chicago", "GPE"},     {"boston", "GPE"},       {"seattle", "GPE"},
      {"houston", "GPE"},      {"beijing", "GPE"},     {"shanghai", "GPE"},     {"tokyo", "GPE"},
      {"europe", "LOCATION"},  {"asia", "LOCATION"},   {"africa", "LOCATION"},  {"latin america", "LOCATION"},
      {"north america", "LOCATION"}, {"south america", "LOCATION"}, {"middle east", "LOCATION"},
      {"emea", "LOCATION"},    {"apac", "LOCATION"},   {"gulf of mexico", "LOCATION"},
  };
  return m;
}

inline const WordSet& nationalities() {
  static const WordSet s = {"american", "chinese", "european", "japanese", "german",  "french",
                            "british",  "indian",  "canadian", "mexican",  "russian", "korean",
                            "brazilian", "asian",  "democrat", "republican", "italian", "spanish"};
  return s;
}

/// Case-sensitive product names.
inline const WordSet& products() {
  static const WordSet s = {"iPhone", "iPad", "iPod", "Mac", "Windows", "Android", "Xbox",
                            "Kindle", "Prime", "Office", "Azure", "Excel", "Outlook", "Chrome",
                            "Pixel", "Galaxy", "PlayStation", "Alexa", "Echo", "Surface", "Viagra",
                            "Humira", "Lipitor", "Tylenol", "Model"};
  return s;
}

inline const WordSet& events() {
  static const WordSet s = {"olympics", "super bowl", "world cup", "brexit", "black friday",
                            "cyber monday", "ces", "thanksgiving", "expo", "summit", "hurricane"};
  return s;
}

inline const WordSet& facility_heads() {
  static const WordSet s = {"airport", "stadium", "plant", "refinery", "mall", "bridge", "hospital",
                            "terminal", "factory", "mine"};
  return s;
}

inline const std::unordered_map<std::string_view, int>& months() {
  static const std::unordered_map<std::string_view, int> m = {
      {"january", 1}, {"february", 2}, {"march", 3},     {"april", 4},    {"may", 5},
      {"june", 6},    {"july", 7},     {"august", 8},    {"september", 9}, {"october", 10},
      {"november", 11}, {"december", 12}, {"jan.", 1},  {"feb.", 2},     {"aug.", 8},
      {"sept.", 9},   {"sep.", 9},     {"oct.", 10},     {"nov.", 11},    {"dec.", 12}};
  return m;
}

inline const WordSet& weekdays() {
  static const WordSet s = {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
  return s;
}

inline const WordSet& scale_words() {
  static const WordSet s = {"thousand", "million", "billion", "trillion", "hundred", "mm", "bn"};
  return s;
}

inline const WordSet& quantity_units() {
  static const WordSet s = {"barrels", "barrel", "tons", "ton", "tonnes", "ounces", "ounce", "gallons",
                            "miles", "megawatts", "gigawatts", "acres", "pounds", "kilograms", "meters",
                            "feet", "bcf", "mmbtu", "boe", "units", "subscribers", "stores", "employees"};
  return s;
}

inline const WordSet& number_words() {
  static const WordSet s = {"one",   "two",   "three", "four",   "five",    "six",    "seven",
                            "eight", "nine",  "ten",   "eleven", "twelve",  "fifteen", "twenty",
                            "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
                            "dozen", "hundred", "thousand", "million", "billion", "trillion"};
  return s;
}

inline const WordSet& ordinal_words() {
  static const WordSet s = {"first", "second", "third",  "fourth", "fifth", "sixth", "seventh",
                            "eighth", "ninth", "tenth", "1st",    "2nd",   "3rd",   "4th"};
  return s;
}

inline const WordSet& period_nouns() {
  static const WordSet s = {"quarter", "quarters", "year", "years", "month", "months", "week", "weeks",
                            "half", "day", "days", "decade", "season", "period"};
  return s;
}

inline const WordSet& period_modifiers() {
  static const WordSet s = {"the",   "this",   "last", "next",     "that",     "prior",  "previous",
                            "past",  "coming", "full", "fiscal",   "current",  "same",   "first",
                            "second", "third", "fourth", "1st",    "2nd",      "3rd",    "4th",
                            "back",  "calendar", "latest", "recent", "following", "final", "early"};
  return s;
}

}  // namespace ecall::gazetteer
