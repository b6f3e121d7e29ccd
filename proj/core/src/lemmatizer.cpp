#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "tutor/wordbank.hpp"

namespace tutor::wordbank {
namespace {

// Irregular inflections, contraction heads and a few forms the suffix rules
// get wrong. Every value must itself be a fixed point of the rules.
const std::unordered_map<std::string_view, std::string_view>& irregular_forms() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      // be / have / do / go
      {"am", "be"}, {"is", "be"}, {"are", "be"}, {"was", "be"}, {"were", "be"}, {"been", "be"}, {"being", "be"},
      {"has", "have"}, {"had", "have"}, {"having", "have"},
      {"does", "do"}, {"did", "do"}, {"done", "do"},
      {"goes", "go"}, {"went", "go"}, {"gone", "go"},
      // contraction heads (tokenizer keeps the part before the apostrophe)
      {"don", "do"}, {"doesn", "do"}, {"didn", "do"}, {"isn", "be"}, {"aren", "be"}, {"wasn", "be"},
      {"weren", "be"}, {"ain", "be"}, {"hasn", "have"}, {"haven", "have"}, {"hadn", "have"},
      {"couldn", "could"}, {"shouldn", "should"}, {"wouldn", "would"}, {"mustn", "must"}, {"needn", "need"},
      {"shan", "shall"},
      // irregular verbs
      {"arose", "arise"}, {"arisen", "arise"}, {"awoke", "awake"}, {"awoken", "awake"},
      {"bore", "bear"}, {"born", "bear"}, {"borne", "bear"}, {"beaten", "beat"},
      {"became", "become"}, {"began", "begin"}, {"begun", "begin"}, {"bent", "bend"}, {"bound", "bind"},
      {"bit", "bite"}, {"bitten", "bite"}, {"bled", "bleed"}, {"blew", "blow"}, {"blown", "blow"},
      {"broke", "break"}, {"broken", "break"}, {"bred", "breed"}, {"brought", "bring"}, {"built", "build"},
      {"burnt", "burn"}, {"bought", "buy"}, {"caught", "catch"}, {"chose", "choose"}, {"chosen", "choose"},
      {"clung", "cling"}, {"came", "come"}, {"crept", "creep"}, {"dealt", "deal"}, {"dug", "dig"},
      {"drew", "draw"}, {"drawn", "draw"}, {"dreamt", "dream"}, {"drank", "drink"}, {"drunk", "drink"},
      {"drove", "drive"}, {"driven", "drive"}, {"ate", "eat"}, {"eaten", "eat"}, {"fell", "fall"},
      {"fallen", "fall"}, {"fed", "feed"}, {"felt", "feel"}, {"fought", "fight"}, {"found", "find"},
      {"fled", "flee"}, {"flung", "fling"}, {"flew", "fly"}, {"flown", "fly"}, {"forbade", "forbid"},
      {"forbidden", "forbid"}, {"forgot", "forget"}, {"forgotten", "forget"}, {"forgave", "forgive"},
      {"forgiven", "forgive"}, {"froze", "freeze"}, {"frozen", "freeze"}, {"got", "get"}, {"gotten", "get"},
      {"gave", "give"}, {"given", "give"}, {"grew", "grow"}, {"grown", "grow"}, {"hung", "hang"},
      {"heard", "hear"}, {"hid", "hide"}, {"hidden", "hide"}, {"held", "hold"}, {"kept", "keep"},
      {"knelt", "kneel"}, {"knew", "know"}, {"known", "know"}, {"laid", "lay"}, {"led", "lead"},
      {"leant", "lean"}, {"leapt", "leap"}, {"learnt", "learn"}, {"left", "leave"}, {"lent", "lend"},
      {"lain", "lie"}, {"lit", "light"}, {"lost", "lose"}, {"made", "make"}, {"meant", "mean"},
      {"met", "meet"}, {"mistook", "mistake"}, {"mistaken", "mistake"}, {"overcame", "overcome"},
      {"paid", "pay"}, {"rode", "ride"}, {"ridden", "ride"}, {"rang", "ring"}, {"rung", "ring"},
      {"rose", "rise"}, {"risen", "rise"}, {"ran", "run"}, {"said", "say"}, {"saw", "see"}, {"seen", "see"},
      {"sought", "seek"}, {"sold", "sell"}, {"sent", "send"}, {"shook", "shake"}, {"shaken", "shake"},
      {"shone", "shine"}, {"shot", "shoot"}, {"shown", "show"}, {"shrank", "shrink"}, {"shrunk", "shrink"},
      {"sang", "sing"}, {"sung", "sing"}, {"sank", "sink"}, {"sunk", "sink"}, {"sat", "sit"},
      {"slept", "sleep"}, {"slid", "slide"}, {"spoke", "speak"}, {"spoken", "speak"}, {"spent", "spend"},
      {"spun", "spin"}, {"sprang", "spring"}, {"sprung", "spring"}, {"stood", "stand"}, {"stole", "steal"},
      {"stolen", "steal"}, {"stuck", "stick"}, {"stung", "sting"}, {"stank", "stink"}, {"struck", "strike"},
      {"swore", "swear"}, {"sworn", "swear"}, {"swept", "sweep"}, {"swam", "swim"}, {"swum", "swim"},
      {"swung", "swing"}, {"took", "take"}, {"taken", "take"}, {"taught", "teach"}, {"tore", "tear"},
      {"torn", "tear"}, {"told", "tell"}, {"thought", "think"}, {"threw", "throw"}, {"thrown", "throw"},
      {"understood", "understand"}, {"undertook", "undertake"}, {"undertaken", "undertake"},
      {"withdrew", "withdraw"}, {"withdrawn", "withdraw"}, {"woke", "wake"}, {"woken", "wake"},
      {"wore", "wear"}, {"worn", "wear"}, {"wept", "weep"}, {"won", "win"}, {"wrote", "write"},
      {"written", "write"}, {"focused", "focus"}, {"focusing", "focus"}, {"focuses", "focus"},
      // irregular plurals and comparatives
      {"children", "child"}, {"men", "man"}, {"women", "woman"}, {"feet", "foot"}, {"teeth", "tooth"},
      {"mice", "mouse"}, {"geese", "goose"}, {"knives", "knife"}, {"wives", "wife"}, {"lives", "live"},
      {"leaves", "leave"}, {"wolves", "wolf"}, {"halves", "half"}, {"shelves", "shelf"},
      {"thieves", "thief"}, {"loaves", "loaf"}, {"selves", "self"}, {"better", "good"}, {"best", "good"},
      {"worse", "bad"}, {"worst", "bad"},
  };
  return table;
}

// Words whose endings look like inflections but are not.
const std::unordered_set<std::string_view>& uninflected() {
  static const std::unordered_set<std::string_view> words = {
      "this", "his", "its", "yes", "thus", "plus", "bus", "gas", "bias", "atlas", "canvas", "alias", "whereas",
      "always", "perhaps", "news", "series", "species", "lens", "christmas", "afterwards", "towards",
      "sometimes", "besides", "nevertheless", "physics", "mathematics", "economics", "politics", "ethics",
      "athletics", "linguistics", "during", "morning", "evening", "ceiling", "pudding", "wedding", "darling",
      "sibling", "need", "feed", "seed", "speed", "bleed", "breed", "deed", "weed", "greed", "reed", "heed",
      "indeed", "proceed", "succeed", "exceed", "steed", "hundred", "sacred", "naked", "wicked", "kindred",
      "beloved", "bed", "red", "shed", "wed",
  };
  return words;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }
bool is_consonant(char c) { return c >= 'a' && c <= 'z' && !is_vowel(c); }
bool has_vowel_or_y(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}
bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Number of maximal vowel runs, a rough syllable count.
int vowel_groups(std::string_view s) {
  int groups = 0;
  bool in_group = false;
  for (char c : s) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  return groups;
}

// consonant, single vowel, consonant (not w/x/y) at the end of the stem
bool ends_cvc(std::string_view s) {
  if (s.size() < 3) return false;
  const char c1 = s[s.size() - 3], v = s[s.size() - 2], c2 = s.back();
  return is_consonant(c1) && is_vowel(v) && is_consonant(c2) && c2 != 'w' && c2 != 'x' && c2 != 'y';
}

// Restores the silent e dropped before -ing / -ed.
bool needs_final_e(std::string_view stem) {
  const std::size_t n = stem.size();
  if (n < 2) return false;
  const char last = stem[n - 1];
  const char prev = stem[n - 2];
  const int groups = vowel_groups(stem);

  if (n == 2) return is_vowel(prev) && is_consonant(last) && last != 'w' && last != 'x' && last != 'y';
  if (last == 'u') return true;                                      // continu-, argu-
  if (last == 'v' || last == 'z') return prev != last;               // solv-, realiz-
  if (last == 'c') return true;                                      // danc-, produc-
  if (last == 's') return prev != 's';                               // caus-, sens-, clos-
  if (last == 'l') return is_consonant(prev) && prev != 'l';         // enabl-, troubl-
  if (last == 'g') {
    if (prev == 'd' || prev == 'r') return true;                     // judg-, charg-
    if (ends_with(stem, "eng")) return true;                          // challeng-
    if (ends_with(stem, "ang")) return n >= 5;                        // chang-, arrang-
    if (prev == 'a' && groups >= 2 && is_consonant(stem[n - 3])) return true;  // manag-
  }
  if (ends_with(stem, "creat")) return true;
  if (ends_with(stem, "com")) return true;                           // becom-, welcom-
  if (prev == 'a' && last == 't' && groups >= 2) {                   // educat-, graduat-
    const char before = stem[n - 3];
    return is_consonant(before) || before == 'u' || before == 'i';
  }
  if ((prev == 'i' || prev == 'u') && last == 'd' && groups >= 2) return is_consonant(stem[n - 3]);  // provid-
  if (prev == 'i' && last == 'r') return true;                       // requir-, inspir-
  if (prev == 'u' && last == 'r') return is_consonant(stem[n - 3]);  // ensur-, measur-
  if (prev == 'a' && last == 'r') return is_consonant(stem[n - 3]);  // compar-, shar-
  if (prev == 'i' && last == 'n') return is_consonant(stem[n - 3]);  // combin-, determin-
  if (prev == 'u' && last == 'm' && groups >= 2) return is_consonant(stem[n - 3]);  // assum-
  if (ends_with(stem, "let") && groups >= 2 && is_consonant(stem[n - 4])) return true;  // complet-
  return groups == 1 && ends_cvc(stem);                                // mak-, hop-, writ-
}

// Undoes consonant doubling before -ing / -ed (running, stopped, travelled).
bool undouble(std::string& stem) {
  const std::size_t n = stem.size();
  if (n < 3 || stem[n - 1] != stem[n - 2] || !is_consonant(stem.back())) return false;
  const char c = stem.back();
  if (c == 's' || c == 'z' || c == 'f') return false;
  const std::string shorter = stem.substr(0, n - 1);
  if (c == 'l') {
    if (vowel_groups(shorter) < 2 || !ends_cvc(shorter)) return false;
  } else if (!ends_cvc(shorter)) {
    return false;
  }
  stem = shorter;
  return true;
}

std::string verb_stem(std::string stem) {
  if (undouble(stem)) return stem;
  if (stem.size() == 2 && is_consonant(stem[0]) && stem[1] == 'y') return std::string(1, stem[0]) + "ie";  // dying
  if (needs_final_e(stem)) stem.push_back('e');
  return stem;
}

std::string strip_ing(const std::string& w) {
  std::string stem = w.substr(0, w.size() - 3);
  if (stem.size() < 2 || !has_vowel_or_y(stem) || ends_with(w, "thing")) return w;
  return verb_stem(std::move(stem));
}

std::string strip_ed(const std::string& w) {
  if (ends_with(w, "ied")) {
    if (w.size() <= 4) return w.substr(0, w.size() - 1);  // died, tied
    return w.substr(0, w.size() - 3) + "y";
  }
  std::string stem = w.substr(0, w.size() - 2);
  if (stem.size() < 2 || !has_vowel_or_y(stem)) return w;
  if (stem.back() == 'e') return w.substr(0, w.size() - 1);  // agreed, freed
  if (stem.back() == 'o') return stem;  // echoed
  return verb_stem(std::move(stem));
}

std::string strip_s(const std::string& w) {
  if (w.size() < 3) return w;
  if (ends_with(w, "ies")) {
    if (w.size() <= 4) return w.substr(0, w.size() - 1);  // lies, ties
    return w.substr(0, w.size() - 3) + "y";
  }
  if (ends_with(w, "sses") || ends_with(w, "shes") || ends_with(w, "ches") || ends_with(w, "xes") ||
      ends_with(w, "zzes")) {
    return w.substr(0, w.size() - 2);
  }
  if (ends_with(w, "oes")) {
    if (w.size() >= 6) return w.substr(0, w.size() - 2);  // potatoes, heroes
    return w.substr(0, w.size() - 1);                      // shoes, toes
  }
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return w;
  return w.substr(0, w.size() - 1);
}

std::string lemma_step(const std::string& w) {
  if (const auto it = irregular_forms().find(w); it != irregular_forms().end()) return std::string(it->second);
  if (uninflected().contains(w)) return w;
  if (ends_with(w, "ing") && w.size() >= 5) return strip_ing(w);
  if (ends_with(w, "ed") && w.size() >= 4) return strip_ed(w);
  if (ends_with(w, "s")) return strip_s(w);
  return w;
}

bool ascii_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Length of a UTF-8 sequence that should be treated as punctuation, or 0.
std::size_t utf8_punct_len(std::string_view s, std::size_t i) {
  if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 && static_cast<unsigned char>(s[i + 1]) == 0x80) {
    const auto c = static_cast<unsigned char>(s[i + 2]);
    // U+2010..U+2027 (dashes, quotes, bullets, ellipsis) and U+2030..U+205E
    if (c >= 0x90 && c <= 0xBF) return 3;
  }
  if (i + 1 < s.size() && static_cast<unsigned char>(s[i]) == 0xC2) {
    const auto c = static_cast<unsigned char>(s[i + 1]);
    if (c >= 0xA0 && c <= 0xBF) return 2;  // nbsp, inverted marks, guillemets
  }
  return 0;
}

bool is_curly_apostrophe(std::string_view s, std::size_t i) {
  return i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
         static_cast<unsigned char>(s[i + 1]) == 0x80 &&
         (static_cast<unsigned char>(s[i + 2]) == 0x98 || static_cast<unsigned char>(s[i + 2]) == 0x99);
}

// Byte length of the letter starting at i, or 0 if it is not a letter.
std::size_t letter_len(std::string_view s, std::size_t i) {
  if (i >= s.size()) return 0;
  const auto c = static_cast<unsigned char>(s[i]);
  if (ascii_alpha(c)) return 1;
  if (c < 0x80) return 0;
  if (utf8_punct_len(s, i) > 0) return 0;
  std::size_t len = (c >= 0xF0) ? 4 : (c >= 0xE0) ? 3 : (c >= 0xC0) ? 2 : 1;
  return std::min(len, s.size() - i);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  bool truncated = false;  // past an apostrophe; letters are consumed but not kept
  bool last_was_letter = false;
  std::size_t i = 0;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
    truncated = false;
    last_was_letter = false;
  };
  while (i < text.size()) {
    if (const std::size_t n = letter_len(text, i); n > 0) {
      if (!truncated) current.append(text.substr(i, n));
      last_was_letter = true;
      i += n;
      continue;
    }
    const bool apostrophe = text[i] == '\'' || is_curly_apostrophe(text, i);
    const std::size_t width = is_curly_apostrophe(text, i) ? 3 : 1;
    if ((apostrophe || text[i] == '-') && last_was_letter && letter_len(text, i + width) > 0) {
      if (apostrophe) {
        truncated = true;
      } else if (!truncated) {
        current.push_back('-');
      }
      last_was_letter = false;
      i += width;
      continue;
    }
    flush();
    const std::size_t p = utf8_punct_len(text, i);
    i += p > 0 ? p : 1;
  }
  flush();
  return tokens;
}

namespace {

std::string lemmatize_once(std::string_view token) {
  std::size_t begin = 0, end = token.size();
  while (begin < end && letter_len(token, begin) == 0) {
    const std::size_t p = utf8_punct_len(token, begin);
    begin += p > 0 ? p : 1;
  }
  while (end > begin) {
    std::size_t start = end - 1;
    while (start > begin && (static_cast<unsigned char>(token[start]) & 0xC0) == 0x80) --start;
    if (letter_len(token, start) > 0) break;
    end = start;
  }
  std::string word(token.substr(begin, end - begin));
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i] == '\'' || is_curly_apostrophe(word, i)) {
      word.resize(i);
      break;
    }
  }
  std::transform(word.begin(), word.end(), word.begin(),
                 [](unsigned char c) { return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c); });
  if (word.empty()) return word;

  // Each step either hits the irregular table (whose values are fixed points)
  // or shortens the word, so the loop terminates.
  for (int i = 0; i < 8; ++i) {
    std::string next = lemma_step(word);
    if (next == word) break;
    word = std::move(next);
  }
  return word;
}

}  // namespace

std::string lemmatize(std::string_view token) {
  // Stripping a suffix can expose edge punctuation ("a,b=s" -> "a,b="), so
  // repeat until the output maps to itself. Irregular forms land on fixed
  // points and every other change shortens the word.
  std::string word = lemmatize_once(token);
  for (;;) {
    std::string next = lemmatize_once(word);
    if (next == word) return word;
    word = std::move(next);
  }
}

}  // namespace tutor::wordbank
