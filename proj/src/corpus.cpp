#include "crowdsent/corpus.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <type_traits>
#include <unordered_set>

#include "crowdsent/error.hpp"
#include "crowdsent/text.hpp"

namespace crowdsent {

using nlohmann::json;

std::string_view to_string(Sentiment s) {
  return s == Sentiment::positive ? "pos" : "neg";
}

Sentiment parse_sentiment(std::string_view s) {
  if (s == "pos" || s == "positive") return Sentiment::positive;
  if (s == "neg" || s == "negative") return Sentiment::negative;
  throw DataError("invalid sentiment '" + std::string(s) +
                  "' (expected pos or neg)");
}

void EventRegistry::validate() const {
  if (participants.empty()) {
    throw DataError("registry '" + event_id + "' has no participants");
  }
  std::set<std::string_view> seen;
  for (const auto& p : participants) {
    if (p.empty()) throw DataError("registry '" + event_id + "' has an empty participant");
    if (!seen.insert(p).second) {
      throw DataError("registry '" + event_id + "' lists '" + p + "' twice");
    }
  }
}

std::optional<std::size_t> EventRegistry::index_of(std::string_view target) const {
  for (std::size_t i = 0; i < participants.size(); ++i) {
    if (participants[i] == target) return i;
  }
  return std::nullopt;
}

EventRegistry parse_registry(const json& j) {
  EventRegistry r;
  try {
    r.event_id = j.at("event_id").get<std::string>();
    r.participants = j.at("participants").get<std::vector<std::string>>();
    r.event_time = j.value("event_time", std::int64_t{0});
    if (j.contains("expert_announcement_time") &&
        !j.at("expert_announcement_time").is_null()) {
      r.expert_announcement_time =
          j.at("expert_announcement_time").get<std::int64_t>();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid registry: ") + e.what());
  }
  r.validate();
  return r;
}

json to_json(const EventRegistry& r) {
  json j = {{"event_id", r.event_id},
            {"participants", r.participants},
            {"event_time", r.event_time}};
  if (r.expert_announcement_time) {
    j["expert_announcement_time"] = *r.expert_announcement_time;
  }
  return j;
}

EventRegistry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open registry " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return parse_registry(j);
}

FileFormat detect_format(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::csv : FileFormat::jsonl;
}

namespace {

// One parsed input record, independent of file format.
struct Record {
  std::size_t line = 0;
  std::string id;
  std::int64_t ts = 0;
  std::string text;
  std::optional<bool> rt;
  std::optional<std::string> target;
  std::optional<std::string> sentiment;
};

[[noreturn]] void fail_at(std::size_t line, const std::string& msg) {
  throw DataError("line " + std::to_string(line) + ": " + msg);
}

Record record_from_json(const std::string& raw, std::size_t line) {
  json j;
  try {
    j = json::parse(raw);
  } catch (const json::exception& e) {
    fail_at(line, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) fail_at(line, "expected a JSON object");
  Record r;
  r.line = line;
  try {
    r.id = j.at("id").get<std::string>();
    r.ts = j.at("ts").get<std::int64_t>();
    r.text = j.at("text").get<std::string>();
    if (j.contains("rt") && !j["rt"].is_null()) r.rt = j["rt"].get<bool>();
    if (j.contains("target") && !j["target"].is_null()) {
      r.target = j["target"].get<std::string>();
    }
    if (j.contains("sentiment") && !j["sentiment"].is_null()) {
      r.sentiment = j["sentiment"].get<std::string>();
    }
  } catch (const json::exception& e) {
    fail_at(line, e.what());
  }
  return r;
}

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Returns false at end of input.
bool next_csv_record(std::istream& in, std::size_t& line,
                     std::vector<std::string>& fields, std::size_t& start_line) {
  fields.clear();
  int c = in.peek();
  if (c == EOF) return false;
  ++line;
  start_line = line;
  std::string field;
  bool quoted = false;
  bool any = false;
  while ((c = in.get()) != EOF) {
    any = true;
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      break;
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  if (quoted) fail_at(start_line, "unterminated quoted field");
  fields.push_back(std::move(field));
  return any;
}

std::vector<Record> read_records(std::istream& in, FileFormat format) {
  std::vector<Record> records;
  if (format == FileFormat::jsonl) {
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      if (raw.find_first_not_of(" \t") == std::string::npos) continue;
      records.push_back(record_from_json(raw, line));
    }
    return records;
  }

  std::size_t line = 0;
  std::size_t start = 0;
  std::vector<std::string> fields;
  if (!next_csv_record(in, line, fields, start)) return records;
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < fields.size(); ++i) column[fields[i]] = i;
  for (const char* required : {"id", "ts", "text"}) {
    if (!column.count(required)) {
      fail_at(start, std::string("CSV header lacks column '") + required + "'");
    }
  }
  auto cell = [&](const char* name) -> std::optional<std::string> {
    auto it = column.find(name);
    if (it == column.end() || it->second >= fields.size()) return std::nullopt;
    if (fields[it->second].empty()) return std::nullopt;
    return fields[it->second];
  };
  while (next_csv_record(in, line, fields, start)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != column.size()) {
      fail_at(start, "expected " + std::to_string(column.size()) +
                         " fields, found " + std::to_string(fields.size()));
    }
    Record r;
    r.line = start;
    r.id = cell("id").value_or("");
    r.text = cell("text").value_or("");
    const auto ts = cell("ts");
    if (!ts) fail_at(start, "missing ts");
    try {
      std::size_t used = 0;
      r.ts = std::stoll(*ts, &used);
      if (used != ts->size()) throw std::invalid_argument(*ts);
    } catch (const std::exception&) {
      fail_at(start, "ts is not an integer: '" + *ts + "'");
    }
    if (auto rt = cell("rt")) {
      if (*rt == "true" || *rt == "1") {
        r.rt = true;
      } else if (*rt == "false" || *rt == "0") {
        r.rt = false;
      } else {
        fail_at(start, "rt must be true/false, got '" + *rt + "'");
      }
    }
    r.target = cell("target");
    r.sentiment = cell("sentiment");
    records.push_back(std::move(r));
  }
  return records;
}

Tweet tweet_from(const Record& r) {
  if (r.id.empty()) fail_at(r.line, "empty id");
  Tweet t;
  t.id = r.id;
  t.timestamp = r.ts;
  t.text = r.text;
  t.is_retweet = r.rt.value_or(t.text.rfind("RT ", 0) == 0);
  return t;
}

}  // namespace

std::vector<Tweet> read_raw(std::istream& in, FileFormat format) {
  std::vector<Tweet> tweets;
  for (const auto& r : read_records(in, format)) tweets.push_back(tweet_from(r));
  return tweets;
}

std::vector<AnnotatedTweet> read_annotated(std::istream& in, FileFormat format,
                                           const EventRegistry& registry) {
  std::vector<AnnotatedTweet> tweets;
  for (const auto& r : read_records(in, format)) {
    AnnotatedTweet a;
    a.tweet = tweet_from(r);
    if (!r.target) fail_at(r.line, "missing target");
    if (!r.sentiment) fail_at(r.line, "missing sentiment");
    if (!registry.index_of(*r.target)) {
      fail_at(r.line, "unknown target '" + *r.target + "' for event '" +
                          registry.event_id + "'");
    }
    a.target = *r.target;
    try {
      a.sentiment = parse_sentiment(*r.sentiment);
    } catch (const DataError& e) {
      fail_at(r.line, e.what());
    }
    tweets.push_back(std::move(a));
  }
  return tweets;
}

Corpus load_corpus(const std::filesystem::path& path, Schema schema,
                   const EventRegistry& registry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus " + path.string());
  const auto format = detect_format(path);
  try {
    if (schema == Schema::raw) return read_raw(in, format);
    return read_annotated(in, format, registry);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

json to_json(const Tweet& t) {
  json j = {{"id", t.id}, {"ts", t.timestamp}, {"text", t.text}};
  if (t.is_retweet) j["rt"] = true;
  return j;
}

json to_json(const AnnotatedTweet& a) {
  json j = to_json(a.tweet);
  j["target"] = a.target;
  j["sentiment"] = std::string(to_string(a.sentiment));
  return j;
}

void write_jsonl(std::ostream& out, const std::vector<Tweet>& tweets) {
  for (const auto& t : tweets) out << to_json(t).dump() << '\n';
}

void write_jsonl(std::ostream& out, const std::vector<AnnotatedTweet>& tweets) {
  for (const auto& t : tweets) out << to_json(t).dump() << '\n';
}

// ---------------------------------------------------------------------------

namespace {

bool is_handle_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '_';
}

// One left-to-right pass of the mention pattern.
std::size_t replace_mentions_once(std::string& s) {
  std::string out;
  out.reserve(s.size());
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '@' && i + 1 < s.size() && is_handle_char(s[i + 1])) {
      std::size_t j = i + 1;
      while (j < s.size() && j - i <= 15 && is_handle_char(s[j])) ++j;
      out += "USER";
      ++count;
      i = j;
    } else {
      out.push_back(s[i++]);
    }
  }
  s = std::move(out);
  return count;
}

std::size_t replace_urls(std::string& s) {
  std::string out;
  out.reserve(s.size());
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size();) {
    const std::string_view rest(s.data() + i, s.size() - i);
    std::size_t scheme = 0;
    if (rest.starts_with("http://")) {
      scheme = 7;
    } else if (rest.starts_with("https://")) {
      scheme = 8;
    }
    if (scheme == 0) {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t j = i + scheme;
    while (j < s.size() && !text::is_ascii_space(s[j])) ++j;
    out += "URL";
    ++count;
    i = j;
  }
  s = std::move(out);
  return count;
}

std::size_t collapse_repeats(std::string& s) {
  std::string out;
  out.reserve(s.size());
  std::size_t runs = 0;
  for (std::size_t i = 0; i < s.size();) {
    const auto cp = text::decode_utf8(s, i);
    const std::string_view unit(s.data() + i, cp.length);
    std::size_t j = i + cp.length;
    std::size_t n = 1;
    if (text::is_letter(cp.value)) {
      while (j + cp.length <= s.size() &&
             std::string_view(s.data() + j, cp.length) == unit) {
        j += cp.length;
        ++n;
      }
    }
    const std::size_t keep = n > 3 ? 3 : n;
    if (n > 3) ++runs;
    for (std::size_t k = 0; k < keep; ++k) out.append(unit);
    i = j;
  }
  s = std::move(out);
  return runs;
}

}  // namespace

CleanResult clean_tweet_counted(std::string_view text) {
  CleanResult r;
  r.text = std::string(text);
  while (const auto n = replace_mentions_once(r.text)) r.mentions += n;
  r.urls = replace_urls(r.text);
  r.collapsed_runs = collapse_repeats(r.text);
  return r;
}

std::string clean_tweet(std::string_view text) {
  return clean_tweet_counted(text).text;
}

std::size_t CleanReport::total_dropped() const {
  return empty_dropped + multi_sentiment_records_dropped + retweets_dropped +
         duplicates_dropped;
}

CleanReport& CleanReport::operator+=(const CleanReport& o) {
  mentions_replaced += o.mentions_replaced;
  urls_replaced += o.urls_replaced;
  repeats_collapsed += o.repeats_collapsed;
  empty_dropped += o.empty_dropped;
  multi_sentiment_dropped += o.multi_sentiment_dropped;
  multi_sentiment_records_dropped += o.multi_sentiment_records_dropped;
  retweets_dropped += o.retweets_dropped;
  duplicates_dropped += o.duplicates_dropped;
  return *this;
}

json to_json(const CleanReport& r) {
  return {{"mentions_replaced", r.mentions_replaced},
          {"urls_replaced", r.urls_replaced},
          {"repeats_collapsed", r.repeats_collapsed},
          {"empty_dropped", r.empty_dropped},
          {"multi_sentiment_dropped", r.multi_sentiment_dropped},
          {"multi_sentiment_records_dropped", r.multi_sentiment_records_dropped},
          {"retweets_dropped", r.retweets_dropped},
          {"duplicates_dropped", r.duplicates_dropped},
          {"total_dropped", r.total_dropped()}};
}

bool is_retweet(const Tweet& t) {
  return t.is_retweet || t.text.rfind("RT ", 0) == 0;
}

namespace {

template <typename T>
auto& tweet_of(T& item) {
  if constexpr (std::is_same_v<std::remove_const_t<T>, Tweet>) {
    return item;
  } else {
    return item.tweet;
  }
}

// Filters shared by both schemas: retweets, then duplicate cleaned texts.
template <typename T>
std::vector<T> drop_retweets_and_duplicates(std::vector<T> items,
                                            CleanReport& report) {
  std::vector<T> out;
  out.reserve(items.size());
  std::unordered_set<std::string> seen;
  for (auto& item : items) {
    const Tweet& t = tweet_of(item);
    if (is_retweet(t)) {
      ++report.retweets_dropped;
      continue;
    }
    if (!seen.insert(clean_tweet(t.text)).second) {
      ++report.duplicates_dropped;
      continue;
    }
    out.push_back(std::move(item));
  }
  return out;
}

template <typename T>
std::vector<T> clean_texts(std::vector<T> items, CleanReport& report) {
  std::vector<T> out;
  out.reserve(items.size());
  for (auto& item : items) {
    Tweet& t = tweet_of(item);
    auto cleaned = clean_tweet_counted(t.text);
    report.mentions_replaced += cleaned.mentions;
    report.urls_replaced += cleaned.urls;
    report.repeats_collapsed += cleaned.collapsed_runs;
    if (cleaned.text.find_first_not_of(" \t\r\n\f\v") == std::string::npos) {
      ++report.empty_dropped;
      continue;
    }
    // Retweet status is decided on the original text.
    t.is_retweet = is_retweet(t);
    t.text = std::move(cleaned.text);
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace

std::pair<std::vector<AnnotatedTweet>, CleanReport> filter_corpus(
    std::vector<AnnotatedTweet> tweets) {
  CleanReport report;

  std::map<std::string, std::set<std::pair<std::string, Sentiment>>> pairs_by_id;
  for (const auto& a : tweets) pairs_by_id[a.tweet.id].emplace(a.target, a.sentiment);

  std::vector<AnnotatedTweet> kept;
  kept.reserve(tweets.size());
  for (auto& a : tweets) {
    if (pairs_by_id[a.tweet.id].size() > 1) {
      ++report.multi_sentiment_records_dropped;
      continue;
    }
    kept.push_back(std::move(a));
  }
  for (const auto& [id, pairs] : pairs_by_id) {
    if (pairs.size() > 1) ++report.multi_sentiment_dropped;
  }

  auto out = drop_retweets_and_duplicates(std::move(kept), report);
  return {std::move(out), report};
}

std::pair<std::vector<Tweet>, CleanReport> filter_corpus(std::vector<Tweet> tweets) {
  CleanReport report;
  auto out = drop_retweets_and_duplicates(std::move(tweets), report);
  return {std::move(out), report};
}

std::pair<std::vector<AnnotatedTweet>, CleanReport> preprocess(
    std::vector<AnnotatedTweet> tweets) {
  CleanReport report;
  auto cleaned = clean_texts(std::move(tweets), report);
  auto [out, filtered] = filter_corpus(std::move(cleaned));
  report += filtered;
  return {std::move(out), report};
}

std::pair<std::vector<Tweet>, CleanReport> preprocess(std::vector<Tweet> tweets) {
  CleanReport report;
  auto cleaned = clean_texts(std::move(tweets), report);
  auto [out, filtered] = filter_corpus(std::move(cleaned));
  report += filtered;
  return {std::move(out), report};
}

}  // namespace crowdsent
