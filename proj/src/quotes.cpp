#include "sigvol/quotes.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace sigvol {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) {
    auto b = cur.find_first_not_of(" \t\r");
    auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_num(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != e) throw QuoteError(where + ": not a number '" + s + "'");
  return v;
}

}  // namespace

QuoteBook parse_quotes(const std::string& text, const std::string& source) {
  QuoteBook book;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> col;
  bool header = false;
  static const char* names[] = {"instrument", "maturity", "strike", "bid",  "ask",
                                "iv_bid",     "iv_ask",   "future", "rate", "dividend"};
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto f = split(line);
    if (!header) {
      for (std::size_t i = 0; i < f.size(); ++i) col[f[i]] = i;
      for (const char* n : names)
        if (!col.count(n)) throw QuoteError(source + ": missing column '" + n + "'");
      header = true;
      continue;
    }
    const std::string where = source + ":" + std::to_string(lineno);
    if (f.size() != col.size()) throw QuoteError(where + ": expected " + std::to_string(col.size()) + " fields");
    Quote q;
    const std::string& ins = f[col["instrument"]];
    if (ins == "SPX" || ins == "spx")
      q.instrument = Instrument::SPX;
    else if (ins == "VIX" || ins == "vix")
      q.instrument = Instrument::VIX;
    else
      throw QuoteError(where + ": unknown instrument '" + ins + "'");
    q.maturity = to_num(f[col["maturity"]], where);
    q.strike = to_num(f[col["strike"]], where);
    q.bid = to_num(f[col["bid"]], where);
    q.ask = to_num(f[col["ask"]], where);
    q.iv_bid = to_num(f[col["iv_bid"]], where);
    q.iv_ask = to_num(f[col["iv_ask"]], where);
    q.future = to_num(f[col["future"]], where);
    q.rate = to_num(f[col["rate"]], where);
    q.dividend = to_num(f[col["dividend"]], where);
    q.line = lineno;
    if (!(q.maturity > 0) || !(q.strike > 0)) throw QuoteError(where + ": maturity and strike must be > 0");
    if (q.bid > q.ask || q.iv_bid > q.iv_ask) {
      book.warnings.push_back("line " + std::to_string(lineno) + ": rejected, bid > ask");
      continue;
    }
    book.quotes.push_back(q);
  }
  if (!header) book.warnings.push_back(source + ": empty quote file");
  return book;
}

QuoteBook ingest_quotes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw QuoteError("cannot open quote file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_quotes(ss.str(), path);
}

std::string format_quotes(const QuoteBook& book) {
  std::ostringstream os;
  os << kQuoteHeader << '\n';
  for (const auto& q : book.quotes)
    os << to_string(q.instrument) << ',' << fmt(q.maturity) << ',' << fmt(q.strike) << ',' << fmt(q.bid) << ','
       << fmt(q.ask) << ',' << fmt(q.iv_bid) << ',' << fmt(q.iv_ask) << ',' << fmt(q.future) << ',' << fmt(q.rate)
       << ',' << fmt(q.dividend) << '\n';
  return os.str();
}

void write_quotes(const std::string& path, const QuoteBook& book) {
  std::ofstream out(path);
  if (!out) throw QuoteError("cannot write " + path);
  out << format_quotes(book);
}

QuoteBook filter_by_moneyness(const QuoteBook& book, const RunConfig& cfg) {
  QuoteBook out;
  out.warnings = book.warnings;
  for (const auto& q : book.quotes) {
    const auto& ranges = q.instrument == Instrument::VIX ? cfg.vix_strikes : cfg.spx_strikes;
    const StrikeRange* r = nullptr;
    for (const auto& x : ranges)
      if (std::abs(x.maturity - q.maturity) < 1e-9) r = &x;
    if (!r || q.future <= 0) {
      out.quotes.push_back(q);
      continue;
    }
    const double m = q.strike / q.future;
    if (m >= r->lo - 1e-12 && m <= r->hi + 1e-12)
      out.quotes.push_back(q);
    else
      out.warnings.push_back("line " + std::to_string(q.line) + ": outside moneyness range, dropped");
  }
  return out;
}

}  // namespace sigvol
