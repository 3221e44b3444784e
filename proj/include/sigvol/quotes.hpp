#pragma once

#include <string>

#include "sigvol/calib.hpp"
#include "sigvol/config.hpp"

namespace sigvol {

inline constexpr const char* kQuoteHeader = "instrument,maturity,strike,bid,ask,iv_bid,iv_ask,future,rate,dividend";

// Reads a quote CSV. Rows with bid > ask (prices or vols) are dropped and reported in
// book.warnings with their line number; malformed rows or missing columns throw QuoteError.
QuoteBook ingest_quotes(const std::string& path);
QuoteBook parse_quotes(const std::string& text, const std::string& source = "<string>");

void write_quotes(const std::string& path, const QuoteBook& book);
std::string format_quotes(const QuoteBook& book);

// keeps quotes whose K/F lies in the configured moneyness range of their maturity
// (maturities without a configured range are kept)
QuoteBook filter_by_moneyness(const QuoteBook& book, const RunConfig& cfg);

// shortest round-trip decimal form
std::string fmt(double x);

}  // namespace sigvol
