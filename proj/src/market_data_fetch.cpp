#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "trendforge/error.hpp"
#include "trendforge/market_data.hpp"
#include "trendforge/numfmt.hpp"

namespace trendforge {

std::string default_api_base() {
    if (const char* env = std::getenv("TRENDFORGE_API_BASE"); env && *env) return env;
    return "https://api.binance.com";
}

namespace {

struct Endpoint {
    std::string host;    // scheme://host[:port]
    std::string prefix;  // optional path prefix, no trailing slash
};

Endpoint split_base(std::string base) {
    while (!base.empty() && base.back() == '/') base.pop_back();
    auto scheme = base.find("://");
    auto path_start = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) return {base, {}};
    return {base.substr(0, path_start), base.substr(path_start)};
}

double json_real(const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        if (auto r = parse_real(v.get_ref<const std::string&>())) return *r;
    }
    fail(ErrorKind::Parse, "malformed kline number");
}

std::int64_t json_int(const nlohmann::json& v) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) {
        if (auto r = parse_int(v.get_ref<const std::string&>())) return *r;
    }
    fail(ErrorKind::Parse, "malformed kline integer");
}

std::vector<Candle> decode_page(const std::string& body) {
    auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) fail(ErrorKind::Parse, "klines response is not a JSON array");
    std::vector<Candle> page;
    page.reserve(doc.size());
    for (const auto& row : doc) {
        if (!row.is_array() || row.size() < 11) fail(ErrorKind::Parse, "kline row has fewer than 11 fields");
        Candle c;
        c.open_time = json_int(row[0]);
        c.open = json_real(row[1]);
        c.high = json_real(row[2]);
        c.low = json_real(row[3]);
        c.close = json_real(row[4]);
        c.volume = json_real(row[5]);
        c.close_time = json_int(row[6]);
        c.quote_asset_volume = json_real(row[7]);
        c.num_trades = json_int(row[8]);
        c.taker_buy_base_volume = json_real(row[9]);
        c.taker_buy_quote_volume = json_real(row[10]);
        if (auto why = candle_violation(c); !why.empty())
            fail(ErrorKind::Validation, "kline at open_time " + std::to_string(c.open_time) + ": " + why);
        page.push_back(c);
    }
    return page;
}

}  // namespace

FetchResult fetch_klines(const std::string& symbol, std::int64_t interval_ms, EpochMs start, EpochMs end,
                         const FetchOptions& options) {
    const auto interval_name = interval_to_string(interval_ms);
    if (start > end) fail(ErrorKind::Parameter, "fetch range start must not exceed end");
    if (options.page_limit == 0 || options.max_attempts < 1) fail(ErrorKind::Parameter, "invalid fetch options");

    FetchResult result;
    result.series = CandleSeries({}, interval_ms);
    if (start == end) return result;

    auto sleep = options.sleep ? options.sleep : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    auto endpoint = split_base(options.base_url.empty() ? default_api_base() : options.base_url);
    httplib::Client client(endpoint.host);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    const std::string path = endpoint.prefix + "/api/v3/klines";

    std::vector<Candle> bars;
    EpochMs cursor = start;
    while (cursor < end) {
        httplib::Params params{{"symbol", symbol},
                               {"interval", interval_name},
                               {"startTime", std::to_string(cursor)},
                               {"endTime", std::to_string(end - 1)},
                               {"limit", std::to_string(options.page_limit)}};
        std::vector<Candle> page;
        std::string last_error;
        bool ok = false;
        for (int attempt = 1; attempt <= options.max_attempts && !ok; ++attempt) {
            ++result.requests;
            auto res = client.Get(path, params, httplib::Headers{});
            std::chrono::milliseconds wait = options.backoff_base * (1LL << (attempt - 1));
            if (!res) {
                last_error = "request failed: " + httplib::to_string(res.error());
            } else if (res->status == 429 || res->status == 418) {
                last_error = "rate limited (HTTP " + std::to_string(res->status) + ")";
                if (res->has_header("Retry-After")) {
                    if (auto secs = parse_int(res->get_header_value("Retry-After")))
                        wait = std::chrono::seconds(*secs);
                }
            } else if (res->status != 200) {
                last_error = "HTTP " + std::to_string(res->status);
            } else {
                page = decode_page(res->body);
                ok = true;
                break;
            }
            if (attempt < options.max_attempts) sleep(wait);
        }
        if (!ok) {
            if (bars.empty()) fail(ErrorKind::Network, "fetching klines failed after retries: " + last_error);
            result.complete = false;
            result.error = last_error;
            break;
        }
        if (page.empty()) break;
        for (auto& c : page) {
            if (c.open_time < cursor || c.open_time >= end) continue;
            if (!bars.empty() && c.open_time <= bars.back().open_time) {
                ++result.duplicates_dropped;
                continue;
            }
            bars.push_back(c);
        }
        const EpochMs next = page.back().open_time + interval_ms;
        if (next <= cursor) break;
        cursor = next;
    }
    result.series = CandleSeries(std::move(bars), interval_ms);
    result.missing = missing_open_times(result.series, start, end);
    return result;
}

}  // namespace trendforge
