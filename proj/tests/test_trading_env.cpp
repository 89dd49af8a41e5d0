#include <doctest.h>

#include <cmath>

#include "qtmrl/indicators.hpp"
#include "qtmrl/trading_env.hpp"
#include "test_util.hpp"

using namespace qtmrl;
using namespace qtmrl::testutil;

namespace {

EnvConfig quick_config(int window = 1) {
    EnvConfig cfg;
    cfg.window = window;
    cfg.episode_length = 1000000;  // run to the end of the data
    return cfg;
}

FeatureFrame ohlcv_features(const MarketFrame& frame) {
    return build_feature_matrix(frame, {});
}

double portfolio_value(const TradingEnv& env) {
    double v = env.portfolio().cash;
    for (std::size_t i = 0; i < env.asset_count(); ++i) {
        v += static_cast<double>(env.portfolio().positions[i]) * env.close_price(i);
    }
    return v;
}

}  // namespace

TEST_CASE("decode_action bit semantics") {
    CHECK(decode_action(ActionCode{3}, 2) == std::vector<TradeOp>{TradeOp::Buy, TradeOp::Buy});
    CHECK(decode_action(ActionCode{0}, 2) == std::vector<TradeOp>{TradeOp::Sell, TradeOp::Sell});
    // Bit 0 is asset 0: 5 = 0101.
    CHECK(decode_action(ActionCode{5}, 4) ==
          std::vector<TradeOp>{TradeOp::Buy, TradeOp::Sell, TradeOp::Buy, TradeOp::Sell});
    // Exhaustive bit-decomposition cross-check.
    for (std::uint32_t code = 0; code < 16; ++code) {
        const auto ops = decode_action(ActionCode{code}, 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK((ops[i] == TradeOp::Buy) == (((code >> i) & 1u) == 1u));
        }
    }
    CHECK_THROWS_AS(decode_action(ActionCode{4}, 2), Error);
}

TEST_CASE("worked buy example: 10000 cash, price 100") {
    MarketFrame frame = growth_frame({"AAA"}, {1.0}, 10);
    TradingEnv env(quick_config(), &frame, nullptr);
    env.reset(0);
    StepResult r = env.step_ops({TradeOp::Buy});
    // budget 2000 -> 20 shares at 100 -> cost 2000, fee 1.00, cash 7999.00
    REQUIRE(r.info.trades.size() == 1);
    CHECK(r.info.trades[0].shares == 20);
    CHECK(r.info.trades[0].fee == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(env.portfolio().cash == doctest::Approx(7999.0).epsilon(1e-12));
    CHECK(env.portfolio().positions[0] == 20);
    CHECK(r.info.invalid_actions == 0);
    // Equity after the buy at unchanged prices: 7999 + 20*100 = 9999.
    CHECK(env.equity() == doctest::Approx(9999.0).epsilon(1e-12));
}

TEST_CASE("worked sell example: 50 shares at price 10") {
    MarketFrame frame = growth_frame({"AAA"}, {1.0}, 10);
    for (auto& bar : frame.series[0].bars) {
        bar.open = bar.high = bar.low = bar.close = 10.0;
    }
    // buy_fraction engineered so one buy yields exactly 50 shares.
    EnvConfig cfg = quick_config();
    cfg.buy_fraction = 0.05;  // 500 budget at price 10
    TradingEnv env(cfg, &frame, nullptr);
    env.reset(0);
    env.step_ops({TradeOp::Buy});
    REQUIRE(env.portfolio().positions[0] == 50);
    const double cash_before = env.portfolio().cash;
    StepResult r = env.step_ops({TradeOp::Sell});
    REQUIRE(r.info.trades.size() == 1);
    CHECK(r.info.trades[0].shares == 25);  // floor(50 * 0.5)
    CHECK(r.info.trades[0].fee == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(env.portfolio().cash == doctest::Approx(cash_before + 249.875).epsilon(1e-12));
    CHECK(env.portfolio().positions[0] == 25);
}

TEST_CASE("selling with no position is a quiet hold, not invalid") {
    MarketFrame frame = growth_frame({"AAA"}, {1.0}, 10);
    TradingEnv env(quick_config(), &frame, nullptr);
    env.reset(0);
    StepResult r = env.step_ops({TradeOp::Sell});
    CHECK(r.info.trades.empty());
    CHECK(r.info.invalid_actions == 0);
    CHECK(r.reward == doctest::Approx(0.0));  // prices unchanged, no penalty
}

TEST_CASE("unaffordable buy counts as invalid and is penalized") {
    MarketFrame frame = growth_frame({"AAA"}, {1.0}, 10);
    for (auto& bar : frame.series[0].bars) {
        bar.open = bar.high = bar.low = bar.close = 100.0;
    }
    EnvConfig cfg = quick_config();
    cfg.initial_capital = 50.0;  // budget 10 < one share at 100
    TradingEnv env(cfg, &frame, nullptr);
    env.reset(0);
    StepResult r = env.step_ops({TradeOp::Buy});
    CHECK(r.info.invalid_actions == 1);
    CHECK(env.portfolio().positions[0] == 0);
    CHECK(r.reward == doctest::Approx(-cfg.invalid_penalty));
}

TEST_CASE("reset boundaries and misuse") {
    MarketFrame frame = growth_frame({"AAA"}, {1.0}, 30);
    FeatureFrame features = ohlcv_features(frame);
    EnvConfig cfg = quick_config(20);
    TradingEnv env(cfg, &frame, &features);

    MarketState s = env.reset(19);  // first valid start for W = 20
    CHECK(s.t == 19);
    CHECK(s.window.size() == 20u * 1u * 5u);
    CHECK(env.equity() == doctest::Approx(10000.0));

    CHECK_THROWS_AS(env.reset(5), Error);

    while (!env.done()) env.step_ops({TradeOp::Sell});
    CHECK_THROWS_AS(env.step_ops({TradeOp::Sell}), Error);
}

TEST_CASE("observe is pure and slides with steps") {
    MarketFrame frame = growth_frame({"AAA"}, {1.001}, 40);
    FeatureFrame features = ohlcv_features(frame);
    TradingEnv env(quick_config(5), &frame, &features);
    env.reset(4);

    MarketState a = env.observe();
    MarketState b = env.observe();
    CHECK(a.window == b.window);
    CHECK(a.t == b.t);

    const double last_close_before = a.window[a.window.size() - 2];  // close of newest row
    env.step_ops({TradeOp::Sell});
    MarketState c = env.observe();
    CHECK(c.t == 5);
    // The newest row moved forward: the previous newest close is now the
    // second-newest close.
    CHECK(c.window[c.window.size() - 2 - 5] == last_close_before);
}

TEST_CASE("equity identity and conservation with zero fees") {
    MarketFrame frame = growth_frame({"AAA", "BBB"}, {1.0, 1.0}, 50);
    EnvConfig cfg = quick_config();
    cfg.fee_rate = 0.0;
    TradingEnv env(cfg, &frame, nullptr);
    env.reset(0);
    Rng rng(21);
    while (!env.done()) {
        env.step_ops(decode_action(ActionCode{static_cast<std::uint32_t>(rng.uniform_int(4))}, 2));
        CHECK(env.equity() == doctest::Approx(portfolio_value(env)).epsilon(1e-12));
    }
    // Constant prices, no fees: any action sequence conserves equity.
    CHECK(env.equity() == doctest::Approx(10000.0).epsilon(1e-9));
}

TEST_CASE("trajectories are deterministic given the action sequence") {
    Rng price_rng(22);
    MarketFrame frame = frame_from_closes(
        {"AAA", "BBB"}, {geometric_walk(price_rng, 80), geometric_walk(price_rng, 80)});
    auto run = [&frame]() {
        TradingEnv env(quick_config(), &frame, nullptr);
        env.reset(0, 42);
        Rng rng(42);
        std::vector<double> equities;
        while (!env.done()) {
            env.step_ops(
                decode_action(ActionCode{static_cast<std::uint32_t>(rng.uniform_int(4))}, 2));
            equities.push_back(env.equity());
        }
        return equities;
    };
    CHECK(run() == run());  // bit-identical
}

TEST_CASE("fees only ever reduce final equity") {
    Rng price_rng(23);
    MarketFrame frame = frame_from_closes({"AAA"}, {geometric_walk(price_rng, 120)});
    auto final_equity = [&frame](double fee_rate) {
        EnvConfig cfg = quick_config();
        cfg.fee_rate = fee_rate;
        TradingEnv env(cfg, &frame, nullptr);
        env.reset(0);
        Rng rng(7);
        while (!env.done()) {
            env.step_ops({rng.uniform() < 0.5 ? TradeOp::Buy : TradeOp::Sell});
        }
        return env.equity();
    };
    CHECK(final_equity(0.0005) <= final_equity(0.0));
}

TEST_CASE("a zero-fee replay of the executed trades recovers the fees paid") {
    Rng price_rng(26);
    MarketFrame frame = frame_from_closes(
        {"AAA", "BBB"}, {geometric_walk(price_rng, 150), geometric_walk(price_rng, 150)});
    TradingEnv env(quick_config(), &frame, nullptr);
    env.reset(0);
    Rng rng(8);
    while (!env.done()) {
        env.step_ops(decode_action(ActionCode{static_cast<std::uint32_t>(rng.uniform_int(4))}, 2));
    }
    double cash = env.config().initial_capital;
    std::vector<long long> pos(2, 0);
    double fees = 0.0;
    for (const TradeRecord& rec : env.trade_log()) {
        const std::size_t i = frame.ticker_index(rec.asset);
        if (rec.op == TradeOp::Buy) {
            cash -= static_cast<double>(rec.shares) * rec.price;
            pos[i] += rec.shares;
        } else {
            cash += static_cast<double>(rec.shares) * rec.price;
            pos[i] -= rec.shares;
        }
        fees += rec.fee;
    }
    double replay_equity = cash;
    for (std::size_t i = 0; i < 2; ++i) {
        replay_equity +=
            static_cast<double>(pos[i]) * frame.series[i].bars[env.current_index()].close;
    }
    CHECK(replay_equity == doctest::Approx(env.equity() + fees).epsilon(1e-12));
    CHECK(env.equity() <= replay_equity);
}

TEST_CASE("rewards telescope to the equity change") {
    Rng price_rng(24);
    MarketFrame frame = frame_from_closes(
        {"AAA", "BBB"}, {geometric_walk(price_rng, 100), geometric_walk(price_rng, 100)});
    EnvConfig cfg = quick_config();
    TradingEnv env(cfg, &frame, nullptr);
    env.reset(0);
    Rng rng(5);
    double reward_sum = 0.0;
    double penalty_sum = 0.0;
    const double start_equity = env.equity();
    while (!env.done()) {
        StepResult r = env.step_ops(
            decode_action(ActionCode{static_cast<std::uint32_t>(rng.uniform_int(4))}, 2));
        reward_sum += r.reward;
        penalty_sum += cfg.invalid_penalty * r.info.invalid_actions;
    }
    const double lhs = (reward_sum + penalty_sum) * cfg.initial_capital;
    const double rhs = env.equity() - start_equity;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("fuzz: accounting identity and nonnegativity under random actions") {
    Rng master(25);
    long long steps = 0;
    int config_round = 0;
    while (steps < 10000) {
        ++config_round;
        EnvConfig cfg = quick_config();
        cfg.fee_rate = master.uniform() * 0.01;
        cfg.buy_fraction = 0.05 + master.uniform() * 0.9;
        cfg.sell_fraction = 0.05 + master.uniform() * 0.9;
        cfg.initial_capital = 100.0 + master.uniform() * 50000.0;
        const std::size_t assets = 1 + master.uniform_int(3);
        std::vector<std::string> tickers;
        std::vector<Series> closes;
        for (std::size_t i = 0; i < assets; ++i) {
            tickers.push_back("T" + std::to_string(i));
            closes.push_back(geometric_walk(master, 60, 1.0 + master.uniform() * 500.0, 0.03));
        }
        MarketFrame frame = frame_from_closes(tickers, closes);
        TradingEnv env(cfg, &frame, nullptr);
        env.reset(0);
        while (!env.done()) {
            const std::uint32_t code =
                static_cast<std::uint32_t>(master.uniform_int(1ull << assets));
            env.step_ops(decode_action(ActionCode{code}, assets));
            ++steps;
            REQUIRE(env.portfolio().cash >= 0.0);
            for (long long pos : env.portfolio().positions) REQUIRE(pos >= 0);
            const double identity_gap = std::abs(env.equity() - portfolio_value(env));
            REQUIRE(identity_gap < 1e-9 * std::max(1.0, env.equity()));
        }
    }
    CHECK(config_round > 1);
}

TEST_CASE("trade log export carries the audit schema") {
    TempDir tmp("trades");
    MarketFrame frame = growth_frame({"AAA"}, {1.0}, 10);
    TradingEnv env(quick_config(), &frame, nullptr);
    env.reset(0);
    env.step_ops({TradeOp::Buy});
    env.step_ops({TradeOp::Sell});
    write_trade_log(env.trade_log(), tmp.path("trades.csv"));
    std::ifstream in(tmp.path("trades.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,date,asset,op,shares,price,fee,cash_after,equity_after");
    std::string row;
    std::getline(in, row);
    CHECK(row.find("buy") != std::string::npos);
    CHECK(row.find("AAA") != std::string::npos);
}
