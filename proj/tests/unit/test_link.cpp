#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "leo_madrl/link.hpp"

using namespace leo;

TEST_CASE("free space path loss") {
    CHECK(free_space_path_loss_db(1.0, 1.0) == doctest::Approx(92.45));
    CHECK(std::abs(free_space_path_loss_db(1000.0, 26.0) - 180.75) < 0.01);
    CHECK(std::abs(free_space_path_loss_db(2000.0, 26.0) - free_space_path_loss_db(1000.0, 26.0) - 6.0206) < 1e-4);
    CHECK_THROWS_AS(free_space_path_loss_db(0.0, 26.0), std::domain_error);
    CHECK_THROWS_AS(free_space_path_loss_db(10.0, -1.0), std::domain_error);
}

TEST_CASE("link snr") {
    LinkBudgetParams p{10.0, 30.0, 30.0, 26.0, 1e6, 290.0, 0.0};
    // term by term: 10 + 60 - fspl - (-228.6 + 10log10(290) + 60)
    const double fspl = 92.45 + 60.0 + 20.0 * std::log10(26.0);
    const double expected = 70.0 - fspl - (-228.6 + 10.0 * std::log10(290.0) + 60.0);
    CHECK(link_snr_db(p, 1000.0) == doctest::Approx(expected).epsilon(1e-12));
    // 70 - 180.75 - (-228.6 + 24.62 + 60)
    CHECK(std::abs(link_snr_db(p, 1000.0) - 33.23) < 0.05);
    CHECK(link_snr_db(p, 1500.0) < link_snr_db(p, 1000.0));
    LinkBudgetParams louder = p;
    louder.tx_power_dbw += 3.0;
    CHECK(link_snr_db(louder, 1000.0) - link_snr_db(p, 1000.0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("modcod selection") {
    const ModcodTable t = default_modcod_table();
    REQUIRE(t.rows().size() == 8);
    CHECK_FALSE(select_modcod(t, -2.36).has_value());
    CHECK(select_modcod(t, -2.35)->name == "QPSK-1/4");
    CHECK(select_modcod(t, 4.03)->name == "QPSK-3/4");
    CHECK(select_modcod(t, 4.02)->name == "QPSK-1/2");
    CHECK(select_modcod(t, 40.0)->name == t.rows().back().name);
    CHECK_THROWS_AS(select_modcod(ModcodTable{}, 3.0), std::invalid_argument);
    for (double snr = -5.0; snr < 20.0; snr += 0.01)
        if (auto r = select_modcod(t, snr)) CHECK(r->required_snr_db <= snr);
}

TEST_CASE("modcod table must be strictly increasing") {
    CHECK_THROWS_AS(ModcodTable(std::vector<ModcodRow>{}), std::invalid_argument);
    CHECK_THROWS_AS(ModcodTable({{"a", 1.0, 2.0}, {"b", 1.0, 3.0}}), std::invalid_argument);
    CHECK_THROWS_AS(ModcodTable({{"a", 1.0, 2.0}, {"b", 2.0, 2.0}}), std::invalid_argument);
    CHECK_NOTHROW(ModcodTable({{"a", 1.0, 2.0}, {"b", 2.0, 3.0}}));
}

TEST_CASE("edge data rate") {
    CHECK(edge_data_rate_bps({"x", 2.0, 0.0}, 1e8) == 2e8);
    CHECK(edge_data_rate_bps({"x", 0.5, 0.0}, 1e6) == 5e5);
}

TEST_CASE("rate never grows with distance") {
    const LinkBudgetParams isl;
    const ModcodTable t = default_modcod_table();
    double last = 1e300;
    for (double d = 100.0; d < 20000.0; d += 25.0) {
        const double r = link_data_rate_bps(isl, t, d).value_or(0.0);
        CHECK(r <= last);
        last = r;
    }
}
