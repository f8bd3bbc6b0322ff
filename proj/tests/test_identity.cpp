// Copyright 2026 the repsim authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <atomic>
#include <set>
#include <thread>

#include <catch2/catch_amalgamated.hpp>

#include "repsim/identity/authority.hpp"

using namespace repsim;
using namespace repsim::identity;

TEST_CASE("registration is unique per legal identity") {
    Authority auth(1);
    BusinessId b1 = auth.register_business("ACME");
    try {
        auth.register_business("ACME");
        FAIL("duplicate registration must fail");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::duplicate_registration);
    }
    BusinessId b2 = auth.register_business("BETA");
    CHECK(b1.id != b2.id);

    std::set<std::string> ids{b1.id, b2.id};
    for (int i = 0; i < 100; ++i) {
        ids.insert(auth.register_business("biz" + std::to_string(i)).id);
    }
    CHECK(ids.size() == 102);
}

TEST_CASE("pseudonyms are fresh, signed, and unlinkable in shape") {
    Authority auth(2);
    BusinessId b = auth.register_business("ACME");
    Pseudonym p1 = auth.issue_pseudonym(b, 0);
    Pseudonym p2 = auth.issue_pseudonym(b, 0);
    CHECK(p1.handle != p2.handle);
    CHECK(auth.verify_pseudonym(p1, 0));
    CHECK(auth.verify_pseudonym(p2, 0));

    Pseudonym forged = p1;
    forged.handle = "pn-0000000000000000000000000000dead";
    CHECK_FALSE(auth.verify_pseudonym(forged, 0));

    BusinessId ghost{"biz-doesnotexist", ""};
    CHECK_THROWS_AS(auth.issue_pseudonym(ghost, 0), Error);
}

TEST_CASE("pseudonym sweep: no collisions, no business-correlated structure") {
    Authority auth(3);
    std::vector<BusinessId> businesses;
    for (int i = 0; i < 10; ++i) businesses.push_back(auth.register_business("b" + std::to_string(i)));

    std::set<std::string> handles;
    std::array<int, 16> nibble_counts{};
    for (int k = 0; k < 1000; ++k) {
        Pseudonym p = auth.issue_pseudonym(businesses[k % 10], 0);
        CHECK(handles.insert(p.handle).second);
        // no handle may embed the owning business id
        CHECK(p.handle.find(businesses[k % 10].id) == std::string::npos);
        char first = p.handle[3]; // after the "pn-" prefix
        int v = first <= '9' ? first - '0' : first - 'a' + 10;
        nibble_counts[static_cast<size_t>(v)]++;
    }
    // loose uniformity smoke test on the first nibble (expected ~62.5 each)
    for (int count : nibble_counts) {
        CHECK(count > 20);
        CHECK(count < 140);
    }
    // no two handles share a long prefix
    std::set<std::string> prefixes;
    for (const auto& h : handles) CHECK(prefixes.insert(h.substr(0, 19)).second);
}

TEST_CASE("contracts issue one ticket per direction") {
    Authority auth(4);
    BusinessId a = auth.register_business("A");
    BusinessId b = auth.register_business("B");
    auto [t_ab, t_ba] = auth.establish_contract({a, b, "order-1", 5});
    CHECK(t_ab.contract_digest == t_ba.contract_digest);
    CHECK(t_ab.votee_pseudonym == auth.votee_anchor(b).handle);
    CHECK(t_ba.votee_pseudonym == auth.votee_anchor(a).handle);
    CHECK(t_ab.voter_pseudonym != t_ba.voter_pseudonym);

    try {
        auth.establish_contract({a, a, "self", 6});
        FAIL("self-contract must fail");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::self_contract);
    }

    auto [t2_ab, t2_ba] = auth.establish_contract({a, b, "order-2", 7});
    std::set<std::string> ids{t_ab.ticket_id, t_ba.ticket_id, t2_ab.ticket_id, t2_ba.ticket_id};
    CHECK(ids.size() == 4);
}

TEST_CASE("tickets are single use and expire") {
    AuthorityConfig cfg;
    Authority auth(5, cfg);
    BusinessId a = auth.register_business("A");
    BusinessId b = auth.register_business("B");
    auto [t_ab, t_ba] = auth.establish_contract({a, b, "order", 10});

    SessionAuthorization sa = auth.spend_ticket(t_ab.ticket_id, 11);
    CHECK(sa.votee_pseudonym == auth.votee_anchor(b).handle);
    try {
        auth.spend_ticket(t_ab.ticket_id, 12);
        FAIL("second spend must fail");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::already_spent);
    }

    // voter pseudonym outlives its validity window -> spend refused
    auto [t2, t2b] = auth.establish_contract({a, b, "order-2", 20});
    int64_t later = 20 + cfg.epoch_length * cfg.pseudonym_validity_epochs;
    try {
        auth.spend_ticket(t2.ticket_id, later);
        FAIL("expired pseudonym must be rejected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::expired_pseudonym);
    }

    // ticket recency window, isolated from pseudonym expiry
    AuthorityConfig wide;
    wide.pseudonym_validity_epochs = 1000000;
    Authority auth2(6, wide);
    BusinessId c = auth2.register_business("C");
    BusinessId d = auth2.register_business("D");
    auto [t3, t3b] = auth2.establish_contract({c, d, "order", 0});
    try {
        auth2.spend_ticket(t3.ticket_id, wide.ticket_validity_ticks + 1);
        FAIL("stale relationship must be rejected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::expired_ticket);
    }

    CHECK_THROWS_AS(auth.spend_ticket("tkt-missing", 0), Error);
}

TEST_CASE("concurrent spends: exactly one wins") {
    Authority auth(7);
    BusinessId a = auth.register_business("A");
    BusinessId b = auth.register_business("B");
    auto [ticket, unused] = auth.establish_contract({a, b, "order", 1});

    std::atomic<int> successes{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&] {
            try {
                auth.spend_ticket(ticket.ticket_id, 2);
                successes++;
            } catch (const Error&) {
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(successes.load() == 1);
}

TEST_CASE("access tokens are fresh and structurally unlinkable") {
    Authority auth(8);
    std::vector<BusinessId> businesses;
    for (int i = 0; i < 5; ++i) businesses.push_back(auth.register_business("b" + std::to_string(i)));

    std::set<std::string> tokens, refs;
    for (int k = 0; k < 1000; ++k) {
        const BusinessId& owner = businesses[static_cast<size_t>(k) % 5];
        Pseudonym p = auth.issue_pseudonym(owner, 0);
        auto minted = auth.mint_access_token(p, 0);
        CHECK(tokens.insert(minted.token.token_id).second);
        refs.insert(minted.token.bound_reputation_ref);
        CHECK(minted.anchor == auth.votee_anchor(owner).handle);
        // token value reveals nothing about the pseudonym or the business
        CHECK(minted.token.token_id.find(p.handle.substr(3)) == std::string::npos);
        CHECK(minted.token.token_id.find(owner.id.substr(4)) == std::string::npos);
        CHECK(minted.token.bound_reputation_ref.find(minted.anchor.substr(3)) == std::string::npos);
    }
    CHECK(refs.size() == 1000);

    // expired pseudonym cannot mint
    AuthorityConfig cfg;
    Pseudonym old = auth.issue_pseudonym(businesses[0], 0);
    int64_t later = cfg.epoch_length * cfg.pseudonym_validity_epochs;
    CHECK_THROWS_AS(auth.mint_access_token(old, later), Error);

    // unknown pseudonym cannot mint
    Pseudonym junk{"pn-ffffffffffffffffffffffffffffffff", 0, Bytes(64, 0)};
    try {
        auth.mint_access_token(junk, 0);
        FAIL("junk pseudonym must not mint");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_pseudonym);
    }
}

TEST_CASE("authority snapshot carries the secret mapping") {
    Authority auth(9);
    BusinessId a = auth.register_business("A");
    BusinessId b = auth.register_business("B");
    auth.establish_contract({a, b, "order", 1});
    Pseudonym p = auth.issue_pseudonym(a, 1);
    auth.mint_access_token(p, 1);
    auth.depart(b, 2);

    nlohmann::json snap = auth.snapshot();
    CHECK(snap.at("businesses").size() == 2);
    CHECK(snap.at("tickets").size() == 2);
    CHECK(snap.at("tokens").size() == 1);
    CHECK(snap.at("merged_pseudonym_and_ticket_issuer").get<bool>());
    bool saw_departed = false;
    for (const auto& biz : snap.at("businesses")) {
        if (biz.at("legal_identity") == "B") saw_departed = biz.at("departed").get<bool>();
    }
    CHECK(saw_departed);
}
