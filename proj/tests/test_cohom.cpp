#include "pscur/cohom.hpp"

#include <doctest.h>

using namespace pscur::cohom;

TEST_CASE("all shipped integer identities hold with zero tolerance") {
    auto checks = verify_all();
    CHECK(checks.size() > 20);
    for (const auto& c : checks) {
        INFO(c.name);
        CHECK(c.pass);
    }
}

TEST_CASE("P2 chern class matches the euler-sequence expansion") {
    const Ring& p2 = ring_Pn(2);
    CHECK(p2.chern_total() == p2.cls({1, 3, 3}));
    CHECK((p2.chern_total() * p2.segre_total()) == p2.unit());
}

TEST_CASE("product model chern class is multiplicative") {
    const Ring& q = ring_PmxPn(1, 1);
    // c(P1 x P1) = (1 + 2h1)(1 + 2h2) = 1 + 2h1 + 2h2 + 4h1h2
    CHECK(q.chern_total() == q.cls({1, 2, 2, 4}));
}

TEST_CASE("gysin class instances") {
    const auto& embs = shipped_embeddings();
    // identity embedding is the identity map on classes
    for (const Embedding& e : embs) {
        if (e.name != "identity_P2") continue;
        for (size_t i = 0; i < e.amb->basis.size(); ++i)
            CHECK(gysin_class(e, e.amb->elem(int(i))) == e.sub->elem(int(i)));
    }
    // blowdown: class of f^* pt generates H^4 with total degree one
    const MapData& bd = shipped_maps()[0];
    CohomClass fpt = map_pull(bd, ring_Pn(2).elem(2));
    CHECK(fpt == ring_BlPtP2().elem(3));
    CHECK(fpt.integrate() == 1);
}

TEST_CASE("projection instance: fiber class squares to zero and meets the ruling once") {
    const MapData& pr = shipped_maps()[2];
    CohomClass fiber = map_pull(pr, ring_Pn(1).elem(1));
    CHECK((fiber * fiber).is_zero());
    CHECK((fiber * ring_PmxPn(1, 1).elem(1)).integrate() == 1);
}

TEST_CASE("exceptional divisor sign convention") {
    const Ring& bl = ring_BlPtP2();
    CHECK((bl.elem(2) * bl.elem(2)) == bl.elem(3, -1));  // E.E = -pt
    CHECK((bl.elem(1) * bl.elem(2)).is_zero());          // H.E = 0
    CHECK((bl.elem(1) * bl.elem(1)) == bl.elem(3));      // H.H = pt
}
