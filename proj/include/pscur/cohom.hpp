#pragma once

#include <string>
#include <utility>
#include <vector>

namespace pscur::cohom {

struct Ring;

/// Integer-coordinate cohomology class in a fixed ring presentation.
struct CohomClass {
    const Ring* ring = nullptr;
    std::vector<long> c;

    CohomClass operator+(const CohomClass& o) const;
    CohomClass operator-(const CohomClass& o) const;
    CohomClass operator*(const CohomClass& o) const;  // cup product
    CohomClass scaled(long k) const;
    bool operator==(const CohomClass& o) const;
    bool is_zero() const;
    CohomClass component(int degree) const;
    long integrate() const;  // pairing with the fundamental class
    std::string str() const;
};

/// Hard-coded graded ring presentation with integer structure constants.
struct Ring {
    std::string name;
    int cdim = 0;
    std::vector<std::string> basis;             // basis[0] must be the unit
    std::vector<int> degree;                    // complex degree per basis element
    std::vector<std::vector<std::vector<long>>> mult;  // mult[i][j] = coords of e_i e_j
    std::vector<long> integral;                 // integral of each basis element

    CohomClass zero() const;
    CohomClass unit() const;
    CohomClass elem(int i, long k = 1) const;
    CohomClass cls(std::vector<long> coords) const;

    bool check_associative() const;
    bool check_commutative() const;
    bool check_unital() const;
    bool check_perfect_pairing() const;  // unimodular in complementary degrees

    /// Total Chern class of the tangent bundle of the model.
    CohomClass chern_total() const;
    /// Multiplicative inverse of chern_total computed by the recursive
    /// convolution s_k = -sum_{j>=1} c_j s_{k-j}.
    CohomClass segre_total() const;
};

const Ring& ring_Pn(int n);        // Z[h]/h^{n+1}
const Ring& ring_PmxPn(int m, int n);
const Ring& ring_BlPtP2();         // 1, H, E, pt with H^2 = pt, E^2 = -pt, HE = 0

/// Embedding data i: X -> Z used by the class-level Gysin checks.
struct Embedding {
    std::string name;
    const Ring* sub = nullptr;
    const Ring* amb = nullptr;
    std::vector<CohomClass> pull;  // i^* of each ambient basis element
    std::vector<CohomClass> push;  // i_* of each sub basis element
    CohomClass image;              // [i(X)] in the ambient ring
};

const std::vector<Embedding>& shipped_embeddings();

/// The class-level Gysin image: [i^! mu] = i^*[mu].
CohomClass gysin_class(const Embedding& e, const CohomClass& mu);

/// Holomorphic map data for the Theorem-2 and projection-formula instances.
struct MapData {
    std::string name;
    const Ring* from = nullptr;  // X
    const Ring* to = nullptr;    // Y
    std::vector<CohomClass> pull;  // f^* of each Y basis element (ring hom)
    std::vector<CohomClass> push;  // f_* of each X basis element
};

const std::vector<MapData>& shipped_maps();

CohomClass map_pull(const MapData& f, const CohomClass& y);
CohomClass map_push(const MapData& f, const CohomClass& x);

struct CheckResult {
    std::string name;
    bool pass;
};

/// Every shipped integer identity; all must hold with zero tolerance.
std::vector<CheckResult> verify_all();

}  // namespace pscur::cohom
