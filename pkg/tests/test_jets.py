from math import comb

import pytest
import sympy as sp
from hypothesis import given, strategies as st

from linfalg import linalg
from linfalg.algebroid import tangent_algebroid
from linfalg.errors import ArgumentError, WindowError
from linfalg.fixtures import fixture_names, load_fixture
from linfalg.jets import (DrLComplex, JetModule, TruncatedUL, build_UL, check_transport, dr_L,
                          dr_L_map, enh_ce, grothendieck_connection, jet_algebra,
                          l_jet_prolongation, split_and_identify, word_factorial, words)
from linfalg.linf import check_structure

ALGEBROIDS = fixture_names("algebroid")
POINTS = [n for n in ALGEBROIDS if n.endswith("-point")]


def model(name):
    return load_fixture(name).algebroid


def to_sympy(el):
    return sp.sympify(str(el).replace("^", "**"))


def sym_rank(r, k):
    return comb(r + k - 1, k)


@pytest.mark.parametrize("name", ALGEBROIDS)
@pytest.mark.parametrize("N", range(5))
def test_pbw_ranks(name, N):
    M = model(name)
    U = TruncatedUL(M, N, verify=False)
    J = JetModule(U)
    assert len(U.basis) == sum(sym_rank(M.rank, k) for k in range(N + 1))
    assert J.level_ranks() == [sym_rank(M.rank, k) for k in range(N + 1)]
    assert len(JetModule(U, rank=2).basis()) == 2 * len(U.basis)


@pytest.mark.parametrize("name", ALGEBROIDS)
def test_enveloping_algebra_axioms(name):
    M = model(name)
    assert TruncatedUL(M, 3, verify=False).check().ok


def test_sl2_straightening_frozen():
    U = build_UL(model("sl2-point"), 2)
    e, f, h = (U.M.index(x) for x in ("e", "f", "h"))
    # f e = e f - h in normal order
    prod = U.word(f, (e,))
    assert prod[tuple(sorted((e, f)))] == 1
    assert prod[(h,)] == -1


def test_coproduct_counts():
    # word of length k splits into 2^k ordered subsequence pairs
    for k in range(5):
        assert len(TruncatedUL.coproduct(tuple(range(k)))) == 2 ** k


@pytest.mark.parametrize("name", ALGEBROIDS)
@pytest.mark.parametrize("N", range(1, 5))
def test_grothendieck_flat(name, N):
    M = model(name)
    window = 2 if M.R.n else 0
    assert grothendieck_connection(M, 1, N).check_flat(window).ok


def test_tangent_jets_are_taylor_coefficients():
    M = tangent_algebroid(["x", "y"])
    x, y = sp.symbols("x y")
    f = "x^3*y + 2*x*y^2 - y + 5"
    fs = x ** 3 * y + 2 * x * y ** 2 - y + 5
    jet = l_jet_prolongation(M, f, 3)
    for N in range(4):
        for w in words(2, N):
            expected = fs
            for i in w:
                expected = sp.diff(expected, (x, y)[i])
            got = jet.get(w)
            assert (to_sympy(got) if got is not None else 0) == sp.expand(expected)


@given(st.lists(st.integers(-2, 2), min_size=6, max_size=6))
def test_prolongation_is_multiplicative(c):
    M = model("rotation-Qxy")
    U = TruncatedUL(M, 3, verify=False)
    J = JetModule(U)
    f = f"({c[0]}) + ({c[1]})*x + ({c[2]})*y*x"
    g = f"({c[3]})*y + ({c[4]})*x^2 + ({c[5]})"
    fg = M.R.coerce(f) * M.R.coerce(g)
    lhs = J.product(J.prolong(f), J.prolong(g))
    rhs = J.prolong(fg)
    keys = set(lhs) | set(rhs)
    assert all((lhs.get(k, M.R.zero()) - rhs.get(k, M.R.zero())).is_zero() for k in keys)


@given(st.lists(st.integers(-2, 2), min_size=3, max_size=3))
def test_prolongation_is_flat_section(c):
    M = model("tangent-Qx")
    U = TruncatedUL(M, 3, verify=False)
    J = JetModule(U)
    phi = J.prolong(f"({c[0]}) + ({c[1]})*x + ({c[2]})*x^3")
    nabla = J.connection(phi, 0)
    assert all(v.is_zero() for v in nabla.values())


@pytest.mark.parametrize("name", POINTS)
def test_resolution_point_bases(name):
    M = model(name)
    K = dr_L(M, 3)
    assert K.check().ok
    full = K.cohomology()
    assert full[0] == 1
    assert all(full[m] == 0 for m in full if m > 0)
    fw = K.faithful_weight()
    if fw >= 0:
        inside = K.cohomology(fw)
        assert inside[0] == 1 and all(v == 0 for m, v in inside.items() if m > 0)


@pytest.mark.parametrize("name,N,window", [("tangent-Qx", 2, 2), ("tangent-Qx-N3", 3, 3),
                                           ("rotation-Qxy", 2, 1), ("rotation-Qxy", 3, 2)])
def test_resolution_polynomial_bases(name, N, window):
    M = model(name)
    K = dr_L(M, N, window=window)
    H = K.cohomology(K.faithful_weight())
    dim_R = len(M.R.basis(window=window))
    assert H[0] == dim_R
    assert all(v == 0 for m, v in H.items() if m > 0)


def test_prolongations_span_h0_for_tangent():
    M = model("tangent-Qx")
    K = DrLComplex(M, 2, 1, 2)
    J = K.jets
    for f in ("1", "x", "x^2"):
        phi = J.prolong(f)
        v = {key: K.C.embed(val) for key, val in phi.items() if len(key[0]) <= 2}
        assert not K.D(v)


def test_window_required():
    with pytest.raises(WindowError):
        DrLComplex(model("tangent-Qx"), 2)


def test_drl_functoriality():
    M = model("aff2-point")
    K1, K2, K3 = DrLComplex(M, 2, 1), DrLComplex(M, 2, 2), DrLComplex(M, 2, 2)
    f = [[1], [2]]
    g = [[0, 1], [1, -1]]
    gf = [[sum(g[i][k] * f[k][j] for k in range(2)) for j in range(1)] for i in range(2)]
    Ff, Fg, Fgf = dr_L_map(K1, K2, f), dr_L_map(K2, K3, g), dr_L_map(K1, K3, gf)
    for m in range(len(Ff)):
        assert linalg.matmul(Fg[m], Ff[m]) == Fgf[m]
    # chain maps: D F = F D
    D1 = [mp.rows() for mp in K1.maps()]
    D2 = [mp.rows() for mp in K2.maps()]
    for m in range(len(D1)):
        assert linalg.matmul(D2[m], Ff[m]) == linalg.matmul(Ff[m + 1], D1[m])


@pytest.mark.parametrize("name", ["sl2-point", "aff2-point", "abelian2-point"])
def test_splitting_identification(name):
    ident = split_and_identify(model(name), 3)
    assert ident.check().ok
    mat = ident.matrix()
    assert linalg.rank(mat) == len(mat)


def test_splitting_with_correction():
    M = model("aff2-point")
    ident = split_and_identify(M, 3, {"a": {("a", "b"): 1}})
    assert ident.check().ok
    with pytest.raises(ArgumentError):
        split_and_identify(M, 3, {"a": {("b",): 1}})


def test_divided_powers():
    M = model("abelian1-point")
    ident = split_and_identify(M, 4)
    for w, img in ident.images.items():
        assert img[(w, 0)].constant() == word_factorial(w)


@pytest.mark.parametrize("name,N,window", [("abelian1-point", 3, None), ("sl2-point", 2, None),
                                           ("tangent-Qx", 2, 2)])
def test_transport_and_enh_ce(name, N, window):
    M = model(name)
    assert check_transport(M, N, window).ok
    E = enh_ce(M, N, window)
    assert E.report.ok
    assert check_structure(E.L, N, chains=False).ok


def test_enh_ce_curvature_is_frame_dual():
    E = enh_ce(model("abelian1-point"), 3)
    L = E.L
    assert {L.labels[j]: str(c) for j, c in L.curvature().items()} == {"e": "e_dual"}
    # abelian: only the curvature survives
    assert set(L.brackets) == {0}


def test_jet_algebra_square_zero():
    for name, N in (("sl2-point", 2), ("aff2-point", 3)):
        B = jet_algebra(model(name), N)
        for g in B.gens:
            assert B.d(B.d(B.gen(g.name))).is_zero()
