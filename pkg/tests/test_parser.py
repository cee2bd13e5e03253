import pytest
from hypothesis import given, settings, strategies as st

from ledgerlogic.core import Bundle, Transfer
from ledgerlogic.logic import (
    BC, FALSE, TRUE, And, App, AppAt, AppLast, BoxDown, Chi, DiamondDown, DiamondUp, ExistsAlong,
    ForallAlong, Hol, Implies, Not, Or, PhiT, Pullback, Zeta,
)
from ledgerlogic.logic.formula import ALONG_KEYWORDS, MODAL_KEYWORDS, to_text
from ledgerlogic.query.parser import (
    Hypothetical, Pattern, QueryAst, QuerySyntaxError, StateOf, UnknownIdentifier, parse_formula,
    parse_query, query_text, tokenize,
)

CLAIM = Transfer("claim", "TOP", "insurer")
DOC = Transfer("damageDoc", "customer", "insurer")

names = st.one_of(
    st.sampled_from(["claim", "damageDoc", "and", "not", "EXF", "true", "x-1", "a.b", "TOP", "BOT"]),
    st.text(min_size=0, max_size=6),
)
transfers = st.builds(Transfer, names, names, names)
bundles = st.lists(transfers, min_size=1, max_size=3, unique_by=lambda t: t.resource).map(
    lambda ts: Bundle(frozenset(ts))
)
nat = st.integers(0, 40)

atoms = st.one_of(
    st.just(TRUE), st.just(FALSE),
    st.builds(Chi, nat), st.builds(PhiT, nat), st.builds(BC, names),
    st.builds(App, transfers), st.builds(AppAt, transfers, nat), st.builds(AppLast, transfers, nat),
    st.builds(Hol, names, names, nat),
    st.builds(Zeta, st.lists(st.one_of(transfers, bundles), max_size=3).map(tuple)),
)
maps = st.one_of(names, st.builds(lambda k, c: f"{k}:{c}", st.sampled_from(["nu_l", "nu_e", "nu_le"]), names))
formulas = st.recursive(
    atoms,
    lambda sub: st.one_of(
        st.builds(Not, sub),
        st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Implies, sub, sub),
        *[st.builds(op, sub) for op in MODAL_KEYWORDS],
        *[st.builds(op, maps, sub) for op in ALONG_KEYWORDS],
    ),
    max_leaves=8,
)


class TestRoundTrip:
    @settings(max_examples=400, deadline=None)
    @given(formulas)
    def test_formula(self, f):
        assert parse_formula(to_text(f)) == f

    @settings(max_examples=200, deadline=None)
    @given(st.one_of(
        formulas.map(lambda f: QueryAst("formula", f)),
        formulas.map(lambda f: QueryAst("hypothetical", Hypothetical(f))),
        st.builds(lambda a, b: QueryAst("pattern", Pattern(a, b)), transfers, transfers),
        st.builds(lambda n, k, c: QueryAst("state-of", StateOf(n, k, c)), nat, nat, st.none() | names),
    ))
    def test_query(self, q):
        assert parse_query(query_text(q)) == q


class TestGrammar:
    def test_precedence(self):
        f = parse_formula("not chi(1) and chi(2) or chi(3) => chi(4) => chi(5)")
        left = Or(And(Not(Chi(1)), Chi(2)), Chi(3))
        assert f == Implies(left, Implies(Chi(4), Chi(5)))

    def test_modal_binds_tighter_than_and(self):
        assert parse_formula("EXF chi(1) and chi(2)") == And(DiamondUp(Chi(1)), Chi(2))
        assert parse_formula("ALF (chi(1) and chi(2))") == BoxDown(And(Chi(1), Chi(2)))

    def test_atoms(self):
        assert parse_formula("app((claim,TOP,insurer))") == App(CLAIM)
        assert parse_formula("app((claim,TOP,insurer),3)") == AppAt(CLAIM, 3)
        assert parse_formula("applast((claim,TOP,insurer),2)") == AppLast(CLAIM, 2)
        assert parse_formula("hol(damageDoc,insurer,4)") == Hol("damageDoc", "insurer", 4)
        assert parse_formula("bc(Cd)") == BC("Cd")
        assert parse_formula("zeta[]") == Zeta(())

    def test_hol_interval(self):
        f = parse_formula("hol(damageDoc,insurer,all[4..6])")
        hs = set()

        def walk(g):
            if isinstance(g, And):
                walk(g.left)
                walk(g.right)
            else:
                hs.add(g)
        walk(f)
        assert hs == {Hol("damageDoc", "insurer", n) for n in (4, 5, 6)}

    def test_zeta_with_bundle(self):
        f = parse_formula("zeta[{(damageDoc,customer,insurer),(claim,TOP,insurer)},(claim,TOP,insurer)]")
        assert f == Zeta((Bundle.of(DOC, CLAIM), CLAIM))

    def test_maps(self):
        assert parse_formula("exists nu_l:Cd phi(3)") == ExistsAlong("nu_l:Cd", PhiT(3))
        assert parse_formula("forall m true") == ForallAlong("m", TRUE)
        assert parse_formula("pullback nu_le:Cd PAST chi(0)") == Pullback("nu_le:Cd", DiamondDown(Chi(0)))

    def test_quoted_identifiers(self):
        f = parse_formula('app(("my res","TOP","an actor"))')
        assert f == App(Transfer("my res", "TOP", "an actor"))

    def test_queries(self):
        assert parse_query("state-of(9,8)").body == StateOf(9, 8, None)
        assert parse_query("state-of(9, 8, Cd)").body == StateOf(9, 8, "Cd")
        q = parse_query("hypothetical(app((claim,TOP,insurer)))")
        assert q.kind == "hypothetical" and q.formula == App(CLAIM)
        p = parse_query("pattern((claim,TOP,insurer),(damageDoc,customer,insurer))")
        assert p.body == Pattern(CLAIM, DOC) and p.formula is None

    def test_keywords_as_identifiers(self):
        assert parse_formula("app((and,or,not))") == App(Transfer("and", "or", "not"))


class TestErrors:
    @pytest.mark.parametrize("text,pos", [
        ("chi(", 4),
        ("chi(1) and", 10),
        ("app((claim,TOP))", 14),
        ("chi(1) chi(2)", 7),
        ("hol(r,k,all[3..1])", 0),
        ("@", 0),
        ("", 0),
    ])
    def test_positions(self, text, pos):
        with pytest.raises(QuerySyntaxError) as err:
            parse_query(text)
        assert err.value.position == pos

    def test_duplicate_resource_bundle(self):
        with pytest.raises(QuerySyntaxError):
            parse_formula("zeta[{(r,a,b),(r,b,c)}]")

    def test_unknown_identifiers(self):
        kw = dict(resources={"claim"}, actors={"insurer"}, contracts={"Cd"})
        assert parse_formula("app((claim,TOP,insurer))", **kw) == App(CLAIM)
        with pytest.raises(UnknownIdentifier) as err:
            parse_formula("app((claimz,TOP,insurer))", **kw)
        assert (err.value.name, err.value.kind) == ("claimz", "resource")
        with pytest.raises(UnknownIdentifier):
            parse_formula("hol(claim,bob,1)", **kw)
        with pytest.raises(UnknownIdentifier):
            parse_query("state-of(1,1,Xx)", **kw)

    def test_is_value_error(self):
        assert issubclass(QuerySyntaxError, ValueError)

    def test_bad_string(self):
        with pytest.raises(QuerySyntaxError):
            tokenize('"\\q"')
