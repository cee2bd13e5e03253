import pytest

from ledgerlogic.ledger import UnknownContract
from ledgerlogic.logic import App, DiamondUp, LedgerUniverse, Not
from ledgerlogic.logic.semantics import IndexOutOfRange
from ledgerlogic.query.parser import parse_query
from ledgerlogic.query.run import looks_forward, pattern_audit, run_query, state_of

from ledger_fixtures import (
    ALICE_GEORGE, BOB_ALICE, CLAIM, HONOURED, INSURANCE, OUT0_RUN, PAY, build_ledger,
    honoured_ledger, laundering_ledger,
)

Q3 = "EXF (PAST app((claim,TOP,insurer),3) => hol({res},insurer,4))"


class TestStateOf:
    @pytest.mark.parametrize("n,k,legal", [
        (9, 8, ["Accepted"]), (9, 9, ["Refunded"]), (9, 0, ["IN"]), (9, 2, ["Active"]),
    ])
    def test_honoured(self, n, k, legal):
        r = run_query(honoured_ledger(), None, f"state-of({n},{k})")
        assert r.value["legal"] == legal
        assert r.verdict

    def test_exec_names(self):
        r = state_of(honoured_ledger(), 9, 8, INSURANCE)
        assert r.value == {"legal": ["Accepted"], "exec": ["Accepted/{closePrem,refund}"]}
        assert "Refunded (HON)" in state_of(honoured_ledger(), 9, 9, INSURANCE).summary

    def test_future_state(self):
        led = build_ledger(HONOURED[:3])
        r = run_query(led, None, "state-of(3,5)")
        assert r.value["legal"] == ["Offered"]

    def test_unknown_contract(self):
        with pytest.raises(UnknownContract):
            run_query(honoured_ledger(), None, "state-of(9,9,Nope)")

    def test_needs_a_name_with_two_contracts(self):
        with pytest.raises(ValueError):
            run_query(laundering_ledger(), None, "state-of(1,1)")

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            run_query(honoured_ledger(), None, "state-of(10,1)")


class TestIntervalHolding:
    def test_doc_held_by_insurer(self):
        r = run_query(honoured_ledger(), None, "hol(damageDoc,insurer,all[4..9])")
        assert r.verdict is True and not r.truncated

    def test_not_before_hand_over(self):
        assert not run_query(honoured_ledger(), None, "hol(damageDoc,insurer,all[3..9])").verdict

    def test_at_intermediate_step(self):
        assert run_query(honoured_ledger(), None, "hol(damageDoc,customer,2)", at=2).verdict


class TestRegression:
    """Query 3: the three-record prefix, asking about futures where the claim was filed at step 3."""

    led = build_ledger(HONOURED[:3])

    def test_doc_reaches_insurer(self):
        r = run_query(self.led, None, Q3.format(res="damageDoc"), horizon=6)
        assert r.verdict

    def test_refund_not_yet(self):
        assert not run_query(self.led, None, Q3.format(res="refund"), horizon=6).verdict

    def test_bundle_completion_ahead(self):
        assert run_query(self.led, None, "EXF bc(Cd)", at=3, horizon=6).verdict

    def test_out0_run_cannot_offer(self):
        led = build_ledger(OUT0_RUN)
        f = "EXF (PAST app((out0,TOP,BOT),3) => app((offer,TOP,customer)))"
        assert not run_query(led, None, f).verdict


class TestHypothetical:
    """Query 4: was the formula reachable from some earlier state, though false now?"""

    def test_offer_after_timeout(self):
        r = run_query(build_ledger(OUT0_RUN), None, "hypothetical(app((claim,TOP,insurer)))")
        assert r.verdict and r.value == [0, 1, 2]

    def test_honoured_timeout(self):
        r = run_query(honoured_ledger(), None, "hypothetical(app((out0,TOP,BOT)))")
        assert r.verdict and r.value == [0, 1, 2, 3]

    def test_already_true_is_not_hypothetical(self):
        r = run_query(honoured_ledger(), None, "hypothetical(app((claim,TOP,insurer)))")
        assert not r.verdict

    def test_forward_flag(self):
        assert looks_forward(DiamondUp(App(CLAIM)))
        assert looks_forward(Not(DiamondUp(App(CLAIM))))
        assert not looks_forward(App(CLAIM))


class TestPattern:
    def test_laundering(self):
        r = run_query(laundering_ledger(), None, "pattern((m,bob,alice),(m,alice,george))")
        assert r.value == {"pairs": [(0, 2), (5, 6)], "repeated": True}
        assert r.witnesses == ({"first": 0, "second": 2}, {"first": 5, "second": 6})

    def test_cut_at_step(self):
        r = run_query(laundering_ledger(), None, "pattern((m,bob,alice),(m,alice,george))", at=4)
        assert r.value == {"pairs": [(0, 2)], "repeated": False}

    def test_absent(self):
        r = pattern_audit(HONOURED, ALICE_GEORGE, BOB_ALICE)
        assert not r.verdict and r.value["pairs"] == []

    def test_order_matters(self):
        r = pattern_audit([ALICE_GEORGE, BOB_ALICE], BOB_ALICE, ALICE_GEORGE)
        assert not r.verdict


class TestHorizon:
    def test_resource_gate_truncates(self):
        led = build_ledger(HONOURED[:1])
        # the insurer needs two hand-overs of the document; one step of future is not enough
        f = "EXF app((damageDoc,customer,insurer))"
        r = run_query(led, None, f, horizon=1, gate="resource")
        assert r.truncated and not r.verdict
        assert run_query(led, None, f, horizon=2, gate="resource").verdict

    def test_past_only_not_truncated(self):
        led = build_ledger(HONOURED[:1])
        r = run_query(led, None, "PAST app((damageEv,TOP,BOT))", horizon=1, gate="resource")
        assert r.verdict and not r.truncated

    def test_contract_gate_is_finite(self):
        u = LedgerUniverse(honoured_ledger())
        assert not u.truncated

    def test_pay_contract_future(self):
        led = build_ledger([BOB_ALICE], contract_id="Pay", contracts=(PAY,))
        assert run_query(led, None, "EXF app((m,alice,george))").verdict
        assert not run_query(led, None, "EXF app((m,george,bob))").verdict

    def test_parsed_ast_accepted(self):
        ast = parse_query("app((damageEv,TOP,BOT))")
        assert run_query(honoured_ledger(), [INSURANCE], ast).verdict
        assert not run_query(honoured_ledger(), [INSURANCE], ast, at=0).verdict

    def test_undeclared_names_are_simply_false(self):
        assert not run_query(honoured_ledger(), None, "app((nothing,TOP,x))").verdict
