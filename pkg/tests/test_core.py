from fractions import Fraction
from itertools import zip_longest
import numpy as np
import pytest
from negotiation_utilities.core import (
    ResourceBundle, Trade, Valuation, GameStatus, TIE, COST_OF_PRODUCTION,
    WILLINGNESS_TO_PAY, is_feasible, apply_trade, payoff, classify_winner, score
)
from negotiation_utilities.negotiation_exceptions import InfeasibleTrade, MissingValuation
from negotiation_utilities.parameters import (
    RED, BLUE, RESOURCE_EXCHANGE, ULTIMATUM, SELLER_BUYER
)

RANDOM_NAMES = ("X", "Y", "Z")

SELLER_BUYER_VALUATIONS = (
    Valuation(RED, COST_OF_PRODUCTION, 40),
    Valuation(BLUE, WILLINGNESS_TO_PAY, 60),
)

def test_bundle_zero_entries():
    """
    {X: 0} is the empty bundle, and absent names have quantity 0.

    Raises
    ------
    AssertionError
        If zero entries survive construction.
    """
    bundle = ResourceBundle({"X": 0, "Y": 5})
    msg = f"Error in bundle names. Expected: ('Y',), got: {bundle.names()}."
    assert bundle.names() == ("Y",), msg
    assert ResourceBundle(X=0) == ResourceBundle()
    assert bundle.get("X") == 0

@pytest.mark.parametrize("quantity", [-1, 1.5, "3", True])
def test_bundle_rejects_invalid_quantities(quantity):
    with pytest.raises(ValueError):
        ResourceBundle({"X": quantity})

def test_bundle_arithmetic():
    a = ResourceBundle({"X": 25, "Y": 5})
    b = ResourceBundle(X=10)
    msg = f"Error in subtraction. Expected: X: 15, Y: 5, got: {a - b}."
    assert a - b == ResourceBundle({"X": 15, "Y": 5}), msg
    assert a + b == ResourceBundle({"X": 35, "Y": 5})
    assert b.fits_within(a)
    assert not a.fits_within(b)
    with pytest.raises(ValueError):
        b - a

def test_feasibility():
    red = ResourceBundle(X=25, Y=5)
    blue = ResourceBundle(X=5, Y=25)
    assert is_feasible(Trade(ResourceBundle(X=25), ResourceBundle(Y=25)), red, blue)
    assert not is_feasible(Trade(ResourceBundle(X=26), ResourceBundle()), red, blue)
    assert not is_feasible(Trade(ResourceBundle(), ResourceBundle(Z=1)), red, blue)

def test_apply_trade_conserves_totals():
    """
    Per-resource totals are the same before and after every feasible
    trade.

    Raises
    ------
    AssertionError
        If a resource is created or destroyed.
    """
    red = ResourceBundle(X=25, Y=5)
    blue = ResourceBundle(X=5, Y=25)
    trades = [
        Trade(ResourceBundle(X=10), ResourceBundle(Y=10)),
        Trade(ResourceBundle(X=25, Y=5), ResourceBundle()),
        Trade(ResourceBundle(), ResourceBundle(X=5, Y=25)),
        Trade(ResourceBundle(), ResourceBundle()),
    ]
    for trade in trades:
        new_red, new_blue = apply_trade(trade, red, blue)
        for name in ("X", "Y"):
            expected = red.get(name) + blue.get(name)
            calculated = new_red.get(name) + new_blue.get(name)
            msg = f"Error in total of {name}. Expected: {expected}, got: {calculated}."
            assert calculated == expected, msg

def test_apply_infeasible_trade():
    with pytest.raises(InfeasibleTrade):
        apply_trade(
            Trade(ResourceBundle(Y=10), ResourceBundle()),
            ResourceBundle(X=25, Y=5),
            ResourceBundle(X=5, Y=25),
        )

def test_resource_exchange_payoff():
    initial = ResourceBundle(X=25, Y=5)
    final = ResourceBundle(X=15, Y=20)
    calculated = payoff(RESOURCE_EXCHANGE, RED, initial, final, (), GameStatus.ACCEPTED)
    msg = f"Error in net gain. Expected: 5, got: {calculated}."
    assert calculated == 5, msg

def test_ultimatum_payoff_needs_acceptance():
    initial = ResourceBundle(Dollars=100)
    final = ResourceBundle(Dollars=60)
    assert payoff(ULTIMATUM, RED, initial, final, (), GameStatus.ACCEPTED) == 60
    assert payoff(ULTIMATUM, RED, initial, final, (), GameStatus.MAX_TURNS) == 0

def test_seller_buyer_payoffs():
    """
    A sale of X at 45 ZUP gives the seller 45 - 40 and the buyer
    60 - 45. The buyer wins because 45 is below the midpoint 50.
    """
    initial = {RED: ResourceBundle(X=1), BLUE: ResourceBundle(ZUP=100)}
    final = {RED: ResourceBundle(ZUP=45), BLUE: ResourceBundle(X=1, ZUP=55)}
    outcome = score(SELLER_BUYER, GameStatus.ACCEPTED, initial, final, SELLER_BUYER_VALUATIONS)

    for player, expected in ((RED, Fraction(5)), (BLUE, Fraction(15))):
        calculated = outcome.payoffs[player]
        msg = f"Error in payoff of {player}. Expected: {expected}, got: {calculated}."
        assert calculated == expected, msg

    msg = f"Error in winner. Expected: {BLUE}, got: {outcome.winner}."
    assert outcome.winner == BLUE, msg

def test_seller_buyer_midpoint_is_a_tie():
    payoffs = {RED: Fraction(10), BLUE: Fraction(10)}
    assert classify_winner(SELLER_BUYER, payoffs, SELLER_BUYER_VALUATIONS) == TIE
    payoffs = {RED: Fraction(15), BLUE: Fraction(5)}
    assert classify_winner(SELLER_BUYER, payoffs, SELLER_BUYER_VALUATIONS) == RED

def test_seller_buyer_missing_valuation():
    with pytest.raises(MissingValuation):
        payoff(
            SELLER_BUYER, RED, ResourceBundle(X=1), ResourceBundle(ZUP=45),
            SELLER_BUYER_VALUATIONS[:1], GameStatus.ACCEPTED,
        )

@pytest.mark.parametrize("status", [GameStatus.FORFEIT, GameStatus.ABORTED])
def test_forfeit_and_abort_score_zero(status):
    """
    A forfeited or aborted game is a 0/0 tie whatever the holdings.
    """
    holdings = {RED: ResourceBundle(ZUP=45), BLUE: ResourceBundle(X=1, ZUP=55)}
    initial = {RED: ResourceBundle(X=1), BLUE: ResourceBundle(ZUP=100)}
    outcome = score(SELLER_BUYER, status, initial, holdings, SELLER_BUYER_VALUATIONS, forfeited_by=BLUE)
    for calculated, expected in zip_longest(outcome.payoffs.values(), [0, 0]):
        msg = f"Error in {status.value} payoff. Expected: {expected}, got: {calculated}."
        assert calculated == expected, msg

    assert outcome.winner == TIE
    assert outcome.forfeited_by == BLUE

def test_outcome_dict():
    initial = {RED: ResourceBundle(Dollars=100), BLUE: ResourceBundle()}
    final = {RED: ResourceBundle(Dollars=99), BLUE: ResourceBundle(Dollars=1)}
    outcome = score(ULTIMATUM, GameStatus.ACCEPTED, initial, final, ())
    assert outcome.winner == RED
    assert type(outcome).from_dict(outcome.to_dict()) == outcome

def test_seller_buyer_money_only_trade():
    """
    A trade that moves only ZUP leaves the good with the seller. The
    payoffs are +10 and -10 and the seller wins, whatever the
    midpoint of the valuations.

    Raises
    ------
    AssertionError
        If the winner disagrees with the payoffs.
    """
    initial = {RED: ResourceBundle(X=1), BLUE: ResourceBundle(ZUP=100)}
    final = {RED: ResourceBundle(X=1, ZUP=10), BLUE: ResourceBundle(ZUP=90)}
    outcome = score(SELLER_BUYER, GameStatus.ACCEPTED, initial, final, SELLER_BUYER_VALUATIONS)

    for player, expected in ((RED, Fraction(10)), (BLUE, Fraction(-10))):
        calculated = outcome.payoffs[player]
        msg = f"Error in payoff of {player}. Expected: {expected}, got: {calculated}."
        assert calculated == expected, msg

    msg = f"Error in winner. Expected: {RED}, got: {outcome.winner}."
    assert outcome.winner == RED, msg

def _random_bundle(rng: np.random.Generator) -> ResourceBundle:
    return ResourceBundle({name: int(rng.integers(0, 31)) for name in RANDOM_NAMES})

def _random_part(rng: np.random.Generator, holdings: ResourceBundle) -> ResourceBundle:
    return ResourceBundle({
        name: int(rng.integers(0, holdings.get(name) + 1)) for name in RANDOM_NAMES
    })

def test_random_feasible_trades_conserve_totals():
    """
    Apply 1000 random feasible trades to random holdings. Per-resource
    totals never change and no quantity goes negative.

    Raises
    ------
    AssertionError
        If a resource is created or destroyed.
    """
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        red, blue = _random_bundle(rng), _random_bundle(rng)
        trade = Trade(_random_part(rng, red), _random_part(rng, blue))
        assert is_feasible(trade, red, blue)

        new_red, new_blue = apply_trade(trade, red, blue)
        for name in RANDOM_NAMES:
            expected = red.get(name) + blue.get(name)
            calculated = new_red.get(name) + new_blue.get(name)
            msg = f"Error in total of {name}. Expected: {expected}, got: {calculated}."
            assert calculated == expected, msg
            assert new_red.get(name) >= 0
            assert new_blue.get(name) >= 0

def test_random_infeasible_trades_are_rejected():
    """
    Ask one side for more of a resource than it holds. Every such trade
    is infeasible and apply_trade raises InfeasibleTrade.
    """
    rng = np.random.default_rng(4321)
    for _ in range(1000):
        red, blue = _random_bundle(rng), _random_bundle(rng)
        from_red, from_blue = _random_part(rng, red), _random_part(rng, blue)
        name = RANDOM_NAMES[rng.integers(0, len(RANDOM_NAMES))]
        excess = int(rng.integers(1, 11))
        if rng.integers(0, 2):
            from_red = from_red + ResourceBundle({name: red.get(name) - from_red.get(name) + excess})
        else:
            from_blue = from_blue + ResourceBundle({name: blue.get(name) - from_blue.get(name) + excess})

        trade = Trade(from_red, from_blue)
        msg = f"Error in feasibility. Expected {trade} to be infeasible with RED: {red}, BLUE: {blue}."
        assert not is_feasible(trade, red, blue), msg
        with pytest.raises(InfeasibleTrade):
            apply_trade(trade, red, blue)

if __name__ == "__main__":
    test_bundle_zero_entries()
    test_bundle_arithmetic()
    test_feasibility()
    test_apply_trade_conserves_totals()
    test_apply_infeasible_trade()
    test_resource_exchange_payoff()
    test_ultimatum_payoff_needs_acceptance()
    test_seller_buyer_payoffs()
    test_seller_buyer_midpoint_is_a_tie()
    test_seller_buyer_missing_valuation()
    test_outcome_dict()
    test_seller_buyer_money_only_trade()
    test_random_feasible_trades_conserve_totals()
