from __future__ import annotations
from fractions import Fraction
from dataclasses import dataclass, field
from enum import Enum
from typing import Union, Iterable
from itertools import chain
import numpy as np
from .negotiation_exceptions import InfeasibleTrade, MissingValuation
from .parameters import (
    RED, BLUE, PLAYERS, RESOURCE_EXCHANGE, ULTIMATUM, SELLER_BUYER, DOLLARS,
    ZUP, GOOD, SCENARIO_KINDS
)

TIE = "TIE"
COST_OF_PRODUCTION = "cost_of_production"
WILLINGNESS_TO_PAY = "willingness_to_pay"

class GameStatus(str, Enum):
    ONGOING = "ONGOING"
    ACCEPTED = "ACCEPTED"
    MAX_TURNS = "MAX_TURNS"
    FORFEIT = "FORFEIT"
    ABORTED = "ABORTED"

    @property
    def terminal(self) -> bool:
        return self is not GameStatus.ONGOING

def opponent(player: str) -> str:
    if player not in PLAYERS:
        msg = f"'player' must be in {PLAYERS}! Got '{player}'."
        raise ValueError(msg)

    return BLUE if player == RED else RED

class ResourceBundle:
    """
    Immutable map from resource name to a non-negative integer
    quantity. Names absent from the map have quantity 0, and zero
    entries are dropped on construction so that {X: 0} equals the empty
    bundle.

    Examples
    --------
    >>> ResourceBundle({"X": 25, "Y": 5}) - ResourceBundle(X=10)
    ResourceBundle({'X': 15, 'Y': 5})
    """
    __slots__ = ("_quantities",)

    def __init__(
        self,
        quantities: Union[None, dict, ResourceBundle] = None,
        **kwargs
    ):
        if isinstance(quantities, ResourceBundle):
            quantities = quantities.to_dict()

        merged = {}
        for name, quantity in chain((quantities or {}).items(), kwargs.items()):
            if isinstance(quantity, bool) or not isinstance(quantity, (int, np.integer)):
                msg = f"Quantity of '{name}' must be an integer."
                msg += f" Got {quantity!r} of type {type(quantity).__name__}."
                raise ValueError(msg)

            if quantity < 0:
                msg = f"Quantity of '{name}' must be non-negative. Got {quantity}."
                raise ValueError(msg)

            if quantity > 0:
                merged[name] = merged.get(name, 0) + int(quantity)

        self._quantities = dict(sorted(merged.items()))

    def get(self, name: str) -> int:
        return self._quantities.get(name, 0)

    def total(self) -> int:
        return sum(self._quantities.values())

    def names(self) -> tuple[str, ...]:
        return tuple(self._quantities)

    def items(self):
        return self._quantities.items()

    def is_empty(self) -> bool:
        return not self._quantities

    def to_dict(self) -> dict[str, int]:
        return dict(self._quantities)

    def fits_within(self, other: ResourceBundle) -> bool:
        """
        Component-wise self <= other.
        """
        return all(quantity <= other.get(name) for name, quantity in self.items())

    def scaled(self, factor: int, names: Union[None, Iterable[str]] = None) -> ResourceBundle:
        """
        Multiply quantities by an integer factor. If names is given,
        only those resources are scaled.
        """
        names = None if names is None else set(names)
        return ResourceBundle({
            name: quantity*factor if (names is None or name in names) else quantity
            for name, quantity in self.items()
        })

    def __add__(self, other: ResourceBundle) -> ResourceBundle:
        res = self.to_dict()
        for name, quantity in other.items():
            res[name] = res.get(name, 0) + quantity

        return ResourceBundle(res)

    def __sub__(self, other: ResourceBundle) -> ResourceBundle:
        if not other.fits_within(self):
            msg = f"Cannot subtract {other} from {self}: negative quantities."
            raise ValueError(msg)

        res = self.to_dict()
        for name, quantity in other.items():
            res[name] -= quantity

        return ResourceBundle(res)

    def __iter__(self):
        return iter(self._quantities)

    def __len__(self):
        return len(self._quantities)

    def __eq__(self, other):
        if not isinstance(other, ResourceBundle):
            return NotImplemented

        return self._quantities == other._quantities

    def __hash__(self):
        return hash(tuple(self._quantities.items()))

    def __repr__(self):
        return f"ResourceBundle({self._quantities})"

    def __str__(self):
        if self.is_empty():
            return "nothing"

        return ", ".join(f"{name}: {quantity}" for name, quantity in self.items())

@dataclass(frozen=True)
class Trade:
    """
    Bidirectional exchange proposal. from_red is what RED gives to BLUE
    and from_blue is what BLUE gives to RED.
    """
    from_red: ResourceBundle = field(default_factory=ResourceBundle)
    from_blue: ResourceBundle = field(default_factory=ResourceBundle)
    proposer: str = RED

    def __post_init__(self):
        if self.proposer not in PLAYERS:
            msg = f"Trade proposer must be in {PLAYERS}. Got '{self.proposer}'."
            raise ValueError(msg)

        if not isinstance(self.from_red, ResourceBundle):
            object.__setattr__(self, "from_red", ResourceBundle(self.from_red))

        if not isinstance(self.from_blue, ResourceBundle):
            object.__setattr__(self, "from_blue", ResourceBundle(self.from_blue))

    def gives(self, player: str) -> ResourceBundle:
        return self.from_red if player == RED else self.from_blue

    def to_dict(self) -> dict:
        return {
            "from_red": self.from_red.to_dict(),
            "from_blue": self.from_blue.to_dict(),
            "proposer": self.proposer,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Trade:
        return cls(
            from_red = ResourceBundle(data["from_red"]),
            from_blue = ResourceBundle(data["from_blue"]),
            proposer = data["proposer"],
        )

@dataclass(frozen=True)
class Valuation:
    player: str
    kind: str
    amount: int

    def __post_init__(self):
        if self.kind not in (allowed := [COST_OF_PRODUCTION, WILLINGNESS_TO_PAY]):
            msg = f"Valuation kind must be in {allowed}. Got '{self.kind}'."
            raise ValueError(msg)

    def to_dict(self) -> dict:
        return {"player": self.player, "kind": self.kind, "amount": self.amount}

    @classmethod
    def from_dict(cls, data: dict) -> Valuation:
        return cls(player=data["player"], kind=data["kind"], amount=data["amount"])

@dataclass(frozen=True)
class Outcome:
    status: GameStatus
    final_holdings: dict
    payoffs: dict
    winner: str
    forfeited_by: Union[None, str] = None

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "final_holdings": {
                player: bundle.to_dict() for player, bundle in self.final_holdings.items()
            },
            "payoffs": {player: str(value) for player, value in self.payoffs.items()},
            "winner": self.winner,
            "forfeited_by": self.forfeited_by,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Outcome:
        return cls(
            status = GameStatus(data["status"]),
            final_holdings = {
                player: ResourceBundle(bundle)
                for player, bundle in data["final_holdings"].items()
            },
            payoffs = {
                player: Fraction(value) for player, value in data["payoffs"].items()
            },
            winner = data["winner"],
            forfeited_by = data.get("forfeited_by"),
        )

def is_feasible(
    trade: Trade,
    holdings_red: ResourceBundle,
    holdings_blue: ResourceBundle
) -> bool:
    """
    Check whether both sides of a trade hold what they are asked to
    give.

    Parameters
    ----------
    trade : Trade
        The proposal to check.

    holdings_red : ResourceBundle
        Current holdings of RED.

    holdings_blue : ResourceBundle
        Current holdings of BLUE.

    Returns
    -------
    : bool
        True iff from_red <= holdings_red and from_blue <= holdings_blue
        component-wise.
    """
    return (
        trade.from_red.fits_within(holdings_red) and
        trade.from_blue.fits_within(holdings_blue)
    )

def apply_trade(
    trade: Trade,
    holdings_red: ResourceBundle,
    holdings_blue: ResourceBundle
) -> tuple[ResourceBundle, ResourceBundle]:
    """
    Execute a trade. Per-resource totals are conserved.

    Returns
    -------
    holdings_red, holdings_blue : ResourceBundle
        Holdings after the exchange.

    Raises
    ------
    InfeasibleTrade
        If either side lacks the resources it is asked to give.
    """
    if not is_feasible(trade, holdings_red, holdings_blue):
        msg = f"Trade RED gives {trade.from_red} | BLUE gives {trade.from_blue}"
        msg += f" is not feasible with holdings RED: {holdings_red},"
        msg += f" BLUE: {holdings_blue}."
        raise InfeasibleTrade(msg)

    return (
        holdings_red - trade.from_red + trade.from_blue,
        holdings_blue - trade.from_blue + trade.from_red,
    )

def _seller_buyer_valuations(valuations: Iterable[Valuation]) -> tuple[Valuation, Valuation]:
    cost = [val for val in valuations if val.kind == COST_OF_PRODUCTION]
    willingness = [val for val in valuations if val.kind == WILLINGNESS_TO_PAY]
    if (len(cost) != 1) or (len(willingness) != 1):
        msg = "SellerBuyer needs exactly one cost_of_production and one"
        msg += f" willingness_to_pay valuation. Got {len(cost)} and {len(willingness)}."
        raise MissingValuation(msg)

    return cost[0], willingness[0]

def payoff(
    scenario_kind: str,
    player: str,
    initial: ResourceBundle,
    final: ResourceBundle,
    valuations: Iterable[Valuation],
    status: GameStatus,
    currency: Union[None, str] = None,
    good: str = GOOD
) -> Fraction:
    """
    Payoff of one player at the end of a game.

    ResourceExchange: net gain, total(final) - total(initial).
    Ultimatum: final Dollars if the split was accepted, else 0.
    SellerBuyer: buyer gets willingness - price, seller gets
    price - cost; both 0 without a sale. The price is the net currency
    received by the seller. If an accepted trade does not move the good,
    the valuation term for it is left out.

    Parameters
    ----------
    scenario_kind : str
        One of parameters.SCENARIO_KINDS.

    player : str
        RED or BLUE.

    initial, final : ResourceBundle
        The player's holdings at the start and at the end of the game.

    valuations : Iterable[Valuation]
        Private valuations. Only used for SellerBuyer.

    status : GameStatus
        Terminal status of the game.

    currency : Union[None, str]
        Currency resource. Defaults to Dollars for Ultimatum and ZUP for
        SellerBuyer.

    good : str
        Name of the traded object in SellerBuyer.

    Returns
    -------
    : Fraction
        Exact payoff.

    Raises
    ------
    MissingValuation
        If a SellerBuyer game lacks the cost or the willingness to pay.
    """
    if scenario_kind not in SCENARIO_KINDS:
        msg = f"'scenario_kind' must be in {SCENARIO_KINDS}! Got '{scenario_kind}'."
        raise ValueError(msg)

    if scenario_kind == RESOURCE_EXCHANGE:
        return Fraction(final.total() - initial.total())

    if scenario_kind == ULTIMATUM:
        currency = DOLLARS if currency is None else currency
        if status != GameStatus.ACCEPTED:
            return Fraction(0)

        return Fraction(final.get(currency))

    currency = ZUP if currency is None else currency
    cost, willingness = _seller_buyer_valuations(valuations)
    if status != GameStatus.ACCEPTED:
        return Fraction(0)

    if player == cost.player:
        price = final.get(currency) - initial.get(currency)
        good_left = final.get(good) < initial.get(good)
        return Fraction(price - (cost.amount if good_left else 0))

    elif player == willingness.player:
        price = initial.get(currency) - final.get(currency)
        good_arrived = final.get(good) > initial.get(good)
        return Fraction((willingness.amount if good_arrived else 0) - price)

    msg = f"Player '{player}' has no SellerBuyer valuation."
    raise MissingValuation(msg)

def classify_winner(
    scenario_kind: str,
    payoffs: dict,
    valuations: Iterable[Valuation] = ()
) -> str:
    """
    Classify the winner from the payoffs. When a SellerBuyer trade
    moves the good, comparing payoffs p - cost and willingness - p is
    the midpoint rule: the buyer wins iff the price is below the
    midpoint of cost and willingness, the seller iff it is above. A
    trade that moves only money is decided by the payoffs alone, and no
    sale is a tie.
    """
    if scenario_kind == SELLER_BUYER:
        _seller_buyer_valuations(valuations)

    if payoffs[RED] > payoffs[BLUE]:
        return RED
    elif payoffs[RED] < payoffs[BLUE]:
        return BLUE

    return TIE

def score(
    scenario_kind: str,
    status: GameStatus,
    initial_holdings: dict,
    final_holdings: dict,
    valuations: Iterable[Valuation],
    forfeited_by: Union[None, str] = None
) -> Outcome:
    """
    Build the Outcome of a finished game. FORFEIT and ABORTED games
    score 0 for both players, which is the no-deal payoff of every
    scenario.
    """
    valuations = tuple(valuations)
    if status in (GameStatus.FORFEIT, GameStatus.ABORTED):
        payoffs = {player: Fraction(0) for player in PLAYERS}
        return Outcome(
            status = status,
            final_holdings = dict(final_holdings),
            payoffs = payoffs,
            winner = TIE,
            forfeited_by = forfeited_by,
        )

    payoffs = {
        player: payoff(
            scenario_kind = scenario_kind,
            player = player,
            initial = initial_holdings[player],
            final = final_holdings[player],
            valuations = valuations,
            status = status,
        ) for player in PLAYERS
    }
    return Outcome(
        status = status,
        final_holdings = dict(final_holdings),
        payoffs = payoffs,
        winner = classify_winner(scenario_kind, payoffs, valuations),
    )
