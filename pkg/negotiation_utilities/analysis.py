from __future__ import annotations
import os, math, logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union, Iterable
import numpy as np
from scipy.stats import rankdata
from scipy.special import comb
from .agents import AgentSpec
from .core import GameStatus, TIE
from .engine import run_many, derive_seed
from .negotiation_exceptions import (
    EmptyInput, LengthMismatch, DegenerateInput, NoAcceptedSales,
    NoEligibleSeries, EmptyDenominator, InvalidParams, InvalidVariant,
    EmptyAmounts, MixedScenarios
)
from .parameters import (
    RED, BLUE, PLAYERS, ULTIMATUM, SELLER_BUYER, ZUP,
    reported_player
)
from .scenarios import build

logger = logging.getLogger(__name__)

NOT_AVAILABLE = "n/a"

def _check_records(records: list, kind: Union[None, str] = None) -> str:
    """
    Check that records is non-empty and of a single scenario kind.

    Returns
    -------
    : str
        The common scenario kind.
    """
    if not records:
        msg = "No game records given."
        raise EmptyInput(msg)

    kinds = sorted({record.kind for record in records})
    if len(kinds) > 1:
        msg = f"Records of different scenario kinds cannot be aggregated: {kinds}."
        raise MixedScenarios(msg)

    if (kind is not None) and (kinds[0] != kind):
        msg = f"Expected {kind} records. Got {kinds[0]}."
        raise MixedScenarios(msg)

    return kinds[0]

def _completed(records: list) -> list:
    return [record for record in records if not record.aborted]

def win_rate(records: list, for_player: str) -> Union[None, Fraction]:
    """
    Fraction of decisive games won by for_player. Ties and aborted
    games are excluded.

    Parameters
    ----------
    records : list[GameRecord]
        Records of one scenario kind.

    for_player : str
        RED or BLUE.

    Returns
    -------
    : Union[None, Fraction]
        None if no game is decisive.

    Examples
    --------
    7 wins, 3 losses and 10 ties give 7/10.
    """
    _check_records(records)
    decisive = [
        record for record in _completed(records) if record.outcome.winner != TIE
    ]
    if not decisive:
        return None

    wins = sum(1 for record in decisive if record.outcome.winner == for_player)
    return Fraction(wins, len(decisive))

def mean_payoff(records: list, for_player: str) -> Fraction:
    """
    Mean payoff of for_player over every completed game, ties and
    no-deals included.
    """
    _check_records(records)
    completed = _completed(records)
    if not completed:
        msg = "Every game was aborted; no payoff to average."
        raise EmptyInput(msg)

    return Fraction(sum(record.outcome.payoffs[for_player] for record in completed), len(completed))

def spearman(x: Iterable, y: Iterable) -> Union[Fraction, float]:
    """
    Spearman rank correlation: the Pearson correlation of the average
    ranks of x and y.

    Parameters
    ----------
    x, y : Iterable
        Real values of equal length, at least 2.

    Returns
    -------
    : Union[Fraction, float]
        Exact Fraction when the correlation is rational, float
        otherwise.

    Raises
    ------
    LengthMismatch
        If x and y differ in length.

    EmptyInput
        If there are fewer than 2 values.

    DegenerateInput
        If x or y is constant.

    Examples
    --------
    >>> spearman([1, 2, 3, 4], [2, 1, 4, 3])
    Fraction(3, 5)
    """
    x = list(x)
    y = list(y)
    if len(x) != len(y):
        msg = f"spearman needs vectors of equal length. Got {len(x)} and {len(y)}."
        raise LengthMismatch(msg)

    if len(x) < 2:
        msg = f"spearman needs at least 2 values. Got {len(x)}."
        raise EmptyInput(msg)

    """
    Average ranks are integers or halves, so they are exact as
    Fractions.
    """
    rank_x = [Fraction(rank) for rank in rankdata(np.asarray(x, dtype=float), method="average")]
    rank_y = [Fraction(rank) for rank in rankdata(np.asarray(y, dtype=float), method="average")]
    mean_x = sum(rank_x)/len(rank_x)
    mean_y = sum(rank_y)/len(rank_y)
    dx = [rank - mean_x for rank in rank_x]
    dy = [rank - mean_y for rank in rank_y]
    var_x = sum(d*d for d in dx)
    var_y = sum(d*d for d in dy)
    if (var_x == 0) or (var_y == 0):
        msg = "spearman is undefined for a constant vector."
        raise DegenerateInput(msg)

    cov = sum(a*b for a, b in zip(dx, dy))
    rho_squared = cov*cov/(var_x*var_y)
    numerator_root = math.isqrt(rho_squared.numerator)
    denominator_root = math.isqrt(rho_squared.denominator)
    if (numerator_root**2 == rho_squared.numerator) and (denominator_root**2 == rho_squared.denominator):
        rho = Fraction(numerator_root, denominator_root)
        return rho if cov >= 0 else -rho

    return float(cov)/math.sqrt(float(var_x)*float(var_y))

def _safe_spearman(x: list, y: list) -> Union[None, Fraction, float]:
    try:
        return spearman(x, y)
    except (DegenerateInput, EmptyInput) as err:
        logger.info(f"Rank correlation undefined: {err}")
        return None

def _price(trade, currency: str) -> int:
    """
    Net currency paid by BLUE to RED.
    """
    return trade.from_blue.get(currency) - trade.from_red.get(currency)

@dataclass(frozen=True)
class ProposalSeries:
    """
    Price proposals of one game in the order they were made.

    Attributes
    ----------
    prices : tuple[int, ...]
        Every proposed price. In a regular SellerBuyer game the seller
        (RED) makes the odd-numbered proposals.

    authors : tuple[str, ...]
        Author of each proposal.

    final_price : Union[None, int]
        Accepted price, None if there was no sale.
    """
    prices: tuple
    authors: tuple
    final_price: Union[None, int] = None
    valuations: dict = field(default_factory=dict)

    @classmethod
    def from_record(cls, record) -> ProposalSeries:
        currency = record.config.currency or ZUP
        prices = []
        authors = []
        standing = None
        for entry in record.transcript:
            if entry.message.trade is not None:
                standing = _price(entry.message.trade, currency)
                prices.append(standing)
                authors.append(entry.player)

        final_price = None
        if record.outcome.status == GameStatus.ACCEPTED:
            final_price = standing

        return cls(
            prices = tuple(prices),
            authors = tuple(authors),
            final_price = final_price,
            valuations = {
                valuation.player: valuation.amount for valuation in record.config.valuations
            },
        )

    @property
    def alternating(self) -> bool:
        """
        True if the seller opened and the players took turns.
        """
        return all(
            author == (RED if (i%2 == 0) else BLUE) for i, author in enumerate(self.authors)
        )

def anchoring_probe(records: list) -> tuple[list[tuple[int, int]], Union[None, Fraction, float]]:
    """
    Pair the first proposed price of every sale with the accepted
    price and correlate them.

    Returns
    -------
    pairs : list[tuple[int, int]]
        (first proposal, final price) per accepted sale.

    rho : Union[None, Fraction, float]
        Spearman correlation, None if undefined.

    Raises
    ------
    NoAcceptedSales
        If no record ends in a sale.
    """
    _check_records(records, SELLER_BUYER)
    pairs = []
    for record in _completed(records):
        series = ProposalSeries.from_record(record)
        if (series.final_price is not None) and series.prices:
            pairs.append((series.prices[0], series.final_price))

    if not pairs:
        msg = f"None of the {len(records)} records ends in a sale."
        raise NoAcceptedSales(msg)

    return pairs, _safe_spearman([p[0] for p in pairs], [p[1] for p in pairs])

def anchoring_probe_by_condition(records_by_condition: dict) -> dict:
    """
    anchoring_probe per condition and over all conditions pooled
    (key 'pooled'). Conditions without sales map to ([], None).
    """
    res = {}
    pooled = []
    for condition, records in records_by_condition.items():
        pooled += records
        try:
            res[condition] = anchoring_probe(records)
        except NoAcceptedSales:
            res[condition] = ([], None)

    res["pooled"] = anchoring_probe(pooled)
    return res

def split_difference_probe(records: list) -> tuple[list[tuple[Fraction, int]], Union[None, Fraction, float]]:
    """
    Compare every counter-proposal with the mean of the two proposals
    before it, pooled over all games with at least three proposals.

    Returns
    -------
    pairs : list[tuple[Fraction, int]]
        ((p[t] + p[t-1])/2, p[t+1]) pairs.

    rho : Union[None, Fraction, float]
        Spearman correlation of the pairs, None if undefined.
    """
    _check_records(records)
    pairs = []
    for record in _completed(records):
        prices = ProposalSeries.from_record(record).prices
        if len(prices) < 3:
            continue

        for t in range(1, len(prices) - 1):
            pairs.append((Fraction(prices[t] + prices[t - 1], 2), prices[t + 1]))

    if not pairs:
        msg = "No game has three or more proposals."
        raise NoEligibleSeries(msg)

    return pairs, _safe_spearman([p[0] for p in pairs], [p[1] for p in pairs])

def bad_counteroffer_counts(records: list) -> tuple[int, int]:
    """
    Returns
    -------
    k, n : tuple[int, int]
        n is the number of games where the buyer answered the seller's
        opening proposal with a counter-proposal, k how many of those
        counter-proposals ask for a higher price than the opening.
    """
    _check_records(records, SELLER_BUYER)
    k = n = 0
    for record in _completed(records):
        series = ProposalSeries.from_record(record)
        if (len(series.prices) < 2) or (series.authors[:2] != (RED, BLUE)):
            continue

        n += 1
        if series.prices[1] > series.prices[0]:
            k += 1

    return k, n

def bad_counteroffer_rate(records: list) -> Fraction:
    """
    Probability that the buyer counters the opening price with a
    higher one.

    Raises
    ------
    EmptyDenominator
        If the buyer never counter-proposed.
    """
    k, n = bad_counteroffer_counts(records)
    if n == 0:
        msg = "The buyer made no counter-proposal in any game."
        raise EmptyDenominator(msg)

    return Fraction(k, n)

def binomial_test_one_tailed(k: int, n: int, p0: Union[Fraction, float, str]) -> Fraction:
    """
    Exact one-tailed binomial test, P(X >= k) for X ~ Binomial(n, p0).

    Parameters
    ----------
    k : int
        Number of successes, 0 <= k <= n.

    n : int
        Number of trials.

    p0 : Union[Fraction, float, str]
        Success probability under the null hypothesis, 0 < p0 < 1.
        Floats are read through their decimal representation.

    Examples
    --------
    >>> binomial_test_one_tailed(8, 10, 0.5)
    Fraction(7, 128)
    """
    if isinstance(p0, float):
        p0 = Fraction(str(p0))
    try:
        p0 = Fraction(p0)
    except (TypeError, ValueError) as err:
        msg = f"p0 must be a number. Got {p0!r}."
        raise InvalidParams(msg) from err

    if not (0 < p0 < 1):
        msg = f"p0 must satisfy 0 < p0 < 1. Got {p0}."
        raise InvalidParams(msg)

    if (not isinstance(k, (int, np.integer))) or (not isinstance(n, (int, np.integer))) or not (0 <= k <= n):
        msg = f"k and n must be integers with 0 <= k <= n. Got k = {k}, n = {n}."
        raise InvalidParams(msg)

    return sum(
        (comb(int(n), i, exact=True)*p0**i*(1 - p0)**(n - i) for i in range(int(k), int(n) + 1)),
        Fraction(0),
    )

def acceptance_curve(
    decider_spec: AgentSpec,
    variant: str,
    amounts: Iterable[int],
    trials: int,
    seed: int = 0,
    units: Union[None, int] = None,
    processes: Union[None, int] = None
) -> list[tuple[int, Fraction]]:
    """
    Estimate how often a decider accepts each offered amount.

    A controlled proposer offers the decider the same amount in every
    game. In classical_2turn, RED proposes and the decider (BLUE)
    answers. In three_turn, the decider is RED: it opens, the
    controlled BLUE proposes, and RED decides on the last turn.

    Parameters
    ----------
    decider_spec : AgentSpec
        The agent whose acceptance is measured.

    variant : str
        'classical_2turn' or 'three_turn'.

    amounts : Iterable[int]
        Offered amounts, each in [0, units].

    trials : int
        Games per amount.

    units : Union[None, int]
        Amount to split. Defaults to max(amounts).

    Returns
    -------
    : list[tuple[int, Fraction]]
        (amount, fraction of the games where the offer was accepted).
    """
    if variant not in (allowed := ["classical_2turn", "three_turn"]):
        msg = f"Acceptance curves need a variant in {allowed}. Got '{variant}'."
        raise InvalidVariant(msg)

    amounts = list(amounts)
    if not amounts:
        msg = "No amounts given."
        raise EmptyAmounts(msg)

    if trials < 1:
        msg = f"'trials' must be at least 1. Got {trials}."
        raise InvalidParams(msg)

    units = max(amounts) if units is None else units
    if any(not (0 <= amount <= units) for amount in amounts):
        msg = f"Every amount must be in [0, {units}]. Got {amounts}."
        raise InvalidParams(msg)

    jobs = []
    for amount_index, amount in enumerate(amounts):
        config = build(ULTIMATUM, {"amount": units, "variant": variant, "fixed_offer": amount})
        controlled = AgentSpec(id="controlled-proposer", strategy="fixed_offer")
        if variant == "classical_2turn":
            spec1, spec2 = controlled, decider_spec
        else:
            spec1, spec2 = decider_spec, controlled

        for trial in range(trials):
            jobs.append((config, spec1, spec2, derive_seed(seed, amount_index, trial)))

    records = run_many(jobs, processes=processes)
    res = []
    for amount_index, amount in enumerate(amounts):
        cell = records[amount_index*trials:(amount_index + 1)*trials]
        accepted = sum(1 for record in cell if record.outcome.status == GameStatus.ACCEPTED)
        res.append((amount, Fraction(accepted, trials)))

    return res

def split_scaling_sweep(
    amounts: Iterable[int],
    agent1_spec: AgentSpec,
    agent2_spec: AgentSpec,
    games_per_amount: int,
    seed: int = 0,
    max_rounds: Union[None, int] = None,
    processes: Union[None, int] = None
) -> list[tuple[int, Union[None, Fraction]]]:
    """
    Mean share of the endowment kept by Player 1 in multi-turn
    ultimatum games, per endowment amount.

    Returns
    -------
    : list[tuple[int, Union[None, Fraction]]]
        (amount, mean fraction). None when every game of an amount
        was aborted.
    """
    amounts = list(amounts)
    if not amounts:
        msg = "No amounts given."
        raise EmptyAmounts(msg)

    if games_per_amount < 1:
        msg = f"'games_per_amount' must be at least 1. Got {games_per_amount}."
        raise InvalidParams(msg)

    if any(amount < 1 for amount in amounts):
        msg = f"Every amount must be positive. Got {amounts}."
        raise InvalidParams(msg)

    jobs = []
    for amount_index, amount in enumerate(amounts):
        overrides = {"amount": amount, "variant": "multi_turn"}
        if max_rounds is not None:
            overrides["max_rounds"] = max_rounds

        config = build(ULTIMATUM, overrides)
        for game in range(games_per_amount):
            jobs.append((config, agent1_spec, agent2_spec, derive_seed(seed, amount_index, game)))

    records = run_many(jobs, processes=processes)
    res = []
    for amount_index, amount in enumerate(amounts):
        cell = _completed(records[amount_index*games_per_amount:(amount_index + 1)*games_per_amount])
        if not cell:
            res.append((amount, None))
            continue

        shares = [record.outcome.payoffs[RED]/amount for record in cell]
        res.append((amount, sum(shares, Fraction(0))/len(shares)))

    return res

def denomination_scaling_sweep(
    scales: Iterable[int],
    seller_spec: AgentSpec,
    buyer_spec: AgentSpec,
    games_per_scale: int,
    seed: int = 0,
    overrides: Union[None, dict] = None,
    processes: Union[None, int] = None
) -> list[tuple[int, Union[None, Fraction]]]:
    """
    Mean fraction of the buyer's ZUP budget left after SellerBuyer
    games whose currency amounts are multiplied by each scale.
    """
    scales = list(scales)
    if not scales:
        msg = "No scales given."
        raise EmptyAmounts(msg)

    if games_per_scale < 1:
        msg = f"'games_per_scale' must be at least 1. Got {games_per_scale}."
        raise InvalidParams(msg)

    jobs = []
    for scale_index, scale in enumerate(scales):
        config = build(SELLER_BUYER, {**(overrides or {}), "scale": scale})
        for game in range(games_per_scale):
            jobs.append((config, seller_spec, buyer_spec, derive_seed(seed, scale_index, game)))

    records = run_many(jobs, processes=processes)
    res = []
    for scale_index, scale in enumerate(scales):
        cell = _completed(records[scale_index*games_per_scale:(scale_index + 1)*games_per_scale])
        if not cell:
            res.append((scale, None))
            continue

        retained = [
            Fraction(
                record.outcome.final_holdings[BLUE].get(ZUP),
                record.config.endowments[BLUE].get(ZUP),
            ) for record in cell
        ]
        res.append((scale, sum(retained, Fraction(0))/len(retained)))

    return res

@dataclass(frozen=True)
class CellMetrics:
    """
    Metrics of one ordered agent pair (Player 1, Player 2).
    """
    player1: str
    player2: str
    games: int
    aborted: int
    wins: dict
    ties: int
    mean_payoff: dict

    def win_rate(self, player: str) -> Union[None, Fraction]:
        decisive = self.wins[RED] + self.wins[BLUE]
        if decisive == 0:
            return None

        return Fraction(self.wins[player], decisive)

@dataclass(frozen=True)
class MetricTable:
    """
    Tournament metrics per ordered agent pair. Matrices have one row
    per Player 2 and one column per Player 1, both in agent_ids order.
    """
    kind: str
    agent_ids: tuple
    cells: dict
    reported_player: str

    def matrix(self, metric: str, player: Union[None, str] = None) -> list[list]:
        """
        metric is 'win_rate' or 'mean_payoff'. Missing cells are None.
        """
        if metric not in (allowed := ["win_rate", "mean_payoff"]):
            msg = f"'metric' must be in {allowed}! Got '{metric}'."
            raise ValueError(msg)

        player = self.reported_player if player is None else player
        res = []
        for player2 in self.agent_ids:
            row = []
            for player1 in self.agent_ids:
                cell = self.cells.get((player1, player2))
                if cell is None:
                    row.append(None)
                elif metric == "win_rate":
                    row.append(cell.win_rate(player))
                else:
                    row.append(cell.mean_payoff[player])

            res.append(row)

        return res

    def write(self, directory: str):
        """
        Write win_rate.csv, payoff.csv and summary.txt to directory.
        """
        for metric, fname in (("win_rate", "win_rate.csv"), ("mean_payoff", "payoff.csv")):
            rows = [
                [player2] + [format_value(value) for value in row]
                for player2, row in zip(self.agent_ids, self.matrix(metric))
            ]
            write_csv(
                path = os.path.join(directory, fname),
                header = ["player2 \\ player1"] + list(self.agent_ids),
                rows = rows,
            )

        with open(os.path.join(directory, "summary.txt"), "w") as outfile:
            outfile.write(self.summary())

    def summary(self) -> str:
        games = sum(cell.games for cell in self.cells.values())
        aborted = sum(cell.aborted for cell in self.cells.values())
        msg = f"Scenario: {self.kind}\n"
        msg += f"Reported player: {self.reported_player} (rows: Player 2, columns: Player 1)\n"
        msg += f"Games: {games}, completed: {games - aborted}, aborted: {aborted}\n"
        for metric, title in (("win_rate", "Win rate"), ("mean_payoff", "Mean payoff")):
            msg += f"\n{title} of {self.reported_player}\n"
            width = max([len(agent_id) for agent_id in self.agent_ids] + [10])
            msg += " "*width + "".join(f"{agent_id:>{width + 2}}" for agent_id in self.agent_ids) + "\n"
            for player2, row in zip(self.agent_ids, self.matrix(metric)):
                msg += f"{player2:<{width}}"
                msg += "".join(f"{format_value(value):>{width + 2}}" for value in row) + "\n"

        msg += "\nCells (Player 1 vs Player 2)\n"
        for key in sorted(self.cells):
            cell = self.cells[key]
            msg += f"{cell.player1} vs {cell.player2}: games {cell.games},"
            msg += f" aborted {cell.aborted}, wins RED {cell.wins[RED]},"
            msg += f" wins BLUE {cell.wins[BLUE]}, ties {cell.ties},"
            msg += f" mean payoff RED {format_value(cell.mean_payoff[RED])},"
            msg += f" BLUE {format_value(cell.mean_payoff[BLUE])}\n"

        return msg

def metric_table(records: list) -> MetricTable:
    """
    Aggregate records per ordered agent pair. Aborted games are
    counted but excluded from every metric.
    """
    kind = _check_records(records)
    grouped = {}
    for record in records:
        key = (record.agent_specs[0].id, record.agent_specs[1].id)
        grouped.setdefault(key, []).append(record)

    cells = {}
    for (player1, player2), cell_records in grouped.items():
        completed = _completed(cell_records)
        wins = {
            player: sum(1 for record in completed if record.outcome.winner == player)
            for player in PLAYERS
        }
        if completed:
            payoffs = {player: mean_payoff(completed, player) for player in PLAYERS}
        else:
            payoffs = {player: None for player in PLAYERS}

        cells[(player1, player2)] = CellMetrics(
            player1 = player1,
            player2 = player2,
            games = len(cell_records),
            aborted = len(cell_records) - len(completed),
            wins = wins,
            ties = len(completed) - wins[RED] - wins[BLUE],
            mean_payoff = payoffs,
        )

    agent_ids = sorted({agent_id for key in cells for agent_id in key})
    return MetricTable(
        kind = kind,
        agent_ids = tuple(agent_ids),
        cells = cells,
        reported_player = reported_player[kind],
    )

def format_value(value) -> str:
    """
    Report formatting: None as 'n/a', rationals with 6 decimals.
    """
    if value is None:
        return NOT_AVAILABLE
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(value)
    if isinstance(value, (Fraction, float, np.floating)):
        return f"{float(value):.6f}"

    return str(value)

def format_exact(value) -> str:
    if value is None:
        return NOT_AVAILABLE
    if isinstance(value, Fraction):
        return str(value)

    return format_value(value)

def write_csv(path: str, header: list, rows: list):
    """
    Write a table of string cells with a header row.
    """
    table = np.array([[str(cell) for cell in row] for row in rows], dtype=str)
    if table.size == 0:
        table = table.reshape(0, len(header))

    np.savetxt(
        fname = path,
        X = table,
        fmt = "%s",
        delimiter = ",",
        header = ",".join(header),
        comments = "",
    )
