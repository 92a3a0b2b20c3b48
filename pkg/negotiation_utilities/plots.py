from __future__ import annotations
import os, logging
from typing import Union, Tuple
import numpy as np
import matplotlib.pyplot as plt
import seaborn as sns
from .analysis import MetricTable

logger = logging.getLogger(__name__)

def _get_fig_and_ax(ax: Union[None, plt.Axes]) -> Tuple[bool, plt.Figure, plt.Axes]:
    """
    Return a matplotlib Figure and Axes on which to plot, and whether
    these existed previously.

    Parameters
    ----------
    ax : Union[None, plt.Axes]
        matplotlib Axes on which to plot. If None, plt.Figure and
        plt.Axes are generated by this function.

    Returns
    -------
    ax_input : bool
        True if ax was given.

    fig : plt.Figure

    ax : plt.Axes
    """
    if ax is None:
        fig, ax = plt.subplots()
        return False, fig, ax

    return True, ax.get_figure(), ax

def _finish(fig: plt.Figure, ax_input: bool, fname: Union[None, str], show: bool):
    if fname is not None:
        directory = os.path.dirname(fname)
        if directory:
            os.makedirs(directory, exist_ok=True)

        fig.savefig(fname=fname, dpi=300)
        logger.info(f"Plot saved as '{fname}'")

    if not ax_input:
        if show:
            plt.show()
        else:
            plt.close(fig)

def _as_float_matrix(matrix: list[list]) -> np.ndarray:
    """
    None (no decisive games, or a missing cell) becomes NaN.
    """
    return np.array(
        [[np.nan if value is None else float(value) for value in row] for row in matrix],
        dtype = float,
    )

def plot_metric_heatmap(
    table: MetricTable,
    metric: str = "win_rate",
    player: Union[None, str] = None,
    ax: Union[None, plt.Axes] = None,
    fname: Union[None, str] = None,
    show: bool = False
) -> plt.Axes:
    """
    Heatmap of a tournament metric. Rows are Player 2, columns are
    Player 1. Cells without data are left blank.

    Parameters
    ----------
    table : MetricTable
        Tournament metrics.

    metric : str
        'win_rate' or 'mean_payoff'.

    player : Union[None, str]
        Player the metric is reported for. Defaults to the table's
        reported player.

    ax : Union[None, plt.Axes]
        matplotlib Axes on which to plot. If None, plt.Figure and
        plt.Axes are generated in this function.

    fname : Union[None, str]
        Save the figure to this file if given.

    show : bool
        Show the figure if it was generated here.
    """
    ax_input, fig, ax = _get_fig_and_ax(ax)
    player = table.reported_player if player is None else player
    data = _as_float_matrix(table.matrix(metric, player))
    sns.heatmap(
        data = data,
        ax = ax,
        annot = True,
        fmt = ".2f",
        cmap = "viridis",
        vmin = 0 if metric == "win_rate" else None,
        vmax = 1 if metric == "win_rate" else None,
        xticklabels = table.agent_ids,
        yticklabels = table.agent_ids,
        mask = np.isnan(data),
    )
    ax.set_xlabel("Player 1")
    ax.set_ylabel("Player 2")
    ax.set_title(f"{table.kind}: {metric.replace('_', ' ')} of {player}")
    _finish(fig, ax_input, fname, show)
    return ax

def plot_acceptance_curve(
    curve: list[tuple],
    label: Union[None, str] = None,
    ax: Union[None, plt.Axes] = None,
    fname: Union[None, str] = None,
    show: bool = False
) -> plt.Axes:
    """
    Acceptance rate against offered amount, as returned by
    analysis.acceptance_curve.
    """
    ax_input, fig, ax = _get_fig_and_ax(ax)
    amounts = [amount for amount, _ in curve]
    rates = [float(rate) for _, rate in curve]
    line, = ax.step(amounts, rates, where="mid", label=label)
    ax.plot(amounts, rates, "o", color=line.get_color())
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("Offered amount")
    ax.set_ylabel("Acceptance rate")
    if label is not None:
        ax.legend()

    ax.grid()
    _finish(fig, ax_input, fname, show)
    return ax

def plot_pairs(
    pairs: list[tuple],
    rho = None,
    xlabel: str = "First proposal",
    ylabel: str = "Final price",
    ax: Union[None, plt.Axes] = None,
    fname: Union[None, str] = None,
    show: bool = False
) -> plt.Axes:
    """
    Scatter plot of (x, y) pairs from the anchoring or split-difference
    probes, with the rank correlation in the legend.
    """
    ax_input, fig, ax = _get_fig_and_ax(ax)
    x = [float(a) for a, _ in pairs]
    y = [float(b) for _, b in pairs]
    label = "rho = n/a" if rho is None else f"rho = {float(rho):.3f}"
    sns.scatterplot(x=x, y=y, ax=ax, label=label)
    if x:
        low = min(min(x), min(y))
        high = max(max(x), max(y))
        ax.plot([low, high], [low, high], linestyle="dashed", color="gray", linewidth=1)

    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    _finish(fig, ax_input, fname, show)
    return ax

def plot_tournament(table: MetricTable, directory: str) -> list[str]:
    """
    Save win_rate.png and payoff.png next to the tournament tables.
    """
    sns.set_theme(style="white")
    fnames = []
    for metric, name in (("win_rate", "win_rate.png"), ("mean_payoff", "payoff.png")):
        fname = os.path.join(directory, name)
        plot_metric_heatmap(table, metric=metric, fname=fname)
        fnames.append(fname)

    return fnames
