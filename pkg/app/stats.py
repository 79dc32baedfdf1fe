"""Repeated-trial statistics of sampled outcome probabilities."""

import logging
from concurrent.futures import ThreadPoolExecutor

import pandas as pd

from .circuits import run
from .config import settings
from .errors import InvalidStateError
from .models import Circuit, TrialRow, TrialSummary, bitstrings
from .tomography import derive_seed, sample_counts

logger = logging.getLogger(__name__)

# Thread pool for independent trials
_executor = ThreadPoolExecutor(max_workers=settings.workers)

TABLE_COLUMNS = ["outcome", "mean", "sd", "max", "min", "trials", "shots", "seed"]


def trial_frame(circuit: Circuit, shots: int, trials: int, seed: int) -> pd.DataFrame:
    """Per-trial outcome frequencies; one row per trial, one column per outcome.

    Trial i samples with ``derive_seed(seed, i)``. Rows are ordered by trial
    index regardless of completion order.
    """
    if trials < 2:
        raise InvalidStateError(f"trials must be at least 2, got {trials}")
    state = run(circuit)
    tables = list(
        _executor.map(lambda i: sample_counts(state, shots, derive_seed(seed, i)), range(trials))
    )
    frame = pd.DataFrame(
        [t.frequencies() for t in tables],
        columns=bitstrings(circuit.n_qubits),
    )
    frame.index.name = "trial"
    return frame


def run_trials(circuit: Circuit, shots: int, trials: int, seed: int) -> list[TrialSummary]:
    """Mean, sample SD (n−1), max and min of each outcome's frequency over trials."""
    frame = trial_frame(circuit, shots, trials, seed)
    mean, sd = frame.mean(), frame.std(ddof=1)
    high, low = frame.max(), frame.min()
    logger.info(f"📈 [STATS] {trials} trials × {shots} shots on {circuit.n_qubits} qubits (seed {seed})")
    return [
        TrialSummary(
            outcome=outcome,
            mean=float(mean[outcome]),
            sd=float(sd[outcome]),
            max=float(high[outcome]),
            min=float(low[outcome]),
            trials=trials,
            shots=shots,
            seed=seed,
        )
        for outcome in frame.columns
    ]


def error_bar_table(summaries: list[TrialSummary]) -> pd.DataFrame:
    """Summaries as a DataFrame in export column order, sorted by outcome."""
    if not summaries:
        raise InvalidStateError("no trial summaries to tabulate")
    rows = [TrialRow(**vars(s)).model_dump() for s in summaries]
    return pd.DataFrame(rows, columns=TABLE_COLUMNS).sort_values("outcome", ignore_index=True)


def table_to_csv(table: pd.DataFrame) -> str:
    return table.to_csv(index=False, float_format="%.17g")


def table_to_rows(table: pd.DataFrame) -> list[TrialRow]:
    return [TrialRow(**record) for record in table.to_dict(orient="records")]
