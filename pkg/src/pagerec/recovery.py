"""Windowed imputation and online one-step-ahead prediction.

Offline: split the series into length-T windows, fill gaps, normalize each
channel block into [-1, 1], denoise the stacked matrix, reshape back and
undo the block normalization.

Online: denoise the trailing window the same way, regress the last matrix
row on the other rows (no intercept), then apply the coefficients to the
rows shifted down by one sample. The last column of each channel block of
that product is the channel's next-sample prediction. The regression runs in
the normalized domain, which makes predictions equivariant to constant
shifts of the data.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import ChannelSeries, Dataset, FillPolicy, locf_fill
from .errors import ConfigError, ShapeError
from .matrices import (
    MatrixVariant,
    StackedMatrix,
    hankel_entries,
    page_entries,
    antidiagonal_means,
)
from .svt import OsvtOutcome, osvt_estimate

__all__ = [
    "RecoveryConfig",
    "ForecastModel",
    "RecoveryReport",
    "impute_offline",
    "learn_forecast",
    "predict_next",
    "predict_stream",
]


@dataclass(frozen=True)
class RecoveryConfig:
    """Hyperparameters for imputation and prediction.

    Defaults suit offline imputation of long archives; use
    :meth:`online` for streaming prediction (short window, small L).
    refresh_every re-learns the forecast coefficients every s steps
    (1 = every step).
    """

    L: int = 10
    T: int = 54000
    variant: MatrixVariant = MatrixVariant.PAGE
    overwrite_observed: bool = True
    fill: FillPolicy = FillPolicy.LOCF
    refresh_every: int = 1

    def __post_init__(self):
        if self.L < 2:
            raise ConfigError(f"L must be at least 2, got {self.L}")
        if self.T < self.L:
            raise ConfigError(f"L must lie in [2, T]: L={self.L}, T={self.T}")
        if self.variant is MatrixVariant.PAGE and self.T % self.L:
            raise ConfigError(
                f"window length T={self.T} must be divisible by L={self.L} "
                "for the page variant"
            )
        if self.refresh_every < 1:
            raise ConfigError("refresh_every must be a positive integer")

    @classmethod
    def online(cls, L: int = 5, T: int = 30, **kwargs) -> "RecoveryConfig":
        return cls(L=L, T=T, **kwargs)

    def echo(self) -> dict:
        return {
            "L": self.L,
            "T": self.T,
            "variant": self.variant.value,
            "overwrite_observed": self.overwrite_observed,
            "fill": self.fill.value,
            "refresh_every": self.refresh_every,
        }


@dataclass(frozen=True)
class ForecastModel:
    """Least-squares coefficients expressing the last matrix row as a
    combination of the first L-1 rows."""

    beta: np.ndarray
    residual_norm: float


@dataclass
class RecoveryReport:
    """Bookkeeping for one recovery run.

    kept_rank has one entry per processed window (offline) or per step
    (online); step_seconds the matching wall times. mape/mape_excluded are
    filled in by evaluation harnesses when ground truth is available.
    """

    config: dict
    kept_rank: list[int] = field(default_factory=list)
    step_seconds: list[float] = field(default_factory=list)
    trimmed_tail: int = 0
    seed: int | None = None
    mape: dict[str, float] = field(default_factory=dict)
    mape_excluded: dict[str, int] = field(default_factory=dict)

    @property
    def median_step_seconds(self) -> float:
        if not self.step_seconds:
            raise ValueError("no timings recorded")
        return float(np.median(self.step_seconds))

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "config": dict(self.config),
            "kept_rank": list(self.kept_rank),
            "trimmed_tail": self.trimmed_tail,
            "seed": self.seed,
            "mape": dict(self.mape),
            "mape_excluded": dict(self.mape_excluded),
        }
        if include_timing and self.step_seconds:
            out["median_step_seconds"] = self.median_step_seconds
            out["total_seconds"] = float(np.sum(self.step_seconds))
        return out


# ---------------------------------------------------------------------------
# Shared window engine (array level, hot path for the stream loop)
# ---------------------------------------------------------------------------

def _block_scales(filled: np.ndarray) -> list[tuple[float, float]]:
    """Per-channel affine normalization (mid, half); constant rows pass
    through with the identity map."""
    scales = []
    for row in filled:
        lo = row.min()
        hi = row.max()
        if hi > lo:
            scales.append((0.5 * (lo + hi), 0.5 * (hi - lo)))
        else:
            scales.append((0.0, 1.0))
    return scales


def _denoise_window(
    values: np.ndarray,
    masks: np.ndarray | None,
    cfg: RecoveryConfig,
) -> tuple[np.ndarray, np.ndarray, list[tuple[float, float]], OsvtOutcome]:
    """Fill, normalize, stack, threshold, reshape one (N, W) window.

    Returns (denoised values (N, W), denoised stacked entries in the
    normalized domain, per-channel scales, estimation outcome).
    """
    N, W = values.shape
    if masks is None:
        filled = values
    else:
        filled = np.empty_like(values)
        for i in range(N):
            filled[i] = locf_fill(values[i], masks[i])
    scales = _block_scales(filled)
    make = page_entries if cfg.variant is MatrixVariant.PAGE else hankel_entries
    blocks = []
    for i in range(N):
        mid, half = scales[i]
        blocks.append(make((filled[i] - mid) / half, cfg.L))
    outcome = osvt_estimate(np.hstack(blocks))
    D = outcome.estimate
    cols = blocks[0].shape[1]
    denoised = np.empty_like(values)
    for i in range(N):
        block = D[:, i * cols:(i + 1) * cols]
        if cfg.variant is MatrixVariant.PAGE:
            w = block.T.reshape(-1)
        else:
            w = antidiagonal_means(block, W)
        mid, half = scales[i]
        denoised[i] = w * half + mid
    return denoised, D, scales, outcome


def _learn_beta(entries: np.ndarray) -> ForecastModel:
    if entries.shape[0] < 2:
        raise ShapeError("need at least two rows to learn a forecast")
    if entries.shape[1] < 1:
        raise ShapeError("need at least one column to learn a forecast")
    G = entries[:-1]
    H = entries[-1]
    beta, _, _, _ = np.linalg.lstsq(G.T, H, rcond=None)
    residual = float(np.linalg.norm(G.T @ beta - H))
    return ForecastModel(beta=beta, residual_norm=residual)


def learn_forecast(matrix: StackedMatrix) -> ForecastModel:
    """Fit the last row of a denoised stacked matrix as a linear combination
    of its first L-1 rows (minimum-norm least squares over the columns)."""
    return _learn_beta(matrix.entries)


# ---------------------------------------------------------------------------
# Offline imputation
# ---------------------------------------------------------------------------

def _window_spans(n: int, cfg: RecoveryConfig) -> tuple[list[tuple[int, int]], int]:
    """Full-length windows plus a trailing short window trimmed to a multiple
    of L; returns the spans and the length of the untouched tail."""
    spans = [(s, s + cfg.T) for s in range(0, n - cfg.T + 1, cfg.T)]
    done = spans[-1][1] if spans else 0
    remainder = n - done
    short = (remainder // cfg.L) * cfg.L
    if short >= cfg.L:
        spans.append((done, done + short))
        done += short
    return spans, n - done


def impute_offline(data: Dataset, cfg: RecoveryConfig) -> tuple[Dataset, RecoveryReport]:
    """Denoise and impute a recorded dataset window by window.

    Every sample inside a processed window gets an estimate (observed ones
    are restored afterwards when overwrite_observed is False). A trailing
    remainder shorter than L is passed through untouched and counted in the
    report, with its original mask retained.
    """
    n = len(data)
    if n < cfg.T:
        raise ShapeError(f"dataset length {n} is shorter than the window T={cfg.T}")
    values = data.values_matrix()
    masks = data.masks_matrix()
    spans, tail = _window_spans(n, cfg)

    out = values.copy()
    out_masks = masks.copy()
    report = RecoveryReport(config=cfg.echo(), trimmed_tail=tail)
    for start, stop in spans:
        t0 = time.perf_counter()
        denoised, _, _, outcome = _denoise_window(
            values[:, start:stop], masks[:, start:stop], cfg
        )
        if not cfg.overwrite_observed:
            obs = masks[:, start:stop]
            denoised[obs] = values[:, start:stop][obs]
        out[:, start:stop] = denoised
        out_masks[:, start:stop] = True
        report.kept_rank.append(outcome.kept_rank)
        report.step_seconds.append(time.perf_counter() - t0)
    return data.with_values(out, out_masks), report


# ---------------------------------------------------------------------------
# Online prediction
# ---------------------------------------------------------------------------

def _predict_window(
    values: np.ndarray,
    masks: np.ndarray | None,
    cfg: RecoveryConfig,
    model: ForecastModel | None,
) -> tuple[np.ndarray, ForecastModel, OsvtOutcome]:
    denoised_unused, D, scales, outcome = _denoise_window(values, masks, cfg)
    if model is None:
        model = _learn_beta(D)
    shifted = model.beta @ D[1:]
    cols = D.shape[1] // values.shape[0]
    preds = np.empty(values.shape[0])
    for i in range(values.shape[0]):
        mid, half = scales[i]
        preds[i] = shifted[(i + 1) * cols - 1] * half + mid
    return preds, model, outcome


def predict_next(
    window: Dataset,
    cfg: RecoveryConfig,
    model: ForecastModel | None = None,
) -> tuple[dict[str, float], ForecastModel]:
    """Predict each channel's next sample from a length-T trailing window.

    Pass a previously returned model to reuse its coefficients; by default
    they are re-learned from this window.
    """
    if len(window) != cfg.T:
        raise ShapeError(f"window length {len(window)} != configured T={cfg.T}")
    preds, model, _ = _predict_window(
        window.values_matrix(), window.masks_matrix(), cfg, model
    )
    return dict(zip(window.ids, preds)), model


def predict_stream(data: Dataset, cfg: RecoveryConfig) -> tuple[Dataset, RecoveryReport]:
    """Replay a recorded dataset as a stream of one-step-ahead predictions.

    For every step j the window [j, j+T) is denoised and the sample at index
    j+T is predicted for every channel, so the result aligns with
    data.timestamps[T:]. Coefficients are re-learned every
    cfg.refresh_every steps.
    """
    n = len(data)
    steps = n - cfg.T
    if steps < 1:
        raise ShapeError(f"dataset length {n} must exceed the window T={cfg.T}")
    values = data.values_matrix()
    masks = data.masks_matrix()
    all_observed = bool(masks.all())

    preds = np.empty((values.shape[0], steps))
    report = RecoveryReport(config=cfg.echo())
    model: ForecastModel | None = None
    for j in range(steps):
        t0 = time.perf_counter()
        reuse = model if j % cfg.refresh_every else None
        w_masks = None if all_observed else masks[:, j:j + cfg.T]
        preds[:, j], model, outcome = _predict_window(
            values[:, j:j + cfg.T], w_masks, cfg, reuse
        )
        report.step_seconds.append(time.perf_counter() - t0)
        report.kept_rank.append(outcome.kept_rank)

    t_pred = data.timestamps[cfg.T:]
    channels = tuple(
        ChannelSeries(
            c.channel_id, c.kind, t_pred, preds[i], np.ones(steps, dtype=bool)
        )
        for i, c in enumerate(data.channels)
    )
    return Dataset(channels, data.rate_fps), report
