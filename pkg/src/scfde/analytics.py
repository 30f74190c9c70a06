"""Limiting post-SNR formulas and the chi-square statistics behind them.

Averaged over the fading ensemble (and for block lengths and channel
orders large enough for per-block spectral averages to self-average),
the zero-forcing receivers reach SNRs that no longer depend on the
channel: the LE variants through E[1/chi-square] and the DFE variants
through exp(E[ln chi-square]), with the widely linear family seeing
twice the degrees of freedom. MMSE variants have no closed form; a
Monte Carlo evaluation of the same log-average is provided instead.

All SNRs here are linear ratios; gaps are in dB against the matched
filter bound N_r * sigma_x^2 / sigma_n^2 (doubled for real alphabets,
where only the real noise component matters).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import RngStream, as_generator

__all__ = [
    "EULER_GAMMA",
    "LIMIT_RECEIVERS",
    "GapRow",
    "GapTable",
    "harmonic",
    "expected_log_chisq",
    "inverse_chisq_mean",
    "inverse_chisq_mean_var",
    "limit_snr",
    "gap_to_mfb_db",
    "gap_table",
    "mmse_dfe_post_snr_from_gains",
    "mmse_dfe_limit_snr_mc",
]

EULER_GAMMA = float(np.euler_gamma)

# the four receivers with closed-form limits, in Table order
LIMIT_RECEIVERS = ("conv-zf-le", "conv-zf-dfe", "wl-zf-le", "wl-zf-dfe")


def harmonic(n: int) -> float:
    """H_n = sum_{m=1}^{n} 1/m, with H_0 = 0."""
    if n < 0:
        raise ValueError("harmonic number needs n >= 0")
    return float(np.sum(1.0 / np.arange(1, n + 1)))


def expected_log_chisq(n_r: int) -> float:
    """E[ln X] for X a sum of n_r unit-mean exponentials: -gamma + H_{n_r-1}."""
    if n_r < 1:
        raise ValueError("n_r must be >= 1")
    return -EULER_GAMMA + harmonic(n_r - 1)


def inverse_chisq_mean(n_r: int) -> float:
    """E[1/S] for S a sum of 2 n_r unit-mean exponentials: 1/(2 n_r - 1)."""
    if n_r < 1:
        raise ValueError("n_r must be >= 1")
    return 1.0 / (2 * n_r - 1)


def inverse_chisq_mean_var(n_r: int):
    """(mean, variance) of 1/S; the variance exists only for n_r > 1.

    Var[1/S] = 1/(2 (2 n_r - 1)^2 (n_r - 1)), e.g. 1/18 at n_r = 2.
    """
    if n_r < 2:
        raise ValueError("variance of 1/S is unbounded for n_r = 1")
    mean = inverse_chisq_mean(n_r)
    return mean, 1.0 / (2.0 * (2 * n_r - 1) ** 2 * (n_r - 1))


def _canonical(receiver: str) -> str:
    key = receiver.strip().lower()
    if key.startswith("conv-"):
        key = key[5:]
    if "mmse" in key:
        raise ValueError(
            f"{receiver!r} has no closed form; use the Monte Carlo "
            "reference mmse_dfe_limit_snr_mc"
        )
    if key not in ("zf-le", "zf-dfe", "wl-zf-le", "wl-zf-dfe", "mfb"):
        raise ValueError(f"unknown receiver {receiver!r} for limit formulas")
    return key


def limit_snr(receiver: str, n_r: int, sigma_x_sq: float = 1.0,
              sigma_n_sq: float = 1.0, real_modulation: bool = False) -> float:
    """Channel-independent limiting post-SNR of a ZF receiver (or the MFB).

    Conventional formulas double for real alphabets (the real noise
    component carries half the power); the widely linear formulas are
    real-alphabet quantities already and never double.
    """
    if n_r < 1:
        raise ValueError("n_r must be >= 1")
    if sigma_x_sq <= 0 or sigma_n_sq <= 0:
        raise ValueError("variances must be positive")
    key = _canonical(receiver)
    r = sigma_x_sq / sigma_n_sq
    double = 2.0 if real_modulation else 1.0
    if key == "mfb":
        return double * n_r * r
    if key == "zf-le":
        if n_r == 1:
            raise ValueError(
                "conventional ZF-LE has no finite limit for N_r=1 "
                "(residual noise 1/||h(k)||^2 has unbounded mean)"
            )
        return double * (n_r - 1) * r
    if key == "zf-dfe":
        return double * r * np.exp(-EULER_GAMMA + harmonic(n_r - 1))
    if key == "wl-zf-le":
        # mean formula; for n_r = 1 the variance is unbounded but the
        # mean (2 n_r - 1) r still holds
        return (2 * n_r - 1) * r
    return r * np.exp(-EULER_GAMMA + harmonic(2 * n_r - 1))


def gap_to_mfb_db(receiver: str, n_r: int, sigma_x_sq: float = 1.0,
                  sigma_n_sq: float = 1.0, real_modulation: bool = True) -> float:
    """10 log10(MFB / limit_snr), same modulation convention on both sides."""
    mfb = limit_snr("mfb", n_r, sigma_x_sq, sigma_n_sq, real_modulation)
    rx = limit_snr(receiver, n_r, sigma_x_sq, sigma_n_sq, real_modulation)
    return float(10.0 * np.log10(mfb / rx))


@dataclass(frozen=True)
class GapRow:
    receiver: str
    n_r: int
    gap_db: Optional[float]  # None where no finite limit exists


@dataclass(frozen=True)
class GapTable:
    rows: tuple

    def __iter__(self):
        return iter(self.rows)


def gap_table(n_r_values=(1, 2)) -> GapTable:
    """Gap to the MFB for every closed-form receiver at each antenna count."""
    rows = []
    for name in LIMIT_RECEIVERS:
        for n_r in n_r_values:
            try:
                gap = gap_to_mfb_db(name, n_r)
            except ValueError:
                gap = None
            rows.append(GapRow(name, int(n_r), gap))
    return GapTable(tuple(rows))


def mmse_dfe_post_snr_from_gains(gains, r: float) -> float:
    """e^{mean ln(1 + r g)} - 1 over the supplied channel energy samples."""
    g = np.asarray(gains, dtype=float)
    if g.size == 0 or np.any(g < 0):
        raise ValueError("gains must be a non-empty array of non-negative energies")
    return float(np.expm1(np.mean(np.log1p(r * g))))


def mmse_dfe_limit_snr_mc(n_r: int, r: float, samples: int,
                          stream=None) -> float:
    """Monte Carlo limiting post-SNR of the unbiased MMSE-DFE.

    ||h(k)||^2 is a sum of n_r unit-mean exponentials, i.e. Gamma(n_r, 1);
    the limit interpolates n_r * r at small r and the ZF-DFE constant
    r e^{-gamma + H_{n_r-1}} at large r.
    """
    if n_r < 1:
        raise ValueError("n_r must be >= 1")
    if samples < 10**4:
        raise ValueError("need at least 10^4 samples for a stable log-average")
    rng = as_generator(stream if stream is not None else RngStream(0, 0))
    gains = rng.gamma(float(n_r), 1.0, int(samples))
    return mmse_dfe_post_snr_from_gains(gains, r)
