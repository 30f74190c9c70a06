"""Monte Carlo engine: BER sweeps, post-SNR measurement, gap extraction.

One trial = one block: draw bits, map, precode, draw an independent
channel realization, apply it in the frequency domain, synthesize the
receiver for that realization, equalize, slice, count bit errors. Every
trial is a pure function of (master_seed, trial_index); trial indices
are composed as cell_hash | ordinal << 8 | redraw so that any
(receiver, SNR) cell can be reproduced in isolation and a singular
channel can be redrawn with the literally next stream index.

Parallel execution is speculative: workers compute blocks in chunks of
parallel_width, but results are committed strictly in ordinal order and
the stopping rule is re-evaluated after every committed block, so the
set of counted blocks (and hence every output byte) is identical for
any width.

Post-SNR is always measured on the ideal-feedback path (decision errors
would corrupt the error statistic); decision-directed runs report their
BER from the decision path but share the genie MSE measurement.
"""

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

import numpy as np

from .analytics import limit_snr
from .channel import apply_channel_freq, draw_channel, mfb_snr
from .equalizer import (
    ReceiverSpec,
    SingularChannelError,
    equalize_dfe,
    equalize_le,
    synthesize,
)
from .modem import constellation, count_bit_errors, demod_hard, map_bits, precode
from .numerics import RngStream, q_function

__all__ = [
    "SweepConfig",
    "SweepCell",
    "SweepResult",
    "PostSnrRow",
    "GapAtBer",
    "InsufficientRangeError",
    "run_block",
    "run_block_with_retry",
    "run_sweep",
    "measure_post_snr",
    "mfb_reference_curve",
    "gap_at_ber",
    "result_to_csv",
    "result_to_json",
]

log = logging.getLogger("scfde.simulator")

_ALIASES = {"nr": "antennas", "v": "taps", "m": "block_size", "snr": "snr_db"}


class InsufficientRangeError(ValueError):
    """A BER curve does not bracket the requested target."""


def _parse_snr_grid(value):
    if isinstance(value, str):
        if ":" in value:
            start, step, stop = (float(p) for p in value.split(":"))
            if step <= 0:
                raise ValueError("snr range step must be positive")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return tuple(start + step * k for k in range(max(n, 0)))
        return tuple(float(p) for p in value.split(","))
    return tuple(float(p) for p in np.atleast_1d(value))


@dataclass(frozen=True)
class SweepConfig:
    constellation: str = "bpsk"
    receivers: tuple = ("mmse-dfe",)
    feedback: str = "genie"
    fbf_len: int = 20
    antennas: int = 1
    taps: int = 20
    block_size: int = 512
    snr_db: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0)
    min_bit_errors: int = 200
    max_blocks: int = 20000
    master_seed: int = 0
    parallel_width: int = 1
    zf_epsilon: float = 1e-12

    def __post_init__(self):
        rx = self.receivers
        if isinstance(rx, str):
            rx = tuple(p.strip() for p in rx.split(",") if p.strip())
        names = tuple(
            ReceiverSpec.from_name(name, feedback_mode=self.feedback).name
            for name in rx
        )
        if not names:
            raise ValueError("need at least one receiver")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate receivers in {names}")
        object.__setattr__(self, "receivers", names)
        object.__setattr__(self, "snr_db", _parse_snr_grid(self.snr_db))
        c = constellation(self.constellation)
        if any(n.startswith("wl-") for n in names) and not c.is_real:
            raise ValueError(
                "widely linear receivers require a real constellation (bpsk)"
            )
        if not self.snr_db:
            raise ValueError("snr grid is empty")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ValueError(f"snr grid must be strictly increasing: {self.snr_db}")
        if self.antennas < 1:
            raise ValueError("antennas must be >= 1")
        if not 1 <= self.taps <= self.block_size:
            raise ValueError(
                f"taps must satisfy 1 <= v <= block_size, got v={self.taps} "
                f"m={self.block_size}"
            )
        if self.min_bit_errors < 100:
            raise ValueError("min_bit_errors below 100 gives meaningless BER points")
        if self.max_blocks < 1:
            raise ValueError("max_blocks must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        if self.parallel_width < 1:
            raise ValueError("parallel_width must be >= 1")
        self.receiver_specs()  # validates fbf_len / zf_epsilon combinations

    def receiver_specs(self):
        return tuple(
            ReceiverSpec.from_name(
                name,
                fbf_length=self.fbf_len,
                feedback_mode=self.feedback,
                zf_epsilon=self.zf_epsilon,
            )
            for name in self.receivers
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["receivers"] = list(self.receivers)
        d["snr_db"] = list(self.snr_db)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        valid = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            name = _ALIASES.get(key, key)
            if name not in valid:
                options = ", ".join(sorted(valid | set(_ALIASES)))
                raise ValueError(f"unknown config key {key!r}; valid keys: {options}")
            if name in kwargs:
                raise ValueError(f"config key {name!r} given twice (alias clash)")
            kwargs[name] = value
        for field in ("fbf_len", "antennas", "taps", "block_size", "min_bit_errors",
                      "max_blocks", "master_seed", "parallel_width"):
            if field in kwargs:
                kwargs[field] = int(kwargs[field])
        if "zf_epsilon" in kwargs:
            kwargs["zf_epsilon"] = float(kwargs["zf_epsilon"])
        return cls(**kwargs)


@dataclass(frozen=True)
class SweepCell:
    receiver: str
    snr_db: float
    bits: int
    errors: int
    ber: float
    post_snr_db: float
    analytic_db: Optional[float]
    blocks: int
    redraws: int
    hit_max_blocks: bool


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple


@dataclass(frozen=True)
class PostSnrRow:
    receiver: str
    snr_db: float
    realizations: int
    post_snr_db: float
    analytic_db: Optional[float]
    delta_db: Optional[float]


@dataclass(frozen=True)
class GapAtBer:
    receiver: str
    target_ber: float
    snr_at_target_db: float
    mfb_snr_at_target_db: float
    gap_db: float


def _cell_base(receiver_name: str, snr_db: float) -> int:
    digest = hashlib.sha256(f"{receiver_name}|{snr_db:.6f}".encode()).digest()
    return int.from_bytes(digest[:4], "big") << 40


def run_block(trial_index: int, config: SweepConfig, receiver: ReceiverSpec,
              snr_db: float):
    """One block through the full chain. Returns (bit_errors, bits, mse)."""
    c = constellation(config.constellation)
    m = config.block_size
    sigma_n_sq = 10.0 ** (-snr_db / 10.0)  # unit-energy alphabets, snr = 1/sigma_n^2
    gen = RngStream(config.master_seed, trial_index).generator()
    tx_bits = gen.integers(0, 2, m * c.bits_per_symbol)
    block = precode(map_bits(tx_bits, c))
    ch = draw_channel(gen, config.antennas, config.taps, m)
    y = apply_channel_freq(block.precoded, ch, sigma_n_sq, gen)
    filters = synthesize(receiver, ch, 1.0, sigma_n_sq)
    if receiver.structure == "le":
        z = equalize_le(filters, y)
        mse = float(np.mean(np.abs(z - block.time_symbols) ** 2))
    else:
        genie = (receiver if receiver.feedback_mode == "ideal_genie"
                 else replace(receiver, feedback_mode="ideal_genie"))
        z, _ = equalize_dfe(filters, y, genie, genie_symbols=block.time_symbols, c=c)
        mse = float(np.mean(np.abs(z - block.time_symbols) ** 2))
        if receiver.feedback_mode == "decision_directed":
            z, _ = equalize_dfe(filters, y, receiver, c=c)
    _, rx_bits = demod_hard(z, c)
    return count_bit_errors(tx_bits, rx_bits), int(tx_bits.size), mse


def run_block_with_retry(trial_index: int, config: SweepConfig,
                         receiver: ReceiverSpec, snr_db: float, max_redraws=64):
    """run_block, redrawing singular channels with the next stream index.

    Returns (bit_errors, bits, mse, redraws).
    """
    for redraw in range(max_redraws + 1):
        try:
            errors, bits, mse = run_block(trial_index + redraw, config, receiver,
                                          snr_db)
            return errors, bits, mse, redraw
        except SingularChannelError as exc:
            log.debug("trial %d redrawn (%s)", trial_index + redraw, exc)
    raise RuntimeError(
        f"{max_redraws} singular channels in a row at trial {trial_index}; "
        "increase zf_epsilon"
    )


def _analytic_db(spec: ReceiverSpec, config: SweepConfig, snr_db: float):
    # conventional outputs are measured with complex error, so their
    # closed forms are used without the real-alphabet doubling; the WL
    # formulas are real-alphabet quantities already
    if spec.criterion != "zf":
        return None
    try:
        value = limit_snr(spec.name, config.antennas, 1.0,
                          10.0 ** (-snr_db / 10.0), real_modulation=False)
    except ValueError:
        return None
    return float(10.0 * np.log10(value))


def _committed_blocks(config: SweepConfig, spec: ReceiverSpec, snr_db: float,
                      pool, stop):
    """Run trials in ordinal order, committing until stop(errors, blocks).

    Yields per-block tuples; speculative tail results of the final chunk
    are discarded so any parallel_width commits the same prefix.
    """
    base = _cell_base(spec.name, snr_db)

    def task(ordinal):
        return run_block_with_retry(base | (ordinal << 8), config, spec, snr_db)

    errors = blocks = 0
    next_ordinal = 0
    while not stop(errors, blocks):
        batch = range(next_ordinal, next_ordinal + config.parallel_width)
        outs = list(pool.map(task, batch)) if pool else [task(t) for t in batch]
        for out in outs:
            errors += out[0]
            blocks += 1
            yield out
            if stop(errors, blocks):
                return
        next_ordinal = batch[-1] + 1


def _run_cell(config: SweepConfig, spec: ReceiverSpec, snr_db: float,
              pool) -> SweepCell:
    errors = bits = blocks = redraws = 0
    mses = []

    def stop(err, blk):
        return err >= config.min_bit_errors or blk >= config.max_blocks

    for e, b, mse, rd in _committed_blocks(config, spec, snr_db, pool, stop):
        errors += e
        bits += b
        blocks += 1
        redraws += rd
        mses.append(mse)
    mean_mse = math.fsum(mses) / blocks
    post = 1.0 / mean_mse - (1.0 if spec.criterion == "mmse" else 0.0)
    post_db = float(10.0 * np.log10(post)) if post > 0 else float("nan")
    return SweepCell(
        receiver=spec.name,
        snr_db=float(snr_db),
        bits=bits,
        errors=errors,
        ber=errors / bits,
        post_snr_db=post_db,
        analytic_db=_analytic_db(spec, config, snr_db),
        blocks=blocks,
        redraws=redraws,
        hit_max_blocks=errors < config.min_bit_errors,
    )


def run_sweep(config: SweepConfig) -> SweepResult:
    """BER/post-SNR over the full (receiver, snr) grid of the config."""
    pool = (ThreadPoolExecutor(max_workers=config.parallel_width)
            if config.parallel_width > 1 else None)
    try:
        rows = []
        for spec in config.receiver_specs():
            for snr_db in config.snr_db:
                cell = _run_cell(config, spec, snr_db, pool)
                log.info(
                    "%s @ %g dB: ber=%.4g errors=%d blocks=%d%s",
                    cell.receiver, snr_db, cell.ber, cell.errors, cell.blocks,
                    " (max_blocks hit)" if cell.hit_max_blocks else "",
                )
                rows.append(cell)
    finally:
        if pool:
            pool.shutdown()
    return SweepResult(config=config, rows=tuple(rows))


def measure_post_snr(config: SweepConfig, snr_db: float,
                     realizations: int) -> tuple:
    """Genie-path empirical post-SNR over a fixed number of realizations.

    Aggregation is sigma_x^2 / mean(mse), minus one for MMSE receivers,
    compared against the closed-form limit where one exists.
    """
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    pool = (ThreadPoolExecutor(max_workers=config.parallel_width)
            if config.parallel_width > 1 else None)
    rows = []
    try:
        for spec in config.receiver_specs():
            genie = replace(spec, feedback_mode="ideal_genie")

            def stop(err, blk):
                return blk >= realizations

            mses = [
                out[2]
                for out in _committed_blocks(config, genie, snr_db, pool, stop)
            ]
            post = 1.0 / (math.fsum(mses) / len(mses))
            if spec.criterion == "mmse":
                post -= 1.0
            post_db = float(10.0 * np.log10(post)) if post > 0 else float("nan")
            analytic = _analytic_db(spec, config, snr_db)
            rows.append(
                PostSnrRow(
                    receiver=spec.name,
                    snr_db=float(snr_db),
                    realizations=len(mses),
                    post_snr_db=post_db,
                    analytic_db=analytic,
                    delta_db=None if analytic is None else post_db - analytic,
                )
            )
    finally:
        if pool:
            pool.shutdown()
    return tuple(rows)


def _simulated_mfb_point(config: SweepConfig, snr_db: float) -> float:
    """Matched-filter receiver: ISI-free AWGN at each realization's MFB SNR."""
    c = constellation(config.constellation)
    sigma_n_sq = 10.0 ** (-snr_db / 10.0)
    base = _cell_base("mfb", snr_db)
    errors = bits = blocks = 0
    while errors < config.min_bit_errors and blocks < config.max_blocks:
        gen = RngStream(config.master_seed, base | (blocks << 8)).generator()
        tx_bits = gen.integers(0, 2, config.block_size * c.bits_per_symbol)
        x_t = map_bits(tx_bits, c)
        ch = draw_channel(gen, config.antennas, config.taps, config.block_size)
        snr = mfb_snr(ch, 1.0, sigma_n_sq)
        scale = np.sqrt(0.5 / snr)
        noise = scale * (gen.standard_normal(x_t.size)
                         + 1j * gen.standard_normal(x_t.size))
        _, rx_bits = demod_hard(x_t + noise, c)
        errors += count_bit_errors(tx_bits, rx_bits)
        bits += tx_bits.size
        blocks += 1
    return errors / bits


def mfb_reference_curve(config: SweepConfig, snr_grid_db=None,
                        per_realization: bool = False) -> tuple:
    """Matched filter bound BER curve on the grid.

    BPSK has the closed form Q(sqrt(2 N_r r)): the real-alphabet bound
    2 N_r r and the half-power real noise cancel into the factor 2
    inside the argument. per_realization instead averages that form over
    drawn channel energies (the finite-v bound); other alphabets fall
    back to simulating the matched-filter receiver.
    """
    grid = config.snr_db if snr_grid_db is None else _parse_snr_grid(snr_grid_db)
    points = []
    if config.constellation == "bpsk" and not per_realization:
        for snr_db in grid:
            r = 10.0 ** (snr_db / 10.0)
            points.append((float(snr_db), float(q_function(
                np.sqrt(2.0 * config.antennas * r)))))
    elif config.constellation == "bpsk":
        gen = RngStream(config.master_seed, _cell_base("mfb-fading", 0.0)).generator()
        energies = np.array([
            np.sum(np.abs(draw_channel(gen, config.antennas, config.taps,
                                       config.block_size).taps) ** 2)
            for _ in range(2000)
        ])
        for snr_db in grid:
            r = 10.0 ** (snr_db / 10.0)
            points.append((float(snr_db),
                           float(np.mean(q_function(np.sqrt(2.0 * r * energies))))))
    else:
        for snr_db in grid:
            points.append((float(snr_db), _simulated_mfb_point(config, snr_db)))
    return tuple(points)


def _snr_at_target(curve, target_ber: float) -> float:
    pts = sorted((float(s), max(float(b), 1e-300)) for s, b in curve)
    if len(pts) < 2:
        raise InsufficientRangeError("need at least two curve points")
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        if b0 >= target_ber >= b1 and b0 > b1:
            frac = (math.log(b0) - math.log(target_ber)) / (
                math.log(b0) - math.log(b1)
            )
            return s0 + frac * (s1 - s0)
    span = (min(b for _, b in pts), max(b for _, b in pts))
    raise InsufficientRangeError(
        f"target ber {target_ber:g} not bracketed; achieved span "
        f"[{span[0]:g}, {span[1]:g}]"
    )


def gap_at_ber(points, reference, target_ber: float,
               receiver: str = "") -> GapAtBer:
    """SNR distance between two BER curves at a target, log-linear in BER.

    points/reference are (snr_db, ber) sequences; both must bracket the
    target or InsufficientRangeError reports the achieved span.
    """
    if not 0 < target_ber < 1:
        raise ValueError("target_ber must be in (0, 1)")
    snr = _snr_at_target(points, target_ber)
    ref = _snr_at_target(reference, target_ber)
    return GapAtBer(
        receiver=receiver,
        target_ber=float(target_ber),
        snr_at_target_db=snr,
        mfb_snr_at_target_db=ref,
        gap_db=snr - ref,
    )


def result_to_csv(result: SweepResult) -> str:
    """Stable-ordered CSV with the pinned seven columns."""
    lines = ["receiver,snr_db,bits,errors,ber,post_snr_db,analytic_db"]
    for r in result.rows:
        analytic = "" if r.analytic_db is None else repr(r.analytic_db)
        lines.append(
            f"{r.receiver},{r.snr_db!r},{r.bits},{r.errors},{r.ber!r},"
            f"{r.post_snr_db!r},{analytic}"
        )
    return "\n".join(lines) + "\n"


def result_to_json(result: SweepResult) -> str:
    doc = {
        "config": result.config.to_dict(),
        "rows": [asdict(r) for r in result.rows],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
