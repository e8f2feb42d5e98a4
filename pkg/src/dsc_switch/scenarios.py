"""Experiment drivers: free collapse-revival runs, Wigner snapshots, pulse
switching, coupling sweeps and the parity diagnostics.

Figure defaults live in :data:`FIGURE_DEFAULTS` in units of ``omega_c``
(rates) and ``1/omega_c`` (times); :func:`default_spec` turns them into an
absolute :class:`ScenarioSpec`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .errors import NumericError, ValidationError
from .hilbert import DEFAULT_N_MAX, EmitterLevel, HilbertSpace, make_named_state
from .io import SeriesTable
from .model import (
    PulseSchedule,
    PulseSpec,
    SystemParams,
    build_h0,
    build_hd,
    build_heff,
)
from .observables import (
    QUADRATURE_CONVENTION,
    DEFAULT_WIGNER_EXTENT,
    DEFAULT_WIGNER_POINTS,
    default_grid,
    reduced_cavity_density,
    wigner,
)
from .propagate import PropagationOptions, TrajectoryRecord, propagate
from .symmetry import (
    anticommutator_max_abs,
    commutator_max_abs,
    effective_coupling,
    parity_operator,
)

KINDS = (
    "wavepacket_roundtrip",
    "revival_probability",
    "wigner_snapshots",
    "pulse_switch",
    "coupling_sweep",
    "parity_check",
)

PI = math.pi

_FREE = dict(
    omega_q=0.0, g1=1.0, g2=1.0, kappa=0.0, gamma=0.0,
    initial="plus0", t_end=4 * PI, pulse_times=[],
)
_SWITCH = dict(
    omega_q=0.01, g1=0.5, g2=0.5, kappa=0.005, gamma=0.005,
    initial="plus0", t_end=10 * PI, pulse_times=[4 * PI, 6 * PI],
)
_PULSE = dict(pulse_A=PI, pulse_omega=0.01, pulse_tau=0.1)

FIGURE_DEFAULTS: dict[str, dict[str, Any]] = {
    "wavepacket_roundtrip": {**_FREE, **_PULSE},
    "revival_probability": {**_FREE, **_PULSE},
    "wigner_snapshots": {
        **_FREE, **_PULSE, "omega_q": 0.2,
        "snapshot_times": [0.0, PI / 2, PI, 4 * PI],
    },
    "pulse_switch": {**_SWITCH, **_PULSE},
    "coupling_sweep": {**_SWITCH, **_PULSE, "g_values": [0.3, 0.5, 0.7]},
    "parity_check": {**_FREE, **_PULSE},
}


@dataclass(frozen=True)
class ScenarioSpec:
    """One run; all rates and times absolute.

    ``extras`` carries kind-specific settings: ``snapshot_times``,
    ``wigner_extent`` and ``wigner_points`` for ``wigner_snapshots``;
    ``g_values`` and ``max_workers`` for ``coupling_sweep``.
    """

    kind: str
    params: SystemParams
    t_end: float
    schedule: PulseSchedule = PulseSchedule()
    initial: str = "plus0"
    n_max: int = DEFAULT_N_MAX
    options: PropagationOptions = PropagationOptions()
    extras: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ValidationError(f"t_end must be > 0, got {self.t_end}")
        if self.kind == "wigner_snapshots" and not self.extras.get("snapshot_times"):
            raise ValidationError("wigner_snapshots requires a nonempty snapshot_times list")
        if self.kind == "coupling_sweep" and not self.extras.get("g_values"):
            raise ValidationError("coupling_sweep requires a nonempty g_values list")


@dataclass
class ScenarioResult:
    trajectory: Optional[TrajectoryRecord]
    artifacts: dict[str, SeriesTable]
    metadata: dict[str, Any]
    summary: dict[str, Any] = field(default_factory=dict)
    children: list = field(default_factory=list)


class ScenarioError(Exception):
    """A failed sweep entry; ``g`` is the coupling, ``__cause__`` the failure."""

    def __init__(self, g: float, exc: Exception):
        super().__init__(f"g={g}: {exc}")
        self.g = g
        self.error = exc


def default_spec(kind: str, omega_c: float = 1.0, **overrides) -> ScenarioSpec:
    """Figure-default spec for ``kind``; ``overrides`` use the same
    dimensionless keys as :data:`FIGURE_DEFAULTS`."""
    if kind not in KINDS:
        raise ValidationError(f"unknown scenario kind {kind!r}; expected one of {KINDS}")
    d = {**FIGURE_DEFAULTS[kind], **overrides}
    params = SystemParams(
        omega_c=omega_c,
        omega_q=d["omega_q"] * omega_c,
        g1=d["g1"] * omega_c,
        g2=d["g2"] * omega_c,
        kappa=d["kappa"] * omega_c,
        gamma=d["gamma"] * omega_c,
    )
    schedule = PulseSchedule.of(
        (
            PulseSpec(d["pulse_A"], d["pulse_omega"] * omega_c, d["pulse_tau"] / omega_c, tc / omega_c)
            for tc in d["pulse_times"]
        ),
        d.get("pulse_exponent_convention", "divide"),
    )
    extras = {}
    if "snapshot_times" in d:
        extras["snapshot_times"] = [t / omega_c for t in d["snapshot_times"]]
        extras["wigner_extent"] = d.get("wigner_extent", DEFAULT_WIGNER_EXTENT)
        extras["wigner_points"] = d.get("wigner_points", DEFAULT_WIGNER_POINTS)
    if "g_values" in d:
        extras["g_values"] = [g * omega_c for g in d["g_values"]]
    return ScenarioSpec(
        kind=kind,
        params=params,
        t_end=d["t_end"] / omega_c,
        schedule=schedule,
        initial=d["initial"],
        n_max=d.get("n_max", DEFAULT_N_MAX),
        options=d.get("options", PropagationOptions()),
        extras=extras,
    )


# ---------------------------------------------------------------- analysis


def local_maxima(series: np.ndarray) -> np.ndarray:
    """Indices of interior samples that rise from the left and do not rise to the right."""
    s = np.asarray(series)
    if s.size < 3:
        return np.array([], dtype=int)
    return np.nonzero((s[1:-1] > s[:-2]) & (s[1:-1] >= s[2:]))[0] + 1


def revival_peaks(
    times: np.ndarray,
    series: np.ndarray,
    period: float,
    rel_height: float = 0.5,
    min_separation: Optional[float] = None,
) -> np.ndarray:
    """Times of revival maxima.

    Local maxima above ``rel_height * max(series)``, thinned greedily by height
    so that kept peaks are at least ``min_separation`` (default ``period/4``)
    apart.
    """
    times = np.asarray(times)
    series = np.asarray(series)
    sep = period / 4 if min_separation is None else min_separation
    idx = local_maxima(series)
    idx = idx[series[idx] >= rel_height * series.max()]
    kept: list[int] = []
    for i in sorted(idx, key=lambda i: -series[i]):
        if all(abs(times[i] - times[j]) >= sep for j in kept):
            kept.append(i)
    return np.sort(times[kept])


def peak_count_per_period(times: np.ndarray, series: np.ndarray, period: float) -> float:
    """Number of local maxima per period (sub-peak structure measure)."""
    span = times[-1] - times[0]
    return len(local_maxima(series)) / (span / period)


# ----------------------------------------------------------------- drivers


def trajectory_table(record: TrajectoryRecord) -> SeriesTable:
    """Columns: t, norm2, P_even, P_odd, P0..P{n_max}, overlap_init, overlap_antisym."""
    photon = record.photon
    cols = ["t", "norm2", "P_even", "P_odd"] + [f"P{n}" for n in range(photon.shape[1])]
    blocks = [record.times[:, None], record["norm2"][:, None], record["P_even"][:, None],
              record["P_odd"][:, None], photon]
    for name in ("init", "antisym"):
        cols.append(f"overlap_{name}")
        blocks.append(record[f"overlap_{name}"][:, None])
    return SeriesTable(tuple(cols), np.hstack(blocks))


def wavepacket_table(record: TrajectoryRecord) -> SeriesTable:
    """Long format (t, n, P_n) for heatmap plotting."""
    photon = record.photon
    n = np.arange(photon.shape[1])
    t = np.repeat(record.times, n.size)
    data = np.column_stack([t, np.tile(n, len(record.times)), photon.ravel()])
    return SeriesTable(("t", "n", "P_n"), data, time_indexed=False)


def wigner_table(grid) -> SeriesTable:
    X, Y = np.meshgrid(grid.xs, grid.ys)
    data = np.column_stack([X.ravel(), Y.ravel(), grid.w.ravel()])
    return SeriesTable(("x", "y", "W"), data, time_indexed=False,
                       notes=(f"quadratures: {QUADRATURE_CONVENTION}",))


def _spec_metadata(spec: ScenarioSpec, opts: PropagationOptions) -> dict[str, Any]:
    sched = spec.schedule
    return {
        "kind": spec.kind,
        "params": asdict(spec.params),
        "initial": spec.initial,
        "t_end": spec.t_end,
        "n_max": spec.n_max,
        "pulses": [asdict(p) for p in sched.pulses],
        "pulse_exponent_convention": sched.convention,
        # carrier uses absolute time, so the rotation is A cos(omega t_c) exp(-omega^2 tau^2/2)
        "pulse_rotation_angles": [p.rotation_angle() for p in sched.pulses],
        "options": asdict(opts),
        "extras": dict(spec.extras),
        "quadrature_convention": QUADRATURE_CONVENTION,
    }


def _evolve(spec: ScenarioSpec, sample_times: Sequence[float] = (), store_states: bool = False):
    space = HilbertSpace(spec.n_max)
    base = build_heff(spec.params, space)
    psi0 = make_named_state(space, spec.initial)
    refs = {"init": psi0, "antisym": make_named_state(space, "antisym0")}
    half = spec.params.period / 2
    grid = [k * half for k in range(1, int(spec.t_end / half) + 1)]
    opts = replace(spec.options, store_states=store_states or spec.options.store_states)
    record = propagate(
        base, spec.schedule, psi0, spec.t_end, opts,
        overlaps=refs, sample_times=[*grid, *sample_times], omega_c=spec.params.omega_c,
    )
    return space, base, record, opts.resolved(spec.schedule, spec.params.omega_c)


def _summary(record: TrajectoryRecord) -> dict[str, Any]:
    return {
        "samples": len(record),
        "final_norm2": float(record["norm2"][-1]),
        "max_mean_photon": float(record["mean_n"].max()),
    }


def _run_free(spec: ScenarioSpec) -> ScenarioResult:
    _, _, record, opts = _evolve(spec)
    artifacts = {"series": trajectory_table(record)}
    if spec.kind == "wavepacket_roundtrip":
        artifacts["wavepacket"] = wavepacket_table(record)
    peaks = revival_peaks(record.times, record["overlap_init"], spec.params.period)
    summary = {**_summary(record), "revival_times": peaks.tolist()}
    return ScenarioResult(record, artifacts, _spec_metadata(spec, opts), summary)


def _run_wigner(spec: ScenarioSpec) -> ScenarioResult:
    snaps = sorted(float(t) for t in spec.extras["snapshot_times"])
    if snaps[0] < 0 or snaps[-1] > spec.t_end:
        raise ValidationError(f"snapshot_times must lie in [0, t_end={spec.t_end}]")
    _, _, record, opts = _evolve(spec, sample_times=snaps, store_states=True)
    xs = default_grid(spec.extras.get("wigner_extent", DEFAULT_WIGNER_EXTENT),
                      spec.extras.get("wigner_points", DEFAULT_WIGNER_POINTS))
    artifacts = {"series": trajectory_table(record)}
    maxima = []
    for i, t in enumerate(snaps):
        grid = wigner(reduced_cavity_density(record.state_at(t)), xs, xs)
        artifacts[f"wigner_{i}"] = wigner_table(grid)
        maxima.append(len(grid.local_maxima(0.05)))
    record.states = None
    meta = _spec_metadata(spec, opts)
    meta["snapshot_times"] = snaps
    summary = {**_summary(record), "wigner_maxima_above_0.05": maxima}
    return ScenarioResult(record, artifacts, meta, summary)


def _run_switch(spec: ScenarioSpec) -> ScenarioResult:
    _, _, record, opts = _evolve(spec)
    summary = _summary(record)
    pulses = spec.schedule.pulses
    if len(pulses) >= 2:
        lo = spec.schedule.windows[0][1]
        hi = spec.schedule.windows[1][0]
        inside = (record.times > lo) & (record.times < hi)
        if inside.any():
            excited = 1.0 - record.photon[:, 0] / np.maximum(record["norm2"], 1e-300)
            summary["max_excited_photon_between_pulses"] = float(
                (record["norm2"] - record.photon[:, 0])[inside].max()
            )
            summary["max_relative_excited_between_pulses"] = float(excited[inside].max())
            summary["max_antisym_overlap_between_pulses"] = float(record["overlap_antisym"][inside].max())
    return ScenarioResult(record, {"series": trajectory_table(record)}, _spec_metadata(spec, opts), summary)


def _run_sweep(spec: ScenarioSpec) -> ScenarioResult:
    g_values = list(spec.extras["g_values"])
    base = replace(spec, kind="pulse_switch", extras={})
    results = sweep_coupling(base, g_values, max_workers=spec.extras.get("max_workers"))
    rows, artifacts = [], {}
    for g, res in zip(g_values, results):
        if isinstance(res, ScenarioError):
            rows.append([g, math.nan, math.nan])
            continue
        artifacts[f"series_g{g!r}"] = res.artifacts["series"]
        rows.append([g, res.summary["max_mean_photon"], res.summary["final_norm2"]])
    artifacts["sweep_summary"] = SeriesTable(("g", "max_mean_photon", "final_norm2"), np.array(rows),
                                             time_indexed=False)
    ok = [r for r in results if not isinstance(r, ScenarioError)]
    meta = _spec_metadata(spec, spec.options.resolved(spec.schedule, spec.params.omega_c))
    summary = {
        "samples": sum(len(r.trajectory) for r in ok),
        "final_norm2": ok[-1].summary["final_norm2"] if ok else math.nan,
        "max_mean_photon": max((r.summary["max_mean_photon"] for r in ok), default=math.nan),
        "failed": [r.g for r in results if isinstance(r, ScenarioError)],
    }
    return ScenarioResult(None, artifacts, meta, summary, children=results)


def parity_diagnostics(params: SystemParams, space: HilbertSpace, schedule: PulseSchedule) -> dict[str, float]:
    """Commutator checks and the two dark-state matrix elements."""
    h0 = build_h0(params, space)
    parity = parity_operator(space)
    t_peak = schedule.pulses[0].t_c if schedule.pulses else 0.0
    probe = schedule if schedule.pulses else PulseSchedule.of([PulseSpec(math.pi, 0.0, 0.1, 0.0)])
    hd = build_hd(probe, t_peak, space)
    e1_elem = effective_coupling(EmitterLevel.E, 1, make_named_state(space, "antisym0"), h0)
    e2_elem = effective_coupling(EmitterLevel.E, 2, make_named_state(space, "antisym1"), h0)
    dark = float(np.max(np.abs(h0 @ make_named_state(space, "antisym0"))))
    return {
        "commutator_h0_max_abs": commutator_max_abs(parity, h0),
        "anticommutator_hd_max_abs": anticommutator_max_abs(parity, hd),
        "coupling_e1_antisym0_re": e1_elem.real,
        "coupling_e1_antisym0_im": e1_elem.imag,
        "coupling_e2_antisym1_re": e2_elem.real,
        "coupling_e2_antisym1_im": e2_elem.imag,
        "coupling_expected": (params.g1 - params.g2) / math.sqrt(2.0),
        "dark_state_residual": dark,
    }


def _run_parity(spec: ScenarioSpec) -> ScenarioResult:
    space, _, record, opts = _evolve(spec)
    diag = parity_diagnostics(spec.params, space, spec.schedule)
    diag["max_odd_weight"] = float(record["P_odd"].max())
    diag["max_even_weight"] = float(record["P_even"].max())
    table = SeriesTable(tuple(diag), np.array([list(diag.values())]), time_indexed=False)
    artifacts = {"series": trajectory_table(record), "diagnostics": table}
    return ScenarioResult(record, artifacts, _spec_metadata(spec, opts), {**_summary(record), **diag})


_DRIVERS = {
    "wavepacket_roundtrip": _run_free,
    "revival_probability": _run_free,
    "wigner_snapshots": _run_wigner,
    "pulse_switch": _run_switch,
    "coupling_sweep": _run_sweep,
    "parity_check": _run_parity,
}


def run_scenario(spec: ScenarioSpec) -> ScenarioResult:
    try:
        return _DRIVERS[spec.kind](spec)
    except NumericError as exc:
        raise type(exc)(f"{spec.kind} (initial={spec.initial}, n_max={spec.n_max}): {exc}") from exc


def _one_g(base: ScenarioSpec, g: float):
    try:
        if not g > 0:
            raise ValidationError(f"coupling g must be > 0, got {g}")
        params = replace(base.params, g1=g, g2=g)
        return run_scenario(replace(base, params=params))
    except (ValidationError, NumericError) as exc:
        return ScenarioError(g, exc)


def sweep_coupling(
    base: ScenarioSpec, g_values: Sequence[float], max_workers: Optional[int] = None
) -> list:
    """Run ``base`` once per coupling with ``g1 = g2 = g``.

    Returns one entry per g in input order: a :class:`ScenarioResult`, or a
    :class:`ScenarioError` for an entry that failed (the sweep continues).
    """
    g_values = list(g_values)
    if not g_values:
        raise ValidationError("g_values must be nonempty")
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(lambda g: _one_g(base, g), g_values))
    return [_one_g(base, g) for g in g_values]
