"""Four-node, two-photon distributed phase-sensing network.

Two photons are shared in an equal superposition of Bell pairs on the ring
links 1-2, 2-3, 3-4 and 4-1.  Each node applies a local phase and measures in
the sigma_x basis.  A coincidence on link (mu, nu) with outcome signs
(a, b) occurs with probability

    (1 + a*b * V[pair, outcome] * cos(phi_mu + phi_nu)) / 16

so every record depends on the phases only through the four link sums.
Arrays of probabilities, visibilities and counts are indexed
``[pair, outcome]`` in the order of :data:`PAIR_LABELS` and :data:`OUTCOMES`.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .errors import FitDegenerate, FormatError, InsufficientData, InvalidInput
from .fisher import ProbabilityModel, PureStateModel
from .matops import sym_matrix

NODES = 4
PAIRS = ((0, 1), (1, 2), (2, 3), (3, 0))
PAIR_LABELS = ("12", "23", "34", "41")
OUTCOMES = ("pp", "pm", "mp", "mm")
#: product of the two local sigma_x outcomes for each outcome label
OUTCOME_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])
CSV_HEADER = ("phi1", "phi2", "phi3", "phi4", "pair", "outcome", "count")
AVERAGE_WEIGHTS = np.full(NODES, 0.25)

# incidence[i] = e_mu + e_nu for pair i
_INCIDENCE = np.zeros((len(PAIRS), NODES))
for _i, (_a, _b) in enumerate(PAIRS):
    _INCIDENCE[_i, [_a, _b]] = 1.0


def as_visibilities(v) -> np.ndarray:
    """Broadcast a shared visibility, or validate 16 per-surface values."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = np.full((len(PAIRS), len(OUTCOMES)), float(arr))
    elif arr.size == 16:
        arr = arr.reshape(len(PAIRS), len(OUTCOMES)).copy()
    else:
        raise InvalidInput("visibilities must be a scalar or 16 values")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise InvalidInput("visibilities must lie in [0, 1]")
    return arr


def _as_phases(phases) -> np.ndarray:
    p = np.asarray(phases, dtype=float)
    if p.shape != (NODES,) or not np.all(np.isfinite(p)):
        raise InvalidInput(f"expected {NODES} finite phases, got {phases!r}")
    return p


def pair_sums(phases) -> np.ndarray:
    """Link sums ``phi_mu + phi_nu``; works on ``(..., 4)`` arrays."""
    p = np.asarray(phases, dtype=float)
    return p @ _INCIDENCE.T


@dataclass(frozen=True)
class ProtocolConfig:
    phases: np.ndarray
    visibilities: np.ndarray = 1.0
    events: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phases", _as_phases(self.phases))
        object.__setattr__(self, "visibilities", as_visibilities(self.visibilities))
        if int(self.events) != self.events or self.events < 0:
            raise InvalidInput("events must be a non-negative integer")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInput("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "events", int(self.events))
        object.__setattr__(self, "seed", int(self.seed))


def outcome_probabilities(phases, visibilities=1.0) -> np.ndarray:
    """The sixteen coincidence probabilities as a ``(4, 4)`` array.

    They sum to one whenever every link has ``V++ + V-- == V+- + V-+`` (in
    particular for a shared visibility).  Unbalanced per-surface values, as
    produced by independent fits, are evaluated as written; sampling
    renormalizes.
    """
    vis = as_visibilities(visibilities)
    c = np.cos(pair_sums(_as_phases(phases)))
    return (1.0 + OUTCOME_SIGNS * vis * c[:, None]) / 16.0


def _probability_jacobian(phases, vis) -> np.ndarray:
    s = np.sin(pair_sums(phases))
    dp_ds = -OUTCOME_SIGNS * vis * s[:, None] / 16.0
    return (dp_ds[:, :, None] * _INCIDENCE[:, None, :]).reshape(16, NODES)


def protocol_model(visibilities=1.0) -> ProbabilityModel:
    """The network as a generic :class:`ProbabilityModel` with exact gradients."""
    vis = as_visibilities(visibilities)
    return ProbabilityModel(
        outcome_count=16,
        param_dim=NODES,
        probs=lambda phi: outcome_probabilities(phi, vis).reshape(-1),
        jacobian=lambda phi: _probability_jacobian(phi, vis),
    )


def pair_information(phases, visibilities=1.0) -> np.ndarray:
    """Fisher information carried by each link about its phase sum.

    Per outcome the term is ``V^2 sin^2 s / (16 (1 + sign V cos s))``.  At
    ``V = 1`` the identity ``sin^2 s = (1 - cos s)(1 + cos s)`` removes the
    0/0 at vanishing probabilities, leaving ``(1 - sign cos s) / 16``.
    """
    vis = as_visibilities(visibilities)
    s = pair_sums(_as_phases(phases))
    c = np.cos(s)[:, None]
    sin2 = np.sin(s)[:, None] ** 2
    sv = OUTCOME_SIGNS * vis
    with np.errstate(divide="ignore", invalid="ignore"):
        general = vis**2 * sin2 / (1.0 + sv * c)
    terms = np.where(vis == 1.0, 1.0 - OUTCOME_SIGNS * c, general)
    return terms.sum(axis=1) / 16.0


def analytic_cfim(phases, visibilities=1.0) -> np.ndarray:
    """Closed-form CFIM ``sum_pairs c_pair (e_mu + e_nu)(e_mu + e_nu)^T``.

    With unit visibility every link carries 1/4 and the matrix is phase
    independent.  Whatever the visibilities, each ``e_mu + e_nu`` is
    orthogonal to (1, -1, 1, -1), which therefore always spans part of the
    kernel.
    """
    c = pair_information(phases, visibilities)
    return sym_matrix((_INCIDENCE.T * c) @ _INCIDENCE)


def ideal_state() -> PureStateModel:
    """Two-photon ring state with generator = V-polarized photon count per node."""
    amps, gens = [], []
    for a, b in PAIRS:
        for vv in (0.0, 1.0):  # |H_a H_b>, |V_a V_b>
            g = np.zeros(NODES)
            g[[a, b]] = vv
            amps.append(1.0 / (2.0 * np.sqrt(2.0)))
            gens.append(g)
    return PureStateModel(np.array(amps), np.array(gens))


# -- counts ------------------------------------------------------------------


@dataclass
class CountsTable:
    """Coincidence counts for a list of phase settings.

    ``settings`` has shape ``(S, 4)``; ``counts`` has shape ``(S, 4, 4)``
    indexed ``[setting, pair, outcome]``.
    """

    settings: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.settings = np.asarray(self.settings, dtype=float).reshape(-1, NODES)
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(-1, len(PAIRS), len(OUTCOMES))
        if self.settings.shape[0] != self.counts.shape[0]:
            raise InvalidInput("one count block is required per phase setting")
        if np.any(self.counts < 0):
            raise InvalidInput("counts must be non-negative")

    def __len__(self) -> int:
        return self.settings.shape[0]

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=(1, 2))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def records(self) -> Iterator[tuple]:
        for phi, block in zip(self.settings, self.counts):
            for i, pair in enumerate(PAIR_LABELS):
                for k, outcome in enumerate(OUTCOMES):
                    yield tuple(phi), pair, outcome, int(block[i, k])

    def to_csv(self, path: Optional[str | Path] = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for phi, pair, outcome, n in self.records():
            writer.writerow([f"{x:.12g}" for x in phi] + [pair, outcome, n])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source: str | Path) -> "CountsTable":
        """Parse the CSV layout written by :meth:`to_csv`.

        ``source`` is a path, or CSV text if it contains a newline.
        """
        if isinstance(source, Path) or "\n" not in str(source):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = str(source)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(c.strip() for c in rows[0]) != CSV_HEADER:
            raise FormatError(f"counts CSV must start with header {','.join(CSV_HEADER)}")
        # records of one setting are contiguous; settings may repeat (scan origins)
        settings: list[np.ndarray] = []
        blocks: list[np.ndarray] = []
        seen: list[set] = []
        keys: list[tuple] = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise FormatError(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
            key = tuple(c.strip() for c in row[:4])
            try:
                phi = np.array([float(x) for x in key])
                n = int(row[6])
            except ValueError:
                raise FormatError(f"line {lineno}: malformed number") from None
            pair, outcome = row[4].strip(), row[5].strip()
            if pair not in PAIR_LABELS or outcome not in OUTCOMES:
                raise FormatError(f"line {lineno}: unknown pair/outcome {pair}/{outcome}")
            if n < 0 or not np.all(np.isfinite(phi)):
                raise FormatError(f"line {lineno}: invalid phase or negative count")
            if not keys or keys[-1] != key or len(seen[-1]) == 16:
                if seen and len(seen[-1]) != 16:
                    raise FormatError(f"line {lineno}: previous setting has {len(seen[-1])} of 16 records")
                keys.append(key)
                settings.append(phi)
                blocks.append(np.zeros((len(PAIRS), len(OUTCOMES)), dtype=np.int64))
                seen.append(set())
            if (pair, outcome) in seen[-1]:
                raise FormatError(f"line {lineno}: duplicate record for {pair}/{outcome}")
            seen[-1].add((pair, outcome))
            blocks[-1][PAIR_LABELS.index(pair), OUTCOMES.index(outcome)] = n
        if seen and len(seen[-1]) != 16:
            raise FormatError(f"last setting has {len(seen[-1])} of 16 records (truncated file?)")
        if not blocks:
            return cls(np.zeros((0, NODES)), np.zeros((0, 4, 4), dtype=np.int64))
        return cls(np.array(settings), np.array(blocks))


def scan_settings(grid: int, base=None) -> np.ndarray:
    """Scan each phase over ``[0, pi]`` in turn, holding the others at ``base``."""
    if grid < 2:
        raise InvalidInput("scan grid needs at least 2 points")
    base = np.zeros(NODES) if base is None else _as_phases(base)
    out = []
    for mu in range(NODES):
        for t in np.linspace(0.0, np.pi, grid):
            phi = base.copy()
            phi[mu] = t
            out.append(phi)
    return np.array(out)


def _rng(seed: int, repetition: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(seed if repetition is None else [seed, repetition])


def simulate_settings(settings, visibilities, events: int, seed: int = 0,
                      repetition: Optional[int] = None) -> CountsTable:
    """Draw ``events`` coincidences at every setting from one seeded stream."""
    settings = np.asarray(settings, dtype=float).reshape(-1, NODES)
    vis = as_visibilities(visibilities)
    rng = _rng(seed, repetition)
    counts = np.empty((settings.shape[0], len(PAIRS), len(OUTCOMES)), dtype=np.int64)
    for j, phi in enumerate(settings):
        p = outcome_probabilities(phi, vis).reshape(-1)
        counts[j] = rng.multinomial(events, p / p.sum()).reshape(len(PAIRS), len(OUTCOMES))
    return CountsTable(settings, counts)


def simulate(config: ProtocolConfig, repetition: Optional[int] = None) -> CountsTable:
    """Sample ``config.events`` coincidences at ``config.phases``.

    Repetition ``r`` uses the stream seeded by ``(config.seed, r)``.
    """
    return simulate_settings(config.phases, config.visibilities, config.events,
                             config.seed, repetition)


def expected_counts(settings, visibilities, events: int) -> CountsTable:
    """Noise-free counts ``round(events * p)``."""
    settings = np.asarray(settings, dtype=float).reshape(-1, NODES)
    counts = np.stack([np.rint(events * outcome_probabilities(phi, visibilities))
                       for phi in settings])
    return CountsTable(settings, counts.astype(np.int64))


# -- fitting and reconstruction ----------------------------------------------


@dataclass
class FitResult:
    visibilities: np.ndarray      # (4, 4), clamped to [0, 1]
    standard_errors: np.ndarray   # (4, 4)
    rss: np.ndarray               # (4, 4), residuals in frequency units
    n_settings: int
    mean_visibility: float = field(init=False)
    mean_standard_error: float = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.visibilities, dtype=float).reshape(len(PAIRS), len(OUTCOMES))
        self.visibilities = v
        self.mean_visibility = float(v.mean())
        self.mean_standard_error = float(v.std(ddof=1) / np.sqrt(v.size))

    def to_dict(self) -> dict:
        def table(a):
            return {p: {o: float(a[i, k]) for k, o in enumerate(OUTCOMES)}
                    for i, p in enumerate(PAIR_LABELS)}
        return {
            "visibilities": table(self.visibilities),
            "standard_errors": table(self.standard_errors),
            "rss": table(self.rss),
            "n_settings": self.n_settings,
            "mean_visibility": self.mean_visibility,
            "mean_standard_error": self.mean_standard_error,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FitResult":
        try:
            def grid(name):
                return np.array([[float(obj[name][p][o]) for o in OUTCOMES] for p in PAIR_LABELS])
            return cls(grid("visibilities"), grid("standard_errors"), grid("rss"),
                       int(obj["n_settings"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed fit JSON: {exc}") from None


def fit_visibilities(scan: CountsTable, min_settings: int = 5) -> FitResult:
    """Unweighted least-squares visibility for each of the sixteen surfaces.

    Observed frequencies ``f`` at each setting are matched to
    ``(1 + sign V cos s) / 16``; this is linear in ``V`` and solved in closed
    form.  Fitted values are clamped to ``[0, 1]``.
    """
    totals = scan.totals
    used = totals > 0
    if not np.any(used):
        raise FitDegenerate("counts table contains no events")
    freq = scan.counts[used] / totals[used, None, None]
    sums = pair_sums(scan.settings[used])
    n = freq.shape[0]

    vis = np.empty((len(PAIRS), len(OUTCOMES)))
    se = np.empty_like(vis)
    rss = np.empty_like(vis)
    for i, label in enumerate(PAIR_LABELS):
        distinct = np.unique(np.round(sums[:, i], 9)).size
        if distinct < min_settings:
            raise FitDegenerate(
                f"pair {label}: only {distinct} distinct phase sums, need {min_settings}"
            )
        cos_s = np.cos(sums[:, i])
        for k in range(len(OUTCOMES)):
            x = OUTCOME_SIGNS[k] * cos_s / 16.0
            y = freq[:, i, k] - 1.0 / 16.0
            sxx = float(x @ x)
            if sxx < 1e-14:
                raise FitDegenerate(f"pair {label}: phase sums carry no fringe contrast")
            v = min(max(float(x @ y) / sxx, 0.0), 1.0)
            r = y - v * x
            vis[i, k] = v
            rss[i, k] = float(r @ r)
            se[i, k] = np.sqrt(rss[i, k] / max(n - 1, 1) / sxx)
    return FitResult(vis, se, rss, n)


def reconstruct_cfim(fit: FitResult, phases) -> np.ndarray:
    """Closed-form CFIM evaluated with the fitted visibilities."""
    return analytic_cfim(phases, fit.visibilities)


# -- estimation --------------------------------------------------------------


@dataclass
class PhaseEstimate:
    value: float
    pair_sums: np.ndarray
    clamped: bool


def estimate_global_phase(counts: CountsTable, weights=AVERAGE_WEIGHTS,
                          fitted_visibility: float = 1.0) -> PhaseEstimate:
    """Estimate the average phase from a single-setting counts table.

    Each link's parity correlation ``C = (N++ + N-- - N+- - N-+) / N`` is
    inverted as ``s = arccos(C / V)``; the average phase is the sum of the
    four link estimates over 8, since each node sits on two links.  Only
    link sums inside ``(0, pi)`` are supported.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (NODES,) or not np.allclose(w, AVERAGE_WEIGHTS, rtol=0, atol=1e-12):
        raise InvalidInput("only the average-phase weights (1, 1, 1, 1)/4 are supported")
    if len(counts) != 1:
        raise InvalidInput(f"expected counts from a single phase setting, got {len(counts)}")
    if not 0.0 < fitted_visibility <= 1.0:
        raise InvalidInput("fitted visibility must lie in (0, 1]")
    true_sums = pair_sums(counts.settings[0])
    if np.any(true_sums <= 0.0) or np.any(true_sums >= np.pi):
        raise InvalidInput("every link phase sum must lie in the open interval (0, pi)")
    block = counts.counts[0].astype(float)
    n_pair = block.sum(axis=1)
    if np.any(n_pair == 0):
        raise InsufficientData("a link recorded no coincidences")
    corr = (block @ OUTCOME_SIGNS) / n_pair
    ratio = corr / fitted_visibility
    clamped = bool(np.any(np.abs(ratio) > 1.0))
    s_hat = np.arccos(np.clip(ratio, -1.0, 1.0))
    return PhaseEstimate(float(s_hat.sum() / 8.0), s_hat, clamped)
