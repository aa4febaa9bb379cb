"""Figure data: fitted fringe curves and CFIM eigenstructure."""
from __future__ import annotations

import csv
import io

import numpy as np

from .matops import NOISY_THRESHOLD, eigensym
from .protocol import (
    OUTCOMES,
    PAIR_LABELS,
    CountsTable,
    FitResult,
    outcome_probabilities,
    reconstruct_cfim,
)


def fringe_curves_csv(scan: CountsTable, fit: FitResult) -> str:
    """Observed frequency and fitted probability for every scan record."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["phi1", "phi2", "phi3", "phi4", "pair", "outcome", "observed", "fitted"])
    for phi, block in zip(scan.settings, scan.counts):
        total = block.sum()
        if total == 0:
            continue
        model = outcome_probabilities(phi, fit.visibilities)
        for i, pair in enumerate(PAIR_LABELS):
            for k, outcome in enumerate(OUTCOMES):
                writer.writerow(
                    [f"{x:.12g}" for x in phi]
                    + [pair, outcome, f"{block[i, k] / total:.17g}", f"{model[i, k]:.17g}"]
                )
    return buf.getvalue()


def eigen_report(fit: FitResult, phase_points, rank_threshold: float = NOISY_THRESHOLD) -> list[dict]:
    """Eigenvalues/eigenvectors of reconstructed CFIMs at equal-phase points."""
    out = []
    for phi in phase_points:
        phases = np.full(4, float(phi))
        f = reconstruct_cfim(fit, phases)
        es = eigensym(f, rank_threshold)
        out.append({
            "phases": phases.tolist(),
            "cfim": f.tolist(),
            "eigenvalues": es.eigenvalues.tolist(),
            "eigenvectors": es.eigenvectors.T.tolist(),
            "rank": es.rank,
            "rank_threshold": rank_threshold,
        })
    return out
