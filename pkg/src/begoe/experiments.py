"""Ensemble experiments that pair numerical observables with theory curves.

Every function takes an :class:`EnsembleSpec` and returns
:class:`ObservableSeries` objects whose ``extra`` columns carry the
matching analytic curve, so a single CSV holds both.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dynamics import (
    TimeGrid,
    efficiency_distribution,
    entropy_production,
    fit_entropy_alpha,
)
from .kbody_ensemble import EnsembleSpec
from .qtheory import (
    QTheoryParams,
    fit_q,
    fk_conditional,
    q_formula,
    smooth_lh,
    smooth_npc,
    theory_entropy,
    weight_v,
)
from .series import ObservableSeries
from .spectral_analysis import (
    HistogramSpec,
    bin_series,
    density_histogram,
    ldos_counts,
    ldos_ensemble,
    lh_numeric,
    map_members,
    npc_numeric,
    zeta_from_H,
)

__all__ = [
    "EnsembleResults",
    "ensemble_pass",
    "density_series",
    "ldos_series",
    "npc_series",
    "lh_series",
    "zeta_series",
    "qparam_series",
    "entropy_series",
    "transport_series",
    "lambda_scan",
]


@dataclass
class EnsembleResults:
    """Per-member reductions gathered in one diagonalization pass."""

    spec: EnsembleSpec
    eigenvalues: list
    zetas: np.ndarray
    ldos: list | None = None
    npc: list | None = None
    lh: list | None = None
    entropy: list | None = None

    @property
    def zeta(self) -> float:
        return float(np.mean(self.zetas))

    def params(self) -> QTheoryParams:
        s = self.spec
        return QTheoryParams(q_formula(s.N, s.m, s.k), min(self.zeta, 1.0 - 1e-12), s.dim)


def ensemble_pass(spec: EnsembleSpec, *, ldos: bool = False, states: bool = False,
                  time_grid: TimeGrid | None = None, hist: HistogramSpec = HistogramSpec(),
                  target_Ek: float = 0.0, n_k: int | None = None, threads: int | None = None) -> EnsembleResults:
    """Diagonalize every member once and keep only the requested reductions."""

    def one(ham, data):
        out = {"eig": data.eigenvalues, "zeta": zeta_from_H(ham)}
        if ldos:
            out["ldos"] = ldos_counts(data, target_Ek, n_k, hist)
        if states:
            out["npc"] = npc_numeric(data)
            out["lh"] = lh_numeric(data)
        if time_grid is not None:
            out["entropy"] = entropy_production(data, grid=time_grid)
        return out

    rows = map_members(spec, one, threads=threads)
    pick = lambda key: [r[key] for r in rows] if key in rows[0] else None
    return EnsembleResults(spec, pick("eig"), np.array(pick("zeta")), pick("ldos"), pick("npc"),
                           pick("lh"), pick("entropy"))


def density_series(res: EnsembleResults, hist: HistogramSpec = HistogramSpec()):
    s = res.spec
    dc = density_histogram(res.eigenvalues, hist)
    q = q_formula(s.N, s.m, s.k)
    ser = ObservableSeries("density", dc.abscissa, dc.values, extra={"theory": weight_v(dc.abscissa, q)})
    return ser, {"q_formula": q, "q_fit": fit_q(dc)}


def ldos_series(res: EnsembleResults, hist: HistogramSpec = HistogramSpec(), target_Ek: float = 0.0):
    dc = ldos_ensemble(res.ldos, spec=hist)
    p = res.params()
    theory = fk_conditional(dc.abscissa, target_Ek, p)
    return ObservableSeries("ldos", dc.abscissa, dc.values, extra={"theory": theory}), {
        "q_formula": p.q, "zeta": p.zeta}


def _state_series(name, per_member, res, bins, range, theory_fn):
    ser = bin_series(per_member, bins, range, label=name)
    p = res.params()
    ser.extra["theory"] = theory_fn(ser.abscissa, p)
    return ser, {"q_formula": p.q, "zeta": p.zeta, "d_m": p.d_m}


def npc_series(res: EnsembleResults, bins: int = 25, range=(-2.5, 2.5)):
    return _state_series("npc", res.npc, res, bins, range, smooth_npc)


def lh_series(res: EnsembleResults, bins: int = 25, range=(-2.5, 2.5)):
    return _state_series("lh", res.lh, res, bins, range, smooth_lh)


def zeta_series(spec: EnsembleSpec, threads: int | None = None):
    """Trace-wise zeta of every member (no diagonalization)."""
    z = np.array(map_members(spec, lambda h, _: zeta_from_H(h), threads=threads, diagonalize_members=False))
    return ObservableSeries("zeta", np.arange(spec.members), z, extra={"zeta2": z * z}), {
        "zeta_mean": float(z.mean()), "zeta2_mean": float(np.mean(z * z))}


def qparam_series(N: int, m: int):
    ks = np.arange(1, m + 1)
    return ObservableSeries("qparam", ks, [q_formula(N, m, int(k)) for k in ks]), {"N": N, "m": m}


def entropy_series(res: EnsembleResults):
    """Ensemble-mean S(t) and F(t) with the fitted short-time estimate."""
    S = np.array([e.value for e in res.entropy])
    F = np.array([e.extra["survival"] for e in res.entropy])
    n = len(S)
    Sm, Fm = S.mean(0), F.mean(0)
    p = res.params()
    alpha, rms = fit_entropy_alpha(Sm, Fm, p)
    ser = ObservableSeries(
        "entropy", res.entropy[0].abscissa, Sm, S.std(0, ddof=1) / np.sqrt(n) if n > 1 else None,
        extra={"survival": Fm, "theory": theory_entropy(Fm, p, alpha)},
    )
    return ser, {"alpha": alpha, "rms_residual": rms, "zeta": p.zeta, "q_formula": p.q}


def transport_series(spec: EnsembleSpec, pairing: str = "endpoints", points: int = 2000,
                     in_index: int = 0, threads: int | None = None):
    dist = efficiency_distribution(spec, pairing, points, in_index, threads=threads)
    P = dist.P
    return dist.histogram, {
        "pairing": pairing, "median_P": float(np.median(P)), "fraction_above_0.9": float(np.mean(P > 0.9)),
        "unresolved_fraction": dist.unresolved_fraction}


def lambda_scan(spec: EnsembleSpec, lambdas, hist: HistogramSpec = HistogramSpec(), threads: int | None = None):
    """Fitted q and mean zeta^2 as functions of the interaction strength."""
    qfit, z2 = [], []
    for lam in lambdas:
        res = ensemble_pass(replace(spec, lam=float(lam)), threads=threads)
        qfit.append(fit_q(density_histogram(res.eigenvalues, hist)))
        z2.append(float(np.mean(res.zetas**2)))
    return ObservableSeries("lambda_scan", lambdas, qfit, extra={"zeta2": z2}), {
        "q_formula": q_formula(spec.N, spec.m, spec.k)}
