"""Aggregated invariant suites for one surface, as used by ``h3flat verify``."""

from __future__ import annotations

import os

import numpy as np

from .caustics import focal_checks, normal_nontangency_check, singular_set, build_caustic
from .errors import H3FlatError
from .frames import transition_residual
from .surfaces import (DiscreteSurface, arctanh_sums, concircularity_report, gauss_area_check)

DEFAULT_TOL = 1e-9


def default_tol() -> float:
    """Relative tolerance, overridable through ``H3FLAT_TOL``."""
    raw = os.environ.get("H3FLAT_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ValueError(f"H3FLAT_TOL must be a number, got {raw!r}") from None
    if not tol > 0:
        raise ValueError("H3FLAT_TOL must be positive")
    return tol


def _suite(worst, tol, reason=""):
    if worst is None:
        return {"status": "skipped", "reason": reason}
    worst = float(worst)
    return {"status": "pass" if worst < tol else "fail", "worst": worst, "tol": tol}


def _skip(reason):
    return {"status": "skipped", "reason": reason}


def _gauss_worst(surface):
    worst = 0.0
    cone = 0.0
    for quad in surface.domain.quads:
        r = gauss_area_check(surface, quad)
        scale = abs(r.area_f)
        if scale == 0:
            continue
        worst = max(worst, abs(r.area_f - r.area_N) / scale, abs(r.mixed) / scale)
        cone = max(cone, r.light_cone)
    return worst, cone


def verify_surface(surface: DiscreteSurface, tol: float | None = None, d: float | None = None) -> dict:
    """Run every applicable suite; each reports ``pass``, ``fail`` or ``skipped``."""
    tol = default_tol() if tol is None else tol
    flat = surface.kind == "flat"
    has_g = surface.g is not None
    suites = {"model": _suite(surface.model_residual(), tol)}

    if surface.frame is None or not has_g:
        suites["transitions"] = _skip("document carries no frame or no g")
    elif surface.frame.kind == "W":
        suites["transitions"] = _skip("dressed frames have no edge transition")
    else:
        suites["transitions"] = _suite(transition_residual(surface.frame, surface.g), tol)

    suites["concircularity"] = _suite(concircularity_report(surface).worst, tol)

    if flat and has_g and surface.d == 1.0:
        suites["arctanh_curvature"] = _suite(np.max(np.abs(arctanh_sums(surface.g))), tol)
    else:
        suites["arctanh_curvature"] = _skip("needs the base flat surface with g")

    if flat:
        try:
            area, cone = _gauss_worst(surface)
            suites["gauss_area"] = _suite(area, tol)
            suites["light_cone"] = _suite(cone, tol)
        except H3FlatError as exc:
            suites["gauss_area"] = {"status": "fail", "reason": str(exc)}
    else:
        suites["gauss_area"] = _skip("defined for flat surfaces")

    caustic = None
    if flat and has_g and np.all(surface.g.lam_alpha_v < 0) and np.all(surface.g.lam_alpha_v > -1):
        fc = focal_checks(surface)
        worst = max(fc.p_vs_q, fc.equidistance, max(fc.lift_vs_focal.values()), fc.tanh_vs_R31)
        suites["caustic"] = _suite(worst, tol)
        caustic = build_caustic(surface, with_normals=False)
    else:
        suites["caustic"] = _skip("needs a flat surface with -1 < lam*alpha < 0 on vertical edges")

    if flat:
        margin = normal_nontangency_check(surface).min_margin
        suites["nontangency"] = {"status": "pass" if margin > tol else "fail", "worst": float(margin),
                                 "tol": tol}
    else:
        suites["nontangency"] = _skip("defined for flat surfaces")

    if d is not None:
        if caustic is None:
            suites["valence"] = _skip("no caustic")
        else:
            suites["valence"] = valence_suite(singular_set(surface, caustic, d))

    ok = all(s["status"] == "pass" or s["status"].startswith("skipped") for s in suites.values())
    return {"ok": ok, "tol": tol, "suites": suites}


def valence_suite(graph) -> dict:
    status = graph.valence_status
    out = {"status": status, "min_valence": graph.min_valence}
    if status.startswith("skipped"):
        reasons = []
        if graph.coincident_vertices:
            reasons.append(f"{len(graph.coincident_vertices)} coincident adjacent vertices")
        if graph.nonembedded_faces:
            reasons.append(f"{len(graph.nonembedded_faces)} non-embedded caustic faces")
        out["reason"] = ", ".join(reasons)
    return out
