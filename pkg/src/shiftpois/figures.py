"""Matplotlib renderings of estimates and benchmark reports.

All functions write PNG files and are deterministic: fixed figure geometry,
fixed dpi, and a constant metadata block (matplotlib would otherwise stamp
its version string into the file).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_estimate_curve", "save_risk_curves", "save_rate_fit",
           "save_hypothesis_risks"]

_DPI = 120


def _metadata(extra: str | None = None) -> dict:
    meta = {"Software": "shiftpois"}
    if extra is not None:
        meta["Description"] = extra
    return meta


def _finish(fig, path, meta: str | None) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI, metadata=_metadata(meta))
    plt.close(fig)


def save_estimate_curve(ts, values, path, truth=None, meta: str | None = None) -> None:
    """Estimated intensity on a grid, optionally against the true curve."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(ts, values, lw=1.4, label="estimate")
    if truth is not None:
        ax.plot(ts, truth, lw=1.0, ls="--", color="0.4", label="truth")
        ax.legend(frameon=False)
    ax.set_xlabel("t")
    ax.set_ylabel("intensity")
    ax.set_xlim(0.0, 1.0)
    _finish(fig, path, meta)


def save_risk_curves(rows, path, meta: str | None = None) -> None:
    """Empirical MISE vs n on log-log axes, exact risk overlaid when known.

    rows: iterables of dicts with n, mise_mean, mise_stderr, optional
    exact_risk (the RiskRow.to_dict shape).
    """
    rows = [dict(r) for r in rows]
    ns = np.array([r["n"] for r in rows], dtype=float)
    means = np.array([r["mise_mean"] for r in rows])
    errs = np.array([r["mise_stderr"] for r in rows])
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.errorbar(ns, means, yerr=3 * errs, fmt="o-", ms=4, lw=1.2, capsize=3,
                label="Monte Carlo (3 se)")
    exact = [r.get("exact_risk") for r in rows]
    if all(e is not None for e in exact):
        ax.plot(ns, exact, "s--", ms=4, lw=1.0, color="0.35", label="exact risk")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("MISE")
    ax.legend(frameon=False)
    _finish(fig, path, meta)


def save_rate_fit(ns, values, slope, intercept, path,
                  meta: str | None = None) -> None:
    """Log-log points with the fitted power law and its slope in the label."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.plot(ns, values, "o", ms=5, label="risk")
    fit = np.exp(intercept) * ns ** slope
    ax.plot(ns, fit, "-", lw=1.2, color="0.35",
            label=f"fit: slope {slope:+.3f}")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("risk")
    ax.legend(frameon=False)
    _finish(fig, path, meta)


def save_hypothesis_risks(labels, means, stderrs, path,
                          meta: str | None = None) -> None:
    """Per-hypothesis empirical risks as a bar chart with 3 se whiskers."""
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(max(6.4, 0.5 * len(labels) + 2), 4.2))
    ax.bar(x, means, yerr=3 * np.asarray(stderrs), capsize=3, color="#4878a8")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=90, fontsize=7)
    ax.set_xlabel("hypothesis")
    ax.set_ylabel("MISE")
    _finish(fig, path, meta)
