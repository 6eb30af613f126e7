"""Report figures for sweeps and benchmarks."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps repeated renders byte-stable
_PNG_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META if str(path).endswith(".png") else None)
    plt.close(fig)


def sweep_figure(rows, path, title=None):
    """VAE and NVD per cell against pitch, one line per roll (averaged over depth)."""
    fig, (ax_vae, ax_nvd) = plt.subplots(1, 2, figsize=(10, 4))
    ok = [r for r in rows if np.isfinite(r["vae_median"])]
    rolls = sorted({r["roll_deg"] for r in ok})
    for roll in rolls:
        sel = [r for r in ok if r["roll_deg"] == roll]
        pitches = sorted({r["pitch_deg"] for r in sel})
        vae = [np.mean([r["vae_median"] for r in sel if r["pitch_deg"] == p]) for p in pitches]
        nvd = [np.mean([r["nvd_median"] for r in sel if r["pitch_deg"] == p]) for p in pitches]
        ax_vae.plot(pitches, vae, marker="o", label=f"roll {roll:g} deg")
        ax_nvd.plot(pitches, nvd, marker="o", label=f"roll {roll:g} deg")
    ax_vae.set_xlabel("pitch (deg)")
    ax_vae.set_ylabel("median VAE (px)")
    if ok and min(r["vae_median"] for r in ok) > 0:
        ax_vae.set_yscale("log")
    ax_nvd.set_xlabel("pitch (deg)")
    ax_nvd.set_ylabel("median NVD")
    if rolls:
        ax_nvd.legend(fontsize="small")
    if title:
        fig.suptitle(title)
    _save(fig, path)


def bench_figure(times_ms, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    t = np.asarray(times_ms)
    ax.hist(t, bins=60, range=(0, np.percentile(t, 99.5)), color="0.4")
    ax.axvline(np.median(t), color="C3", label=f"median {np.median(t) * 1e3:.1f} us")
    ax.set_xlabel("single-sample estimate (ms)")
    ax.set_ylabel("count")
    ax.legend()
    _save(fig, path)
