"""Figure rendering for the CLI report paths.

Every sweep subcommand writes its CSV and, unless --no-plot is given, a PNG
with the same basename next to it.  The CSV schemas are the machine contract;
the figures are for eyeballing.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

_SCHEME_STYLE = {
    "ccdm": ("tab:red", "o"),
    "mpdm": ("tab:green", "s"),
    "ess": ("tab:blue", "^"),
    "sm": ("tab:purple", "v"),
    "uniform": ("0.4", "x"),
}


def _style(scheme):
    return _SCHEME_STYLE.get(scheme, ("tab:orange", "d"))


def _by_scheme(rows):
    out = {}
    for r in rows:
        out.setdefault(r["scheme"], []).append(r)
    return out


def render_rateloss(rows, path: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for scheme, rs in _by_scheme(rows).items():
        color, marker = _style(scheme)
        ax.semilogy([r["n"] for r in rs], [max(r["rloss"], 1e-6) for r in rs],
                    color=color, marker=marker, ms=3.5, lw=1.2, label=scheme)
    ax.set_xlabel("blocklength n")
    ax.set_ylabel("rate loss [bit/1-D]")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_air(rows, path: str, capacity: bool = True):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    snrs = sorted({r["snr_db"] for r in rows})
    if capacity and snrs:
        ax.plot(snrs, [0.5 * math.log2(1 + 10 ** (s / 10)) for s in snrs],
                "k-", lw=1.0, label="capacity")
    for scheme, rs in _by_scheme(rows).items():
        color, marker = _style(scheme)
        rs = sorted(rs, key=lambda r: r["snr_db"])
        ax.plot([r["snr_db"] for r in rs], [r["air"] for r in rs],
                color=color, marker=marker, ms=3, lw=1.2, label=scheme)
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("AIR [bit/1-D]")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_g2c(rows, path: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    rs = sorted(rows, key=lambda r: r["Hx"])
    finite = [r for r in rs if math.isfinite(r["delta_snr_db"])]
    ax.plot([r["Hx"] for r in finite], [r["delta_snr_db"] for r in finite], "b-", lw=1.4)
    ax.set_xlabel("channel input entropy H(X) [bit/1-D]")
    ax.set_ylabel("gap to capacity [dB]")
    ax.grid(True, alpha=0.3)
    sec = ax.secondary_xaxis("top")
    if finite:
        ticks = finite[:: max(len(finite) // 6, 1)]
        sec.set_xticks([r["Hx"] for r in ticks])
        sec.set_xticklabels([f"{r['Rc']:.3f}" for r in ticks])
    sec.set_xlabel("FEC code rate")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fer(rows_by_label, path: str):
    """rows_by_label: {label: fer rows}; single-run callers pass one entry."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, rows in rows_by_label.items():
        color, marker = _style(label)
        rs = sorted(rows, key=lambda r: r["snr_db"])
        pts = [(r["snr_db"], r["fer"]) for r in rs if r["fer"] > 0]
        if pts:
            ax.semilogy(*zip(*pts), color=color, marker=marker, ms=4, lw=1.2, label=label)
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("FER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_cost(reports, path: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for rep in reports:
        ops = rep.ops_per_symbol.get("bit_ops")
        if ops is None:
            continue
        color, marker = _style(rep.scheme)
        ax.loglog([rep.storage_bits / 8000.0], [ops], color=color, marker=marker, ms=9, ls="none",
                  label=f"{rep.scheme} n={rep.n}")
    ax.set_xlabel("storage [kB]")
    ax.set_ylabel("bit operations / 1-D")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
